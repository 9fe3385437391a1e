//! Tokenization, vocabulary statistics and frequency subsampling.
//!
//! Three tokenizer modes cover space-delimited text and text without word
//! delimiters: `Whitespace` splits on runs of Unicode whitespace,
//! `PerCharacter` emits every non-whitespace character as its own token and
//! `PreSegmented` treats input that an external segmenter already split.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub const DEFAULT_MIN_COUNT: u64 = 5;

#[derive(Debug, Error, PartialEq)]
pub enum CorpusError {
    #[error("invalid UTF-8 in input at byte offset {offset}")]
    Decode { offset: usize },
    #[error("empty vocabulary: no word occurs at least {min_count} times")]
    EmptyVocabulary { min_count: u64 },
    #[error("relative frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),
    #[error("subsampling threshold must be non-negative and finite, got {0}")]
    InvalidThreshold(f64),
    #[error("unknown tokenizer mode `{0}` (expected whitespace, per-character or pre-segmented)")]
    UnknownTokenizer(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenizerMode {
    Whitespace,
    PerCharacter,
    PreSegmented,
}

impl TokenizerMode {
    /// Case folding is on for word-delimited text and off for per-character
    /// text unless explicitly requested.
    pub fn default_lowercase(self) -> bool {
        !matches!(self, TokenizerMode::PerCharacter)
    }
}

impl fmt::Display for TokenizerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TokenizerMode::Whitespace => "whitespace",
            TokenizerMode::PerCharacter => "per-character",
            TokenizerMode::PreSegmented => "pre-segmented",
        })
    }
}

impl FromStr for TokenizerMode {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "whitespace" => Ok(TokenizerMode::Whitespace),
            "per-character" | "char" | "character" => Ok(TokenizerMode::PerCharacter),
            "pre-segmented" | "segmented" => Ok(TokenizerMode::PreSegmented),
            _ => Err(CorpusError::UnknownTokenizer(s.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusConfig {
    pub min_count: u64,
    /// Subsampling threshold; `0.0` disables subsampling.
    pub subsample_t: f64,
    pub tokenizer_mode: TokenizerMode,
    pub lowercase: bool,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            min_count: DEFAULT_MIN_COUNT,
            subsample_t: 0.0,
            tokenizer_mode: TokenizerMode::Whitespace,
            lowercase: true,
        }
    }
}

impl CorpusConfig {
    pub fn subsampling_enabled(&self) -> bool {
        self.subsample_t > 0.0
    }
}

/// Split `text` into tokens.
pub fn tokenize(text: &str, mode: TokenizerMode, lowercase: bool) -> Vec<String> {
    let fold = |s: &str| {
        if lowercase {
            s.to_lowercase()
        } else {
            s.to_owned()
        }
    };
    match mode {
        TokenizerMode::Whitespace | TokenizerMode::PreSegmented => {
            text.split_whitespace().map(fold).collect()
        }
        TokenizerMode::PerCharacter => text
            .chars()
            .filter(|c| !c.is_whitespace())
            .flat_map(|c| {
                if lowercase {
                    c.to_lowercase().map(String::from).collect::<Vec<_>>()
                } else {
                    vec![c.to_string()]
                }
            })
            .collect(),
    }
}

/// Decode `bytes` as UTF-8 and tokenize. The error carries the offset of the
/// first invalid byte.
pub fn tokenize_bytes(
    bytes: &[u8],
    mode: TokenizerMode,
    lowercase: bool,
) -> Result<Vec<String>, CorpusError> {
    let text = std::str::from_utf8(bytes).map_err(|e| CorpusError::Decode {
        offset: e.valid_up_to(),
    })?;
    Ok(tokenize(text, mode, lowercase))
}

/// Word counts sorted by descending frequency.
///
/// Ties are broken by order of first occurrence, so the same token stream
/// always yields the same indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    entries: Vec<(String, u64)>,
    index: HashMap<String, usize>,
    total_tokens: u64,
}

impl Vocabulary {
    /// Build from `(word, count)` pairs already in the desired order.
    ///
    /// Re-sorts by descending count (stable, so input order breaks ties) and
    /// drops zero counts. Duplicate words are merged into their first slot.
    pub fn from_counts<I, S>(counts: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut entries: Vec<(String, u64)> = Vec::new();
        let mut seen: HashMap<String, usize> = HashMap::new();
        for (word, count) in counts {
            let word = word.into();
            match seen.get(&word) {
                Some(&i) => entries[i].1 += count,
                None => {
                    seen.insert(word.clone(), entries.len());
                    entries.push((word, count));
                }
            }
        }
        entries.retain(|(_, c)| *c > 0);
        if entries.is_empty() {
            return Err(CorpusError::EmptyVocabulary { min_count: 1 });
        }
        entries.sort_by_key(|e| std::cmp::Reverse(e.1));
        Ok(Self::from_sorted(entries))
    }

    fn from_sorted(entries: Vec<(String, u64)>) -> Self {
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, (w, _))| (w.clone(), i))
            .collect();
        let total_tokens = entries.iter().map(|(_, c)| c).sum();
        Vocabulary {
            entries,
            index,
            total_tokens,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, idx: usize) -> &str {
        &self.entries[idx].0
    }

    pub fn count(&self, idx: usize) -> u64 {
        self.entries[idx].1
    }

    pub fn frequency(&self, idx: usize) -> f64 {
        self.entries[idx].1 as f64 / self.total_tokens as f64
    }

    pub fn entries(&self) -> &[(String, u64)] {
        &self.entries
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(w, _)| w.as_str())
    }

    pub fn counts(&self) -> Vec<u64> {
        self.entries.iter().map(|(_, c)| *c).collect()
    }

    /// Map tokens to indices, dropping out-of-vocabulary tokens.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        tokens
            .iter()
            .filter_map(|t| self.index_of(t.as_ref()))
            .collect()
    }
}

/// Count `tokens` and keep the words occurring at least `min_count` times.
pub fn build_vocab<S: AsRef<str>>(tokens: &[S], min_count: u64) -> Result<Vocabulary, CorpusError> {
    let mut order: Vec<(String, u64)> = Vec::new();
    let mut slot: HashMap<&str, usize> = HashMap::new();
    for tok in tokens {
        let tok = tok.as_ref();
        match slot.get(tok) {
            Some(&i) => order[i].1 += 1,
            None => {
                slot.insert(tok, order.len());
                order.push((tok.to_owned(), 1));
            }
        }
    }
    order.retain(|(_, c)| *c >= min_count.max(1));
    if order.is_empty() {
        return Err(CorpusError::EmptyVocabulary { min_count });
    }
    // stable: first occurrence wins ties
    order.sort_by_key(|e| std::cmp::Reverse(e.1));
    Ok(Vocabulary::from_sorted(order))
}

/// Probability of keeping one occurrence of a word with relative frequency
/// `f`: `min(1, sqrt(t / f))`, or 1 when `t == 0`.
pub fn keep_probability(relative_frequency: f64, t: f64) -> Result<f64, CorpusError> {
    if relative_frequency.is_nan() || relative_frequency <= 0.0 {
        return Err(CorpusError::NonPositiveFrequency(relative_frequency));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(CorpusError::InvalidThreshold(t));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    Ok((t / relative_frequency).sqrt().min(1.0))
}

/// Randomly discard frequent word occurrences.
///
/// `tokens` are vocabulary indices. With `t == 0` the input is returned as is.
pub fn subsample(
    tokens: &[usize],
    vocab: &Vocabulary,
    t: f64,
    rng_seed: u64,
) -> Result<Vec<usize>, CorpusError> {
    if t == 0.0 {
        return Ok(tokens.to_vec());
    }
    let keep = (0..vocab.len())
        .map(|i| keep_probability(vocab.frequency(i), t))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    Ok(tokens
        .iter()
        .copied()
        .filter(|&w| {
            let p = keep[w];
            // always draw so the stream position does not depend on p
            let u: f64 = rng.gen();
            p >= 1.0 || u < p
        })
        .collect())
}
