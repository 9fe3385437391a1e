//! Stimulus specification files.
//!
//! ```text
//! # comments start with '#'
//! [meta]
//! name = animacy
//! embeddings = animacy.vec        # optional, relative to the spec file
//! ungrammatical = measured        # or `complement`: ungrammatical = 1 - grammatical
//! one_sided = false               # allow test nouns with a single tag
//!
//! [novel_words]
//! gi
//! ro
//!
//! [training]
//! lion<TAB>gi                     # optional third column: second-store noun
//!
//! [test]
//! tiger<TAB>gi<TAB>grammatical    # optional fourth column: second-store noun
//!
//! [hyper]
//! eta = 0.01
//! gamma = 0.01
//! hidden = 100
//! epochs = 200
//! seed = 1
//! dim = 300                       # optional expected embedding dimension
//! ```

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::classifier::ClassifierConfig;

use super::ExperimentError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    Grammatical,
    Ungrammatical,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tag::Grammatical => "grammatical",
            Tag::Ungrammatical => "ungrammatical",
        })
    }
}

impl FromStr for Tag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "grammatical" | "g" | "control" => Ok(Tag::Grammatical),
            "ungrammatical" | "u" | "violation" => Ok(Tag::Ungrammatical),
            _ => Err(format!(
                "unknown tag `{s}` (expected grammatical or ungrammatical)"
            )),
        }
    }
}

/// How the ungrammatical trace is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UngrammaticalMode {
    /// Average the activations of the ungrammatical test pairs.
    #[default]
    Measured,
    /// Report `1 - mean_grammatical`.
    Complement,
}

/// Which noun column to read. `Secondary` is the optional extra column used
/// when the same stimuli are run against a second embedding space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Side {
    #[default]
    Primary,
    Secondary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPair {
    pub noun: String,
    pub novel_word: String,
    pub alt_noun: Option<String>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestPair {
    pub noun: String,
    pub novel_word: String,
    pub tag: Tag,
    pub alt_noun: Option<String>,
    pub line: usize,
}

impl TrainingPair {
    pub fn noun_for(&self, side: Side) -> Option<&str> {
        match side {
            Side::Primary => Some(&self.noun),
            Side::Secondary => self.alt_noun.as_deref(),
        }
    }
}

impl TestPair {
    pub fn noun_for(&self, side: Side) -> Option<&str> {
        match side {
            Side::Primary => Some(&self.noun),
            Side::Secondary => self.alt_noun.as_deref(),
        }
    }
}

/// Optional classifier settings. Unset fields fall through to the next layer
/// (command-line flags over spec file over built-in defaults).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HyperOverrides {
    pub eta: Option<f64>,
    pub gamma: Option<f64>,
    pub hidden: Option<usize>,
    pub epochs: Option<usize>,
    pub seed: Option<u64>,
    pub dim: Option<usize>,
}

impl HyperOverrides {
    pub fn apply(&self, mut cfg: ClassifierConfig) -> ClassifierConfig {
        if let Some(v) = self.eta {
            cfg.learning_rate = v;
        }
        if let Some(v) = self.gamma {
            cfg.weight_decay = v;
        }
        if let Some(v) = self.hidden {
            cfg.hidden_dim = v;
        }
        if let Some(v) = self.epochs {
            cfg.epochs = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        cfg
    }

    /// Fields set in `other` win.
    pub fn merged(&self, other: &HyperOverrides) -> HyperOverrides {
        HyperOverrides {
            eta: other.eta.or(self.eta),
            gamma: other.gamma.or(self.gamma),
            hidden: other.hidden.or(self.hidden),
            epochs: other.epochs.or(self.epochs),
            seed: other.seed.or(self.seed),
            dim: other.dim.or(self.dim),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub novel_words: Vec<String>,
    pub training_pairs: Vec<TrainingPair>,
    pub test_pairs: Vec<TestPair>,
    pub embedding_source: Option<PathBuf>,
    pub hyper: HyperOverrides,
    pub ungrammatical: UngrammaticalMode,
    pub one_sided: bool,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Meta,
    NovelWords,
    Training,
    Test,
    Hyper,
}

fn invalid(line: usize, message: impl Into<String>) -> ExperimentError {
    ExperimentError::Validation {
        line: Some(line),
        message: message.into(),
    }
}

fn parse_bool(line: usize, v: &str) -> Result<bool, ExperimentError> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(invalid(line, format!("expected a boolean, got `{v}`"))),
    }
}

fn parse_num<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T, ExperimentError> {
    v.parse()
        .map_err(|_| invalid(line, format!("invalid value `{v}` for `{key}`")))
}

impl ExperimentSpec {
    /// Parse and validate a spec. `base_dir` resolves a relative
    /// `embeddings` path.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self, ExperimentError> {
        let mut spec = ExperimentSpec {
            name: String::from("experiment"),
            novel_words: Vec::new(),
            training_pairs: Vec::new(),
            test_pairs: Vec::new(),
            embedding_source: None,
            hyper: HyperOverrides::default(),
            ungrammatical: UngrammaticalMode::Measured,
            one_sided: false,
        };
        let mut section = Section::None;
        let mut seen_sections = HashSet::new();

        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim_end();
            if line.trim().is_empty() {
                continue;
            }
            let trimmed = line.trim();
            if trimmed.starts_with('[') && trimmed.ends_with(']') {
                section = match &trimmed[1..trimmed.len() - 1] {
                    "meta" => Section::Meta,
                    "novel_words" => Section::NovelWords,
                    "training" => Section::Training,
                    "test" => Section::Test,
                    "hyper" => Section::Hyper,
                    other => return Err(invalid(lineno, format!("unknown section `[{other}]`"))),
                };
                if !seen_sections.insert(trimmed.to_owned()) {
                    return Err(invalid(lineno, format!("section {trimmed} appears twice")));
                }
                continue;
            }
            match section {
                Section::None => {
                    return Err(invalid(lineno, "content before the first section header"))
                }
                Section::Meta | Section::Hyper => {
                    let (key, value) = trimmed
                        .split_once('=')
                        .map(|(k, v)| (k.trim(), v.trim()))
                        .ok_or_else(|| invalid(lineno, "expected `key = value`"))?;
                    if section == Section::Meta {
                        match key {
                            "name" => spec.name = value.to_owned(),
                            "embeddings" => {
                                let p = PathBuf::from(value);
                                spec.embedding_source = Some(match base_dir {
                                    Some(dir) if p.is_relative() => dir.join(p),
                                    _ => p,
                                });
                            }
                            "ungrammatical" => {
                                spec.ungrammatical = match value {
                                    "measured" => UngrammaticalMode::Measured,
                                    "complement" => UngrammaticalMode::Complement,
                                    _ => {
                                        return Err(invalid(
                                            lineno,
                                            format!("ungrammatical must be `measured` or `complement`, got `{value}`"),
                                        ))
                                    }
                                }
                            }
                            "one_sided" => spec.one_sided = parse_bool(lineno, value)?,
                            _ => return Err(invalid(lineno, format!("unknown meta key `{key}`"))),
                        }
                    } else {
                        let h = &mut spec.hyper;
                        match key {
                            "eta" => h.eta = Some(parse_num(lineno, key, value)?),
                            "gamma" => h.gamma = Some(parse_num(lineno, key, value)?),
                            "hidden" => h.hidden = Some(parse_num(lineno, key, value)?),
                            "epochs" => h.epochs = Some(parse_num(lineno, key, value)?),
                            "seed" => h.seed = Some(parse_num(lineno, key, value)?),
                            "dim" => h.dim = Some(parse_num(lineno, key, value)?),
                            _ => return Err(invalid(lineno, format!("unknown hyper key `{key}`"))),
                        }
                    }
                }
                Section::NovelWords => {
                    if trimmed.split_whitespace().count() != 1 {
                        return Err(invalid(lineno, "novel words must be single tokens"));
                    }
                    spec.novel_words.push(trimmed.to_owned());
                }
                Section::Training => {
                    let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
                    if !(2..=3).contains(&cols.len()) || cols.iter().any(|c| c.is_empty()) {
                        return Err(invalid(
                            lineno,
                            "training rows are noun<TAB>novel_word[<TAB>second-store noun]",
                        ));
                    }
                    spec.training_pairs.push(TrainingPair {
                        noun: cols[0].to_owned(),
                        novel_word: cols[1].to_owned(),
                        alt_noun: cols.get(2).map(|s| s.to_string()),
                        line: lineno,
                    });
                }
                Section::Test => {
                    let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
                    if !(3..=4).contains(&cols.len()) || cols.iter().any(|c| c.is_empty()) {
                        return Err(invalid(
                            lineno,
                            "test rows are noun<TAB>novel_word<TAB>tag[<TAB>second-store noun]",
                        ));
                    }
                    let tag = cols[2].parse().map_err(|m: String| invalid(lineno, m))?;
                    spec.test_pairs.push(TestPair {
                        noun: cols[0].to_owned(),
                        novel_word: cols[1].to_owned(),
                        tag,
                        alt_noun: cols.get(3).map(|s| s.to_string()),
                        line: lineno,
                    });
                }
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ExperimentError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path.parent())
    }

    /// Check every structural invariant that does not need embeddings.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let whole = |m: String| ExperimentError::Validation {
            line: None,
            message: m,
        };
        if self.novel_words.len() < 2 {
            return Err(whole(format!(
                "need at least 2 novel words, found {}",
                self.novel_words.len()
            )));
        }
        let mut words = HashSet::new();
        for w in &self.novel_words {
            if !words.insert(w.as_str()) {
                return Err(whole(format!("novel word `{w}` is listed twice")));
            }
        }
        if self.training_pairs.is_empty() {
            return Err(whole("no training pairs".into()));
        }
        if self.test_pairs.is_empty() {
            return Err(whole("no test pairs".into()));
        }
        for p in &self.training_pairs {
            if !words.contains(p.novel_word.as_str()) {
                return Err(invalid(
                    p.line,
                    format!(
                        "training pair `{} {}` uses undeclared novel word `{}`",
                        p.noun, p.novel_word, p.novel_word
                    ),
                ));
            }
        }
        for p in &self.test_pairs {
            if !words.contains(p.novel_word.as_str()) {
                return Err(invalid(
                    p.line,
                    format!(
                        "test pair `{} {}` uses undeclared novel word `{}`",
                        p.noun, p.novel_word, p.novel_word
                    ),
                ));
            }
        }

        for side in [Side::Primary, Side::Secondary] {
            let trained: HashSet<&str> = self
                .training_pairs
                .iter()
                .filter_map(|p| p.noun_for(side))
                .collect();
            for p in &self.test_pairs {
                if let Some(noun) = p.noun_for(side) {
                    if trained.contains(noun) {
                        return Err(invalid(
                            p.line,
                            format!(
                                "test pair `{noun} {}`: noun `{noun}` also appears in training",
                                p.novel_word
                            ),
                        ));
                    }
                }
            }
        }

        let has_alt = |a: &Option<String>| a.is_some();
        let any_alt = self.training_pairs.iter().any(|p| has_alt(&p.alt_noun))
            || self.test_pairs.iter().any(|p| has_alt(&p.alt_noun));
        if any_alt {
            self.require_secondary()?;
        }

        if !self.one_sided {
            let mut tags: HashMap<&str, (bool, bool, usize)> = HashMap::new();
            for p in &self.test_pairs {
                let e = tags.entry(&p.noun).or_insert((false, false, p.line));
                match p.tag {
                    Tag::Grammatical => e.0 = true,
                    Tag::Ungrammatical => e.1 = true,
                }
            }
            let mut offenders: Vec<_> = tags
                .into_iter()
                .filter(|(_, (g, u, _))| !(*g && *u))
                .collect();
            offenders.sort_by_key(|(_, (_, _, line))| *line);
            if let Some((noun, (g, _, line))) = offenders.first() {
                let missing = if *g { "ungrammatical" } else { "grammatical" };
                return Err(invalid(
                    *line,
                    format!("test noun `{noun}` has no {missing} pairing (set `one_sided = true` in [meta] to allow this)"),
                ));
            }
        }

        let count = |t: Tag| self.test_pairs.iter().filter(|p| p.tag == t).count();
        if count(Tag::Grammatical) == 0 {
            return Err(whole("no grammatical test pairs".into()));
        }
        if self.ungrammatical == UngrammaticalMode::Measured && count(Tag::Ungrammatical) == 0 {
            return Err(whole(
                "no ungrammatical test pairs (use `ungrammatical = complement` to derive them)"
                    .into(),
            ));
        }
        Ok(())
    }

    /// Every row must carry the second-store noun column.
    pub fn require_secondary(&self) -> Result<(), ExperimentError> {
        if let Some(p) = self.training_pairs.iter().find(|p| p.alt_noun.is_none()) {
            return Err(invalid(
                p.line,
                format!(
                    "training pair `{} {}` is missing its second-store noun column",
                    p.noun, p.novel_word
                ),
            ));
        }
        if let Some(p) = self.test_pairs.iter().find(|p| p.alt_noun.is_none()) {
            return Err(invalid(
                p.line,
                format!(
                    "test pair `{} {}` is missing its second-store noun column",
                    p.noun, p.novel_word
                ),
            ));
        }
        Ok(())
    }

    pub fn label_of(&self, novel_word: &str) -> Option<usize> {
        self.novel_words.iter().position(|w| w == novel_word)
    }

    /// Distinct test nouns in first-appearance order.
    pub fn test_nouns(&self, side: Side) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.test_pairs
            .iter()
            .filter_map(|p| p.noun_for(side))
            .filter(|n| seen.insert(*n))
            .collect()
    }

    /// Render back to the file format. Parsing the result yields an equal spec
    /// (line numbers aside).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("[meta]\n");
        out.push_str(&format!("name = {}\n", self.name));
        if let Some(p) = &self.embedding_source {
            out.push_str(&format!("embeddings = {}\n", p.display()));
        }
        out.push_str(&format!(
            "ungrammatical = {}\n",
            match self.ungrammatical {
                UngrammaticalMode::Measured => "measured",
                UngrammaticalMode::Complement => "complement",
            }
        ));
        out.push_str(&format!("one_sided = {}\n", self.one_sided));
        out.push_str("\n[novel_words]\n");
        for w in &self.novel_words {
            out.push_str(w);
            out.push('\n');
        }
        out.push_str("\n[training]\n");
        for p in &self.training_pairs {
            out.push_str(&format!("{}\t{}", p.noun, p.novel_word));
            if let Some(a) = &p.alt_noun {
                out.push_str(&format!("\t{a}"));
            }
            out.push('\n');
        }
        out.push_str("\n[test]\n");
        for p in &self.test_pairs {
            out.push_str(&format!("{}\t{}\t{}", p.noun, p.novel_word, p.tag));
            if let Some(a) = &p.alt_noun {
                out.push_str(&format!("\t{a}"));
            }
            out.push('\n');
        }
        let h = &self.hyper;
        let mut hyper = Vec::new();
        if let Some(v) = h.eta {
            hyper.push(format!("eta = {v}"));
        }
        if let Some(v) = h.gamma {
            hyper.push(format!("gamma = {v}"));
        }
        if let Some(v) = h.hidden {
            hyper.push(format!("hidden = {v}"));
        }
        if let Some(v) = h.epochs {
            hyper.push(format!("epochs = {v}"));
        }
        if let Some(v) = h.seed {
            hyper.push(format!("seed = {v}"));
        }
        if let Some(v) = h.dim {
            hyper.push(format!("dim = {v}"));
        }
        if !hyper.is_empty() {
            out.push_str("\n[hyper]\n");
            for l in hyper {
                out.push_str(&l);
                out.push('\n');
            }
        }
        out
    }
}
