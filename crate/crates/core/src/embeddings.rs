//! Word-vector storage, persistence and similarity queries.
//!
//! Two on-disk formats are supported. The text format is the usual
//! interchange layout: a `"<count> <dim>"` header followed by one line per
//! word holding the word and its components separated by single spaces.
//! Components are written in shortest round-trip scientific notation, so text
//! files reload exactly. The binary format stores raw little-endian `f64`s:
//!
//! ```text
//! magic   8 bytes  "SGEMB\0\0\x01"
//! count   u64 LE
//! dim     u64 LE
//! count × { len: u32 LE, word: len UTF-8 bytes, dim × f64 LE }
//! ```
//!
//! Vectors are kept as given; nothing is length-normalized on load.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::linalg::{dot, norm};
use crate::skipgram::EmbeddingMatrix;

pub const BINARY_MAGIC: &[u8; 8] = b"SGEMB\0\0\x01";

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("binary embedding file: {0}")]
    Binary(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("word `{0}` is not in the embedding vocabulary")]
    UnknownWord(String),
    #[error("vector dimensions differ: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("cosine is undefined for an all-zero vector")]
    ZeroVector,
    #[error("word set must not be empty")]
    EmptySet,
    #[error("invalid embedding store: {0}")]
    Invalid(String),
}

impl EmbeddingError {
    fn parse(line: usize, message: impl Into<String>) -> Self {
        EmbeddingError::Parse {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Binary,
}

/// Immutable word → vector table.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    words: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    data: Vec<f64>,
}

impl EmbeddingStore {
    /// Build from words and row-major vectors.
    pub fn new(words: Vec<String>, dim: usize, data: Vec<f64>) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::Invalid(
                "dimension must be at least 1".into(),
            ));
        }
        if data.len() != words.len() * dim {
            return Err(EmbeddingError::Invalid(format!(
                "{} values do not fill {} rows of dimension {dim}",
                data.len(),
                words.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(EmbeddingError::Invalid(format!(
                "non-finite component in row `{}`",
                words[pos / dim]
            )));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if w.is_empty() || w.chars().any(char::is_whitespace) {
                return Err(EmbeddingError::Invalid(format!("invalid word {w:?}")));
            }
            if index.insert(w.clone(), i).is_some() {
                return Err(EmbeddingError::Invalid(format!("duplicate word `{w}`")));
            }
        }
        Ok(EmbeddingStore {
            words,
            index,
            dim,
            data,
        })
    }

    /// Keep the input vectors of a trained skip-gram model.
    pub fn from_matrix(matrix: EmbeddingMatrix) -> Self {
        let (vocab, dim, data) = matrix.into_parts();
        let words = vocab.words().map(str::to_owned).collect();
        EmbeddingStore::new(words, dim, data).expect("trained matrix is a valid store")
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn row(&self, idx: usize) -> &[f64] {
        &self.data[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn lookup(&self, word: &str) -> Option<&[f64]> {
        self.index_of(word).map(|i| self.row(i))
    }

    fn require(&self, word: &str) -> Result<&[f64], EmbeddingError> {
        self.lookup(word)
            .ok_or_else(|| EmbeddingError::UnknownWord(word.to_owned()))
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// The `k` words most cosine-similar to `word`, most similar first.
    ///
    /// The query word and all-zero rows are skipped; equal similarities keep
    /// vocabulary order.
    pub fn nearest_neighbors(
        &self,
        word: &str,
        k: usize,
    ) -> Result<Vec<(String, f64)>, EmbeddingError> {
        let q_idx = self
            .index_of(word)
            .ok_or_else(|| EmbeddingError::UnknownWord(word.to_owned()))?;
        let q = self.row(q_idx);
        if norm(q) == 0.0 {
            return Err(EmbeddingError::ZeroVector);
        }
        let mut scored: Vec<(usize, f64)> = (0..self.len())
            .filter(|&i| i != q_idx)
            .filter_map(|i| cosine(q, self.row(i)).ok().map(|s| (i, s)))
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1));
        scored.truncate(k);
        Ok(scored
            .into_iter()
            .map(|(i, s)| (self.words[i].clone(), s))
            .collect())
    }

    /// Mean cosine over every pair in `set_a × set_b`.
    pub fn mean_pairwise_similarity<A, B>(
        &self,
        set_a: &[A],
        set_b: &[B],
    ) -> Result<f64, EmbeddingError>
    where
        A: AsRef<str>,
        B: AsRef<str>,
    {
        if set_a.is_empty() || set_b.is_empty() {
            return Err(EmbeddingError::EmptySet);
        }
        let a: Vec<&[f64]> = set_a
            .iter()
            .map(|w| self.require(w.as_ref()))
            .collect::<Result<_, _>>()?;
        let b: Vec<&[f64]> = set_b
            .iter()
            .map(|w| self.require(w.as_ref()))
            .collect::<Result<_, _>>()?;
        let mut total = 0.0;
        for x in &a {
            for y in &b {
                total += cosine(x, y)?;
            }
        }
        Ok(total / (a.len() * b.len()) as f64)
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{} {}", self.len(), self.dim)?;
        for (i, word) in self.words.iter().enumerate() {
            w.write_all(word.as_bytes())?;
            for x in self.row(i) {
                write!(w, " {x:e}")?;
            }
            w.write_all(b"\n")?;
        }
        w.flush()
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Self, EmbeddingError> {
        let mut lines = reader.lines().enumerate();
        let (count, dim) = match lines.next() {
            Some((_, line)) => parse_header(&line?)?,
            None => return Err(EmbeddingError::parse(1, "missing header")),
        };
        let mut words = Vec::with_capacity(count);
        let mut data = Vec::with_capacity(count * dim);
        let mut seen = HashMap::with_capacity(count);
        for (i, line) in lines {
            let lineno = i + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            if words.len() == count {
                return Err(EmbeddingError::parse(
                    lineno,
                    format!("more rows than the {count} declared in the header"),
                ));
            }
            let mut fields = line.split_whitespace();
            let word = fields.next().expect("non-empty line has a field");
            let start = data.len();
            for f in fields {
                let x: f64 = f.parse().map_err(|_| {
                    EmbeddingError::parse(lineno, format!("row `{word}`: invalid number `{f}`"))
                })?;
                if !x.is_finite() {
                    return Err(EmbeddingError::parse(
                        lineno,
                        format!("row `{word}`: non-finite component `{f}`"),
                    ));
                }
                data.push(x);
            }
            let found = data.len() - start;
            if found != dim {
                return Err(EmbeddingError::parse(
                    lineno,
                    format!("row `{word}` has {found} components, expected {dim}"),
                ));
            }
            if let Some(prev) = seen.insert(word.to_owned(), lineno) {
                return Err(EmbeddingError::parse(
                    lineno,
                    format!("duplicate word `{word}` (first on line {prev})"),
                ));
            }
            words.push(word.to_owned());
        }
        if words.len() != count {
            return Err(EmbeddingError::parse(
                words.len() + 2,
                format!("header declares {count} rows but file has {}", words.len()),
            ));
        }
        EmbeddingStore::new(words, dim, data)
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        w.write_all(&(self.dim as u64).to_le_bytes())?;
        for (i, word) in self.words.iter().enumerate() {
            w.write_all(&(word.len() as u32).to_le_bytes())?;
            w.write_all(word.as_bytes())?;
            for x in self.row(i) {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        w.flush()
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self, EmbeddingError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != BINARY_MAGIC {
            return Err(EmbeddingError::Binary("bad magic".into()));
        }
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u64buf)?;
        let count = u64::from_le_bytes(u64buf) as usize;
        r.read_exact(&mut u64buf)?;
        let dim = u64::from_le_bytes(u64buf) as usize;
        let mut words = Vec::with_capacity(count.min(1 << 20));
        let mut data = Vec::with_capacity((count * dim).min(1 << 24));
        let mut u32buf = [0u8; 4];
        for row in 0..count {
            r.read_exact(&mut u32buf)?;
            let mut bytes = vec![0u8; u32::from_le_bytes(u32buf) as usize];
            r.read_exact(&mut bytes)?;
            let word = String::from_utf8(bytes)
                .map_err(|_| EmbeddingError::Binary(format!("row {row}: word is not UTF-8")))?;
            for _ in 0..dim {
                r.read_exact(&mut u64buf)?;
                data.push(f64::from_le_bytes(u64buf));
            }
            words.push(word);
        }
        EmbeddingStore::new(words, dim, data)
    }

    pub fn save(&self, path: impl AsRef<Path>, format: Format) -> Result<(), EmbeddingError> {
        let w = BufWriter::new(File::create(path)?);
        match format {
            Format::Text => self.write_text(w)?,
            Format::Binary => self.write_binary(w)?,
        }
        Ok(())
    }

    /// Load either format, telling them apart by the binary magic.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, EmbeddingError> {
        let mut reader = BufReader::new(File::open(path)?);
        let is_binary = reader.fill_buf()?.starts_with(BINARY_MAGIC);
        if is_binary {
            Self::read_binary(reader)
        } else {
            Self::read_text(reader)
        }
    }

    /// Parse an in-memory file of either format.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, EmbeddingError> {
        if bytes.starts_with(BINARY_MAGIC) {
            Self::read_binary(bytes)
        } else {
            Self::read_text(bytes)
        }
    }
}

fn parse_header(line: &str) -> Result<(usize, usize), EmbeddingError> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    let bad = || {
        EmbeddingError::parse(
            1,
            format!("malformed header `{line}`, expected `<count> <dim>`"),
        )
    };
    if fields.len() != 2 {
        return Err(bad());
    }
    let count = fields[0].parse().map_err(|_| bad())?;
    let dim: usize = fields[1].parse().map_err(|_| bad())?;
    if dim == 0 {
        return Err(EmbeddingError::parse(1, "dimension must be at least 1"));
    }
    Ok((count, dim))
}

/// Cosine similarity, clamped to `[-1, 1]`.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64, EmbeddingError> {
    if a.len() != b.len() {
        return Err(EmbeddingError::DimMismatch(a.len(), b.len()));
    }
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return Err(EmbeddingError::ZeroVector);
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn store(rows: &[(&str, &[f64])]) -> EmbeddingStore {
        let dim = rows[0].1.len();
        EmbeddingStore::new(
            rows.iter().map(|(w, _)| w.to_string()).collect(),
            dim,
            rows.iter().flat_map(|(_, v)| v.iter().copied()).collect(),
        )
        .unwrap()
    }

    fn random_store(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> EmbeddingStore {
        let words = (0..n).map(|i| format!("w{i}")).collect();
        let data = (0..n * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        EmbeddingStore::new(words, dim, data).unwrap()
    }

    #[test]
    fn cosine_examples() {
        assert!((cosine(&[3.0, -1.0, 2.0], &[3.0, -1.0, 2.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let c = cosine(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-4);
        assert!(matches!(
            cosine(&[0.0, 0.0], &[1.0, 0.0]),
            Err(EmbeddingError::ZeroVector)
        ));
        assert!(matches!(
            cosine(&[1.0], &[1.0, 0.0]),
            Err(EmbeddingError::DimMismatch(1, 2))
        ));
    }

    #[test]
    fn text_format_layout() {
        let s = store(&[("gi", &[1.0, 0.5, -2.0]), ("ro", &[0.0, 0.25, 3.0])]);
        let mut buf = Vec::new();
        s.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "2 3");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("gi "));
        assert_eq!(lines[1].split(' ').count(), 4);
        assert!(text.ends_with('\n') && !text.contains('\r'));
    }

    #[test]
    fn text_format_accepts_plain_decimals() {
        let s = EmbeddingStore::read_text("2 2\na 0.5 1\nb -0.25 2.0\n".as_bytes()).unwrap();
        assert_eq!(s.lookup("b"), Some(&[-0.25, 2.0][..]));
    }

    #[test]
    fn short_row_is_a_parse_error() {
        let err = EmbeddingStore::read_text("2 3\na 1 2 3\nb 1 2\n".as_bytes()).unwrap_err();
        match err {
            EmbeddingError::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("`b`"), "{message}");
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn malformed_inputs() {
        let cases = [
            ("", 1),
            ("two 3\n", 1),
            ("1 3 4\n", 1),
            ("2 2\na 1 2\na 3 4\n", 3),
            ("1 2\na 1 x\n", 2),
            ("1 2\na 1 2\nb 3 4\n", 3),
            ("3 2\na 1 2\nb 3 4\n", 4),
            ("1 2\na 1 inf\n", 2),
        ];
        for (text, want) in cases {
            match EmbeddingStore::read_text(text.as_bytes()) {
                Err(EmbeddingError::Parse { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn binary_rejects_garbage() {
        assert!(EmbeddingStore::read_binary(&b"NOTMAGIC........"[..]).is_err());
        let s = store(&[("a", &[1.0])]);
        let mut buf = Vec::new();
        s.write_binary(&mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(EmbeddingStore::read_binary(&buf[..]).is_err());
    }

    #[test]
    fn load_detects_format() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_store(&mut rng, 5, 4);
        let bin = dir.path().join("v.bin");
        let txt = dir.path().join("v.txt");
        s.save(&bin, Format::Binary).unwrap();
        s.save(&txt, Format::Text).unwrap();
        assert_eq!(EmbeddingStore::load(&bin).unwrap(), s);
        assert_eq!(EmbeddingStore::load(&txt).unwrap(), s);
        assert!(matches!(
            EmbeddingStore::load(dir.path().join("missing")),
            Err(EmbeddingError::Io(_))
        ));
    }

    #[test]
    fn neighbors_rank_colinear_first() {
        let s = store(&[
            ("a", &[1.0, 2.0]),
            ("c", &[-1.0, 0.3]),
            ("b", &[3.0, 6.0]),
            ("d", &[2.0, 1.0]),
        ]);
        let nn = s.nearest_neighbors("a", 3).unwrap();
        assert_eq!(nn[0].0, "b");
        assert!((nn[0].1 - 1.0).abs() < 1e-15);
        assert_eq!(
            nn.iter().map(|x| x.0.as_str()).collect::<Vec<_>>(),
            ["b", "d", "c"]
        );
        assert!(nn.windows(2).all(|w| w[0].1 >= w[1].1));
        assert!(matches!(
            s.nearest_neighbors("zz", 1),
            Err(EmbeddingError::UnknownWord(_))
        ));
    }

    #[test]
    fn neighbors_ties_keep_vocab_order() {
        let s = store(&[
            ("q", &[1.0, 0.0]),
            ("y", &[0.0, 1.0]),
            ("x", &[0.0, -1.0]),
            ("z", &[0.0, 2.0]),
        ]);
        let nn = s.nearest_neighbors("q", 3).unwrap();
        assert_eq!(
            nn.iter().map(|x| x.0.as_str()).collect::<Vec<_>>(),
            ["y", "x", "z"]
        );
    }

    /// Oracle: score everything, sort with an explicit (similarity desc,
    /// index asc) key.
    fn brute_force_neighbors(s: &EmbeddingStore, q: usize, k: usize) -> Vec<(String, f64)> {
        let qv = s.row(q);
        let mut all: Vec<(usize, f64)> = (0..s.len())
            .filter(|&i| i != q)
            .map(|i| {
                let v = s.row(i);
                let num: f64 = qv.iter().zip(v).map(|(a, b)| a * b).sum();
                let den = qv.iter().map(|a| a * a).sum::<f64>().sqrt()
                    * v.iter().map(|b| b * b).sum::<f64>().sqrt();
                (i, (num / den).clamp(-1.0, 1.0))
            })
            .collect();
        all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        all.into_iter()
            .take(k)
            .map(|(i, sim)| (s.words()[i].clone(), sim))
            .collect()
    }

    #[test]
    fn neighbors_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in [2usize, 5, 30, 100] {
            let s = random_store(&mut rng, n, 6);
            for k in 1..n {
                let q = rng.gen_range(0..n);
                let got = s.nearest_neighbors(&s.words()[q], k).unwrap();
                let want = brute_force_neighbors(&s, q, k);
                assert_eq!(got.len(), want.len());
                for (g, w) in got.iter().zip(&want) {
                    assert_eq!(g.0, w.0);
                    assert!((g.1 - w.1).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn mean_similarity() {
        let s = store(&[
            ("w", &[0.3, 0.4, 0.0]),
            ("x", &[1.0, 0.0, 0.0]),
            ("y", &[0.0, 1.0, 0.0]),
            ("z", &[0.0, 0.0, 1.0]),
        ]);
        assert!((s.mean_pairwise_similarity(&["w"], &["w"]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(
            s.mean_pairwise_similarity(&["x", "y"], &["z"]).unwrap(),
            0.0
        );
        assert!(matches!(
            s.mean_pairwise_similarity(&["x", "nope"], &["z"]),
            Err(EmbeddingError::UnknownWord(w)) if w == "nope"
        ));
        assert!(matches!(
            s.mean_pairwise_similarity::<&str, &str>(&[], &["z"]),
            Err(EmbeddingError::EmptySet)
        ));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = random_store(&mut rng, 4, 7);
        let w = r.words();
        let by_hand = (cosine(r.row(0), r.row(2)).unwrap()
            + cosine(r.row(0), r.row(3)).unwrap()
            + cosine(r.row(1), r.row(2)).unwrap()
            + cosine(r.row(1), r.row(3)).unwrap())
            / 4.0;
        let got = r.mean_pairwise_similarity(&w[0..2], &w[2..4]).unwrap();
        assert!((got - by_hand).abs() < 1e-15);
    }

    #[test]
    fn store_validation() {
        assert!(EmbeddingStore::new(vec!["a".into()], 2, vec![1.0]).is_err());
        assert!(EmbeddingStore::new(vec!["a".into(), "a".into()], 1, vec![1.0, 2.0]).is_err());
        assert!(EmbeddingStore::new(vec!["a".into()], 1, vec![f64::NAN]).is_err());
        assert!(EmbeddingStore::new(vec!["a b".into()], 1, vec![1.0]).is_err());
    }

    proptest! {
        #[test]
        fn cosine_symmetric_and_scale_invariant(
            a in proptest::collection::vec(-10.0f64..10.0, 4),
            b in proptest::collection::vec(-10.0f64..10.0, 4),
            lambda in 1e-3f64..1e3,
        ) {
            prop_assume!(norm(&a) > 1e-6 && norm(&b) > 1e-6);
            let ab = cosine(&a, &b).unwrap();
            prop_assert_eq!(ab, cosine(&b, &a).unwrap());
            let scaled: Vec<f64> = a.iter().map(|x| x * lambda).collect();
            prop_assert!((cosine(&scaled, &b).unwrap() - ab).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&ab));
        }

        #[test]
        fn round_trips(seed in any::<u64>(), n in 1usize..12, dim in 1usize..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let words = (0..n).map(|i| format!("wörd{i}")).collect();
            let data = (0..n * dim).map(|_| rng.gen_range(-1e3..1e3) * rng.gen::<f64>().powi(8)).collect();
            let s = EmbeddingStore::new(words, dim, data).unwrap();

            let mut bin = Vec::new();
            s.write_binary(&mut bin).unwrap();
            let back = EmbeddingStore::read_binary(&bin[..]).unwrap();
            prop_assert!(back.data().iter().zip(s.data()).all(|(a, b)| a.to_bits() == b.to_bits()));
            prop_assert_eq!(back.words(), s.words());

            let mut txt = Vec::new();
            s.write_text(&mut txt).unwrap();
            let back = EmbeddingStore::read_text(&txt[..]).unwrap();
            prop_assert_eq!(back.words(), s.words());
            prop_assert!(back.data().iter().zip(s.data()).all(|(a, b)| (a - b).abs() <= 1e-6));
        }
    }
}
