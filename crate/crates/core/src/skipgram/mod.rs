//! Skip-gram word embeddings trained with hierarchical softmax.
//!
//! Each (center, context) pair from a fixed `before`/`after` window is one
//! SGD step on `-log p(context | center)`, where the probability is the
//! product of sigmoid branch decisions along the context word's Huffman path.

mod huffman;

pub use huffman::{build_huffman, HuffmanTree};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::Vocabulary;
use crate::linalg::{axpy, dot};

#[derive(Debug, Error)]
pub enum SkipgramError {
    #[error("hierarchical softmax needs at least 2 vocabulary words, got {0}")]
    VocabularyTooSmall(usize),
    #[error("cannot train on an empty token sequence")]
    EmptyCorpus,
    #[error("token index {index} at position {position} is outside the vocabulary of {len} words")]
    TokenOutOfRange {
        position: usize,
        index: usize,
        len: usize,
    },
    #[error("invalid skip-gram configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkipgramConfig {
    pub dim: usize,
    pub window_before: usize,
    pub window_after: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SkipgramConfig {
    fn default() -> Self {
        SkipgramConfig {
            dim: 300,
            window_before: 5,
            window_after: 5,
            learning_rate: 0.025,
            epochs: 5,
            seed: 1,
        }
    }
}

impl SkipgramConfig {
    pub fn validate(&self) -> Result<(), SkipgramError> {
        if self.dim == 0 {
            return Err(SkipgramError::InvalidConfig(
                "dim must be at least 1".into(),
            ));
        }
        if self.window_before == 0 || self.window_after == 0 {
            return Err(SkipgramError::InvalidConfig(
                "window sizes must be at least 1".into(),
            ));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(SkipgramError::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// Input vectors (one row per word) plus hierarchical-softmax inner-node
/// vectors, both row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    vocab: Vocabulary,
    dim: usize,
    input: Vec<f64>,
    inner: Vec<f64>,
}

impl EmbeddingMatrix {
    /// Input rows uniform in `[-0.5/dim, 0.5/dim]`, inner rows zero.
    pub fn init(vocab: Vocabulary, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = vocab.len();
        let input = (0..n * dim)
            .map(|_| (rng.gen::<f64>() - 0.5) / dim as f64)
            .collect();
        let inner = vec![0.0; n.saturating_sub(1) * dim];
        EmbeddingMatrix {
            vocab,
            dim,
            input,
            inner,
        }
    }

    /// Assemble from raw row-major buffers.
    pub fn from_parts(
        vocab: Vocabulary,
        dim: usize,
        input: Vec<f64>,
        inner: Vec<f64>,
    ) -> Result<Self, SkipgramError> {
        let n = vocab.len();
        if input.len() != n * dim || inner.len() != n.saturating_sub(1) * dim {
            return Err(SkipgramError::InvalidConfig(format!(
                "buffers of {} and {} values do not fit {n} words x {dim} dims",
                input.len(),
                inner.len()
            )));
        }
        Ok(EmbeddingMatrix {
            vocab,
            dim,
            input,
            inner,
        })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn input_row(&self, word: usize) -> &[f64] {
        &self.input[word * self.dim..(word + 1) * self.dim]
    }

    pub fn input_row_mut(&mut self, word: usize) -> &mut [f64] {
        &mut self.input[word * self.dim..(word + 1) * self.dim]
    }

    pub fn inner_row(&self, node: usize) -> &[f64] {
        &self.inner[node * self.dim..(node + 1) * self.dim]
    }

    pub fn inner_row_mut(&mut self, node: usize) -> &mut [f64] {
        &mut self.inner[node * self.dim..(node + 1) * self.dim]
    }

    pub fn input_vectors(&self) -> &[f64] {
        &self.input
    }

    pub fn inner_vectors(&self) -> &[f64] {
        &self.inner
    }

    pub fn is_finite(&self) -> bool {
        self.input.iter().chain(&self.inner).all(|x| x.is_finite())
    }

    pub fn into_parts(self) -> (Vocabulary, usize, Vec<f64>) {
        (self.vocab, self.dim, self.input)
    }
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `-ln σ(x)`, stable for large |x|.
#[inline]
fn neg_log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

/// Context positions around `position`: up to `before` on the left and
/// `after` on the right, clipped to `[0, len)`, left to right.
pub fn window_contexts(
    position: usize,
    len: usize,
    before: usize,
    after: usize,
) -> impl Iterator<Item = usize> {
    let start = position.saturating_sub(before);
    let end = (position + after + 1).min(len);
    (start..end).filter(move |&p| p != position)
}

/// One hierarchical-softmax SGD step for the pair `(center, context)`.
///
/// Returns `-log p(context | center)` evaluated before the update.
pub fn train_pair(
    matrix: &mut EmbeddingMatrix,
    tree: &HuffmanTree,
    center: usize,
    context: usize,
    lr: f64,
) -> f64 {
    let mut delta = vec![0.0; matrix.dim];
    train_pair_with(matrix, tree, center, context, lr, &mut delta)
}

fn train_pair_with(
    matrix: &mut EmbeddingMatrix,
    tree: &HuffmanTree,
    center: usize,
    context: usize,
    lr: f64,
    delta: &mut [f64],
) -> f64 {
    let dim = matrix.dim;
    delta.iter_mut().for_each(|d| *d = 0.0);
    let mut loss = 0.0;
    let EmbeddingMatrix { input, inner, .. } = matrix;
    let v = &mut input[center * dim..(center + 1) * dim];
    for (&node, &bit) in tree.path(context).iter().zip(tree.code(context)) {
        let u = &mut inner[node * dim..(node + 1) * dim];
        let x = dot(v, u);
        let s = sigmoid(x);
        // bit 0 is the σ = 1 branch
        loss += if bit == 0 {
            neg_log_sigmoid(x)
        } else {
            neg_log_sigmoid(-x)
        };
        let g = lr * (1.0 - bit as f64 - s);
        for ((d, uj), vj) in delta.iter_mut().zip(u.iter_mut()).zip(v.iter()) {
            *d += g * *uj;
            *uj += g * vj;
        }
    }
    axpy(1.0, delta, v);
    loss
}

/// p(target | center) as the product of branch probabilities on the target's
/// path.
pub fn hs_probability(
    matrix: &EmbeddingMatrix,
    tree: &HuffmanTree,
    center: usize,
    target: usize,
) -> f64 {
    let v = matrix.input_row(center);
    tree.path(target)
        .iter()
        .zip(tree.code(target))
        .map(|(&node, &bit)| {
            let x = dot(v, matrix.inner_row(node));
            if bit == 0 {
                sigmoid(x)
            } else {
                sigmoid(-x)
            }
        })
        .product()
}

/// `-log p(target | center)` computed in log space.
pub fn hs_neg_log_probability(
    matrix: &EmbeddingMatrix,
    tree: &HuffmanTree,
    center: usize,
    target: usize,
) -> f64 {
    let v = matrix.input_row(center);
    tree.path(target)
        .iter()
        .zip(tree.code(target))
        .map(|(&node, &bit)| {
            let x = dot(v, matrix.inner_row(node));
            if bit == 0 {
                neg_log_sigmoid(x)
            } else {
                neg_log_sigmoid(-x)
            }
        })
        .sum()
}

/// Mean `-log p(context | center)` over every window pair of `tokens`.
pub fn corpus_loss(
    matrix: &EmbeddingMatrix,
    tree: &HuffmanTree,
    tokens: &[usize],
    before: usize,
    after: usize,
) -> f64 {
    let mut total = 0.0;
    let mut pairs = 0usize;
    for (pos, &center) in tokens.iter().enumerate() {
        for ctx in window_contexts(pos, tokens.len(), before, after) {
            total += hs_neg_log_probability(matrix, tree, center, tokens[ctx]);
            pairs += 1;
        }
    }
    if pairs == 0 {
        0.0
    } else {
        total / pairs as f64
    }
}

/// Epoch-by-epoch skip-gram training over a fixed token stream.
#[derive(Debug)]
pub struct SkipgramTrainer<'a> {
    matrix: EmbeddingMatrix,
    tree: HuffmanTree,
    tokens: &'a [usize],
    config: SkipgramConfig,
    epochs_done: usize,
}

impl<'a> SkipgramTrainer<'a> {
    pub fn new(
        tokens: &'a [usize],
        vocab: &Vocabulary,
        config: SkipgramConfig,
    ) -> Result<Self, SkipgramError> {
        config.validate()?;
        if tokens.is_empty() {
            return Err(SkipgramError::EmptyCorpus);
        }
        if let Some((position, &index)) = tokens.iter().enumerate().find(|(_, &t)| t >= vocab.len())
        {
            return Err(SkipgramError::TokenOutOfRange {
                position,
                index,
                len: vocab.len(),
            });
        }
        let tree = build_huffman(vocab)?;
        let matrix = EmbeddingMatrix::init(vocab.clone(), config.dim, config.seed);
        Ok(SkipgramTrainer {
            matrix,
            tree,
            tokens,
            config,
            epochs_done: 0,
        })
    }

    /// Run one pass over the corpus; returns the mean pre-update pair loss.
    pub fn train_epoch(&mut self) -> f64 {
        let SkipgramConfig {
            window_before,
            window_after,
            learning_rate,
            ..
        } = self.config;
        let mut delta = vec![0.0; self.config.dim];
        let mut total = 0.0;
        let mut pairs = 0usize;
        let n = self.tokens.len();
        for (pos, &center) in self.tokens.iter().enumerate() {
            for ctx in window_contexts(pos, n, window_before, window_after) {
                total += train_pair_with(
                    &mut self.matrix,
                    &self.tree,
                    center,
                    self.tokens[ctx],
                    learning_rate,
                    &mut delta,
                );
                pairs += 1;
            }
        }
        self.epochs_done += 1;
        if pairs == 0 {
            0.0
        } else {
            total / pairs as f64
        }
    }

    /// Train the remaining configured epochs, returning each epoch's loss.
    pub fn run(&mut self) -> Vec<f64> {
        let remaining = self.config.epochs.saturating_sub(self.epochs_done);
        (0..remaining).map(|_| self.train_epoch()).collect()
    }

    pub fn loss(&self) -> f64 {
        corpus_loss(
            &self.matrix,
            &self.tree,
            self.tokens,
            self.config.window_before,
            self.config.window_after,
        )
    }

    pub fn matrix(&self) -> &EmbeddingMatrix {
        &self.matrix
    }

    pub fn tree(&self) -> &HuffmanTree {
        &self.tree
    }

    pub fn into_matrix(self) -> EmbeddingMatrix {
        self.matrix
    }
}

/// Train skip-gram embeddings for `config.epochs` passes over `tokens`.
pub fn train_skipgram(
    tokens: &[usize],
    vocab: &Vocabulary,
    config: SkipgramConfig,
) -> Result<EmbeddingMatrix, SkipgramError> {
    let mut trainer = SkipgramTrainer::new(tokens, vocab, config)?;
    trainer.run();
    Ok(trainer.into_matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn vocab(counts: &[u64]) -> Vocabulary {
        Vocabulary::from_counts(
            counts
                .iter()
                .enumerate()
                .map(|(i, &c)| (format!("w{i}"), c)),
        )
        .unwrap()
    }

    fn random_matrix(
        counts: &[u64],
        dim: usize,
        seed: u64,
        scale: f64,
    ) -> (EmbeddingMatrix, HuffmanTree) {
        let v = vocab(counts);
        let tree = build_huffman(&v).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = v.len();
        let input = (0..n * dim).map(|_| rng.gen_range(-scale..scale)).collect();
        let inner = (0..(n - 1) * dim)
            .map(|_| rng.gen_range(-scale..scale))
            .collect();
        (
            EmbeddingMatrix::from_parts(v, dim, input, inner).unwrap(),
            tree,
        )
    }

    #[test]
    fn window_examples() {
        assert_eq!(window_contexts(0, 3, 5, 5).collect::<Vec<_>>(), [1, 2]);
        let full: Vec<usize> = (0..5).chain(6..11).collect();
        assert_eq!(window_contexts(5, 11, 5, 5).collect::<Vec<_>>(), full);
        assert_eq!(window_contexts(2, 3, 1, 1).collect::<Vec<_>>(), [1]);
        assert_eq!(window_contexts(3, 10, 1, 2).collect::<Vec<_>>(), [2, 4, 5]);
    }

    #[test]
    fn zero_inner_vectors_leave_center_unchanged() {
        let v = vocab(&[5, 3, 2, 1]);
        let tree = build_huffman(&v).unwrap();
        let mut m = EmbeddingMatrix::init(v, 4, 7);
        let before = m.clone();
        let lr = 0.1;
        train_pair(&mut m, &tree, 1, 3, lr);
        assert_eq!(m.input_row(1), before.input_row(1));
        let center = before.input_row(1);
        for (&node, &bit) in tree.path(3).iter().zip(tree.code(3)) {
            let sign = if bit == 0 { 0.5 } else { -0.5 };
            for (u, c) in m.inner_row(node).iter().zip(center) {
                assert!((u - sign * lr * c).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_learning_rate_is_a_no_op() {
        let (mut m, tree) = random_matrix(&[4, 3, 2, 2, 1], 3, 2, 0.5);
        let before = m.clone();
        train_pair(&mut m, &tree, 0, 4, 0.0);
        assert_eq!(m, before);
    }

    #[test]
    fn repeated_pair_converges() {
        let (mut m, tree) = random_matrix(&[1, 1], 2, 11, 0.5);
        for _ in 0..1000 {
            train_pair(&mut m, &tree, 0, 1, 0.1);
        }
        assert!(hs_probability(&m, &tree, 0, 1) > 0.99);
    }

    #[test]
    fn zero_vectors_give_half_per_branch() {
        let v = vocab(&[5, 2, 1, 1]);
        let tree = build_huffman(&v).unwrap();
        let m = EmbeddingMatrix::from_parts(v, 3, vec![0.0; 12], vec![0.0; 9]).unwrap();
        for w in 0..4 {
            let expected = 0.5f64.powi(tree.code(w).len() as i32);
            assert_eq!(hs_probability(&m, &tree, 0, w), expected);
        }
        let v2 = vocab(&[1, 1]);
        let tree2 = build_huffman(&v2).unwrap();
        let m2 = EmbeddingMatrix::from_parts(v2, 2, vec![0.0; 4], vec![0.0; 2]).unwrap();
        assert_eq!(hs_probability(&m2, &tree2, 0, 0), 0.5);
        assert_eq!(hs_probability(&m2, &tree2, 0, 1), 0.5);
    }

    #[test]
    fn probabilities_sum_to_one() {
        for seed in 0..20 {
            let counts: Vec<u64> = (0..17).map(|i| 1 + (i * 7 + seed) % 13).collect();
            let (m, tree) = random_matrix(&counts, 5, seed, 1.0);
            for center in [0, 8, 16] {
                let s: f64 = (0..counts.len())
                    .map(|w| hs_probability(&m, &tree, center, w))
                    .sum();
                assert!((s - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn log_probability_matches_product() {
        let (m, tree) = random_matrix(&[6, 5, 3, 2, 2, 1], 4, 3, 2.0);
        for t in 0..6 {
            let p = hs_probability(&m, &tree, 2, t);
            let nl = hs_neg_log_probability(&m, &tree, 2, t);
            assert!((p.ln() + nl).abs() < 1e-12);
        }
    }

    #[test]
    fn update_is_negative_gradient() {
        let h = 1e-5;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for case in 0..30 {
            let n = rng.gen_range(2..=8);
            let dim = rng.gen_range(1..=5);
            let counts: Vec<u64> = (0..n).map(|_| rng.gen_range(1..10)).collect();
            let (m, tree) = random_matrix(&counts, dim, case, 0.8);
            let center = rng.gen_range(0..n);
            let target = rng.gen_range(0..n);
            let lr = 1.0;
            let mut stepped = m.clone();
            train_pair(&mut stepped, &tree, center, target, lr);

            // centre vector
            for j in 0..dim {
                let mut plus = m.clone();
                plus.input_row_mut(center)[j] += h;
                let mut minus = m.clone();
                minus.input_row_mut(center)[j] -= h;
                let fd = (hs_neg_log_probability(&plus, &tree, center, target)
                    - hs_neg_log_probability(&minus, &tree, center, target))
                    / (2.0 * h);
                let applied = (stepped.input_row(center)[j] - m.input_row(center)[j]) / lr;
                let err = (applied + fd).abs() / fd.abs().max(applied.abs()).max(1e-8);
                assert!(err < 1e-4, "case {case} v[{j}]: applied {applied} fd {fd}");
            }
            // inner nodes on the path
            for &node in tree.path(target) {
                for j in 0..dim {
                    let mut plus = m.clone();
                    plus.inner_row_mut(node)[j] += h;
                    let mut minus = m.clone();
                    minus.inner_row_mut(node)[j] -= h;
                    let fd = (hs_neg_log_probability(&plus, &tree, center, target)
                        - hs_neg_log_probability(&minus, &tree, center, target))
                        / (2.0 * h);
                    let applied = (stepped.inner_row(node)[j] - m.inner_row(node)[j]) / lr;
                    let err = (applied + fd).abs() / fd.abs().max(applied.abs()).max(1e-8);
                    assert!(
                        err < 1e-4,
                        "case {case} u{node}[{j}]: applied {applied} fd {fd}"
                    );
                }
            }
        }
    }

    #[test]
    fn large_learning_rate_stays_finite() {
        let (mut m, tree) = random_matrix(&[3, 3, 2, 2, 1, 1], 4, 5, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5000 {
            let c = rng.gen_range(0..6);
            let t = rng.gen_range(0..6);
            train_pair(&mut m, &tree, c, t, 1.0);
            assert!(m.is_finite());
        }
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let v = vocab(&[3, 2, 1]);
        let tokens = vec![0, 1, 2, 0, 1, 0];
        let cfg = SkipgramConfig {
            dim: 4,
            epochs: 0,
            ..SkipgramConfig::default()
        };
        let m = train_skipgram(&tokens, &v, cfg.clone()).unwrap();
        assert_eq!(m, EmbeddingMatrix::init(v, 4, cfg.seed));
    }

    #[test]
    fn init_range() {
        let m = EmbeddingMatrix::init(vocab(&[3, 2, 1]), 8, 4);
        assert!(m.input_vectors().iter().all(|x| x.abs() <= 0.5 / 8.0));
        assert!(m.inner_vectors().iter().all(|&x| x == 0.0));
        assert_eq!(m.inner_vectors().len(), 2 * 8);
    }

    #[test]
    fn trainer_errors() {
        let v = vocab(&[2, 1]);
        assert!(matches!(
            train_skipgram(&[], &v, SkipgramConfig::default()),
            Err(SkipgramError::EmptyCorpus)
        ));
        assert!(matches!(
            train_skipgram(&[0, 5], &v, SkipgramConfig::default()),
            Err(SkipgramError::TokenOutOfRange { position: 1, .. })
        ));
        let single = vocab(&[4]);
        assert!(matches!(
            train_skipgram(&[0, 0], &single, SkipgramConfig::default()),
            Err(SkipgramError::VocabularyTooSmall(1))
        ));
        let bad = SkipgramConfig {
            window_after: 0,
            ..SkipgramConfig::default()
        };
        assert!(train_skipgram(&[0, 1], &v, bad).is_err());
    }
}
