//! Feedforward noun → novel-word classifier.
//!
//! `d → h (tanh) → N (softmax)`, trained one example at a time with
//! cross-entropy loss against the 1-in-N target. Weight decay `γ` is coupled
//! into the SGD step for weight matrices only:
//! `θ ← θ − η (∂loss/∂θ + γ θ)`; biases take the plain gradient step.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::dot;

const CHECKPOINT_HEADER: &str = "semgrad-classifier v1";

/// Consecutive epochs that must stay at or below [`CONVERGENCE_ERROR`].
pub const CONVERGENCE_RUN: usize = 3;
pub const CONVERGENCE_ERROR: f64 = 0.05;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("input has dimension {got}, network expects {expected}")]
    DimMismatch { expected: usize, got: usize },
    #[error("label {label} is out of range for {outputs} outputs")]
    LabelOutOfRange { label: usize, outputs: usize },
    #[error("cannot train on an empty pair list")]
    EmptyPairs,
    #[error("invalid classifier configuration: {0}")]
    InvalidConfig(String),
    #[error("checkpoint line {line}: {message}")]
    Checkpoint { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierConfig {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub output_dim: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            input_dim: 300,
            hidden_dim: 100,
            output_dim: 4,
            learning_rate: 0.01,
            weight_decay: 0.01,
            epochs: 200,
            seed: 1,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<(), ClassifierError> {
        let bad = |m: String| Err(ClassifierError::InvalidConfig(m));
        if self.input_dim == 0 || self.hidden_dim == 0 || self.output_dim == 0 {
            return bad(format!(
                "dimensions must be at least 1 (input {}, hidden {}, output {})",
                self.input_dim, self.hidden_dim, self.output_dim
            ));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return bad(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            ));
        }
        if !self.weight_decay.is_finite() || self.weight_decay < 0.0 {
            return bad(format!(
                "weight decay must be non-negative, got {}",
                self.weight_decay
            ));
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        Ok(())
    }
}

/// One training example: a noun vector and the index of its novel word.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPair {
    pub noun_vector: Vec<f64>,
    pub label: usize,
}

/// Network parameters. Matrices are row-major: `w1` is `hidden × input`,
/// `w2` is `output × hidden`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierNet {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub output_dim: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub hidden: Vec<f64>,
    pub net_inputs: Vec<f64>,
    pub probs: Vec<f64>,
}

/// Loss gradients, laid out like [`ClassifierNet`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

/// Numerically stable softmax.
pub fn softmax(net_inputs: &[f64]) -> Vec<f64> {
    let max = net_inputs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = net_inputs.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub fn argmax(xs: &[f64]) -> usize {
    xs.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &x)| {
            if x > best.1 {
                (i, x)
            } else {
                best
            }
        })
        .0
}

impl ClassifierNet {
    /// Weights uniform in `±1/sqrt(fan_in)` per layer, biases zero. `w1` is
    /// drawn first, then `w2` row by row.
    pub fn init(config: &ClassifierConfig) -> Result<Self, ClassifierError> {
        config.validate()?;
        let (d, h, n) = (config.input_dim, config.hidden_dim, config.output_dim);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let r1 = 1.0 / (d as f64).sqrt();
        let r2 = 1.0 / (h as f64).sqrt();
        let w1 = (0..h * d).map(|_| rng.gen_range(-r1..=r1)).collect();
        let w2 = (0..n * h).map(|_| rng.gen_range(-r2..=r2)).collect();
        Ok(ClassifierNet {
            input_dim: d,
            hidden_dim: h,
            output_dim: n,
            w1,
            b1: vec![0.0; h],
            w2,
            b2: vec![0.0; n],
        })
    }

    pub fn zeros(input_dim: usize, hidden_dim: usize, output_dim: usize) -> Self {
        ClassifierNet {
            input_dim,
            hidden_dim,
            output_dim,
            w1: vec![0.0; hidden_dim * input_dim],
            b1: vec![0.0; hidden_dim],
            w2: vec![0.0; output_dim * hidden_dim],
            b2: vec![0.0; output_dim],
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<(), ClassifierError> {
        if x.len() != self.input_dim {
            return Err(ClassifierError::DimMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Forward, ClassifierError> {
        self.check_input(x)?;
        let d = self.input_dim;
        let h = self.hidden_dim;
        let hidden: Vec<f64> = (0..h)
            .map(|j| (dot(&self.w1[j * d..(j + 1) * d], x) + self.b1[j]).tanh())
            .collect();
        let net_inputs: Vec<f64> = (0..self.output_dim)
            .map(|k| dot(&self.w2[k * h..(k + 1) * h], &hidden) + self.b2[k])
            .collect();
        let probs = softmax(&net_inputs);
        Ok(Forward {
            hidden,
            net_inputs,
            probs,
        })
    }

    /// `p(y = k | x)` for every novel word `k`.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>, ClassifierError> {
        Ok(self.forward(x)?.probs)
    }

    /// Cross-entropy loss of `pair` and its backpropagated gradients (no
    /// decay term).
    pub fn gradients(&self, pair: &LabeledPair) -> Result<(f64, Gradients), ClassifierError> {
        if pair.label >= self.output_dim {
            return Err(ClassifierError::LabelOutOfRange {
                label: pair.label,
                outputs: self.output_dim,
            });
        }
        let x = &pair.noun_vector;
        let fwd = self.forward(x)?;
        let (d, h, n) = (self.input_dim, self.hidden_dim, self.output_dim);
        let loss = -fwd.probs[pair.label].max(f64::MIN_POSITIVE).ln();

        let mut dz2 = fwd.probs.clone();
        dz2[pair.label] -= 1.0;
        let mut w2 = vec![0.0; n * h];
        for k in 0..n {
            for j in 0..h {
                w2[k * h + j] = dz2[k] * fwd.hidden[j];
            }
        }
        let b1: Vec<f64> = (0..h)
            .map(|j| {
                let back: f64 = (0..n).map(|k| self.w2[k * h + j] * dz2[k]).sum();
                back * (1.0 - fwd.hidden[j] * fwd.hidden[j])
            })
            .collect();
        let mut w1 = vec![0.0; h * d];
        for j in 0..h {
            for i in 0..d {
                w1[j * d + i] = b1[j] * x[i];
            }
        }
        Ok((
            loss,
            Gradients {
                w1,
                b1,
                w2,
                b2: dz2,
            },
        ))
    }

    /// One SGD step on `pair`; returns the loss before the update.
    pub fn train_step(
        &mut self,
        pair: &LabeledPair,
        eta: f64,
        gamma: f64,
    ) -> Result<f64, ClassifierError> {
        let (loss, g) = self.gradients(pair)?;
        let decayed = |theta: &mut [f64], grad: &[f64]| {
            for (t, gr) in theta.iter_mut().zip(grad) {
                *t -= eta * (gr + gamma * *t);
            }
        };
        decayed(&mut self.w1, &g.w1);
        decayed(&mut self.w2, &g.w2);
        for (t, gr) in self.b1.iter_mut().zip(&g.b1) {
            *t -= eta * gr;
        }
        for (t, gr) in self.b2.iter_mut().zip(&g.b2) {
            *t -= eta * gr;
        }
        Ok(loss)
    }

    /// Fraction of `pairs` whose most probable output is not the label.
    pub fn training_error(&self, pairs: &[LabeledPair]) -> Result<f64, ClassifierError> {
        if pairs.is_empty() {
            return Err(ClassifierError::EmptyPairs);
        }
        let mut wrong = 0usize;
        for p in pairs {
            if argmax(&self.predict(&p.noun_vector)?) != p.label {
                wrong += 1;
            }
        }
        Ok(wrong as f64 / pairs.len() as f64)
    }

    /// One shuffled pass over `pairs`. Returns the mean pre-update loss and
    /// the training error measured after the pass.
    pub fn train_epoch(
        &mut self,
        pairs: &[LabeledPair],
        eta: f64,
        gamma: f64,
        shuffle_seed: u64,
    ) -> Result<(f64, f64), ClassifierError> {
        if pairs.is_empty() {
            return Err(ClassifierError::EmptyPairs);
        }
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle_seed));
        let mut total = 0.0;
        for &i in &order {
            total += self.train_step(&pairs[i], eta, gamma)?;
        }
        Ok((total / pairs.len() as f64, self.training_error(pairs)?))
    }

    /// Reorder output units so that new unit `k` is old unit `perm[k]`.
    pub fn permute_outputs(&mut self, perm: &[usize]) {
        assert_eq!(perm.len(), self.output_dim, "permutation length");
        let h = self.hidden_dim;
        let w2: Vec<f64> = perm
            .iter()
            .flat_map(|&k| self.w2[k * h..(k + 1) * h].iter().copied())
            .collect();
        let b2 = perm.iter().map(|&k| self.b2[k]).collect();
        self.w2 = w2;
        self.b2 = b2;
    }

    pub fn is_finite(&self) -> bool {
        self.w1
            .iter()
            .chain(&self.b1)
            .chain(&self.w2)
            .chain(&self.b2)
            .all(|x| x.is_finite())
    }

    /// Versioned text checkpoint: header, dims, then `w1`, `b1`, `w2`, `b2`
    /// one matrix row per line.
    pub fn to_checkpoint(&self) -> String {
        let mut out = String::new();
        let (d, h, n) = (self.input_dim, self.hidden_dim, self.output_dim);
        writeln!(out, "{CHECKPOINT_HEADER}").unwrap();
        writeln!(out, "{d} {h} {n}").unwrap();
        let mut rows = |name: &str, data: &[f64], width: usize| {
            writeln!(out, "{name}").unwrap();
            for row in data.chunks(width) {
                let line: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
                writeln!(out, "{}", line.join(" ")).unwrap();
            }
        };
        rows("w1", &self.w1, d);
        rows("b1", &self.b1, h);
        rows("w2", &self.w2, h);
        rows("b2", &self.b2, n);
        out
    }

    pub fn from_checkpoint(text: &str) -> Result<Self, ClassifierError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let err = |line: usize, m: &str| ClassifierError::Checkpoint {
            line,
            message: m.to_owned(),
        };
        match lines.next() {
            Some((_, l)) if l == CHECKPOINT_HEADER => {}
            _ => return Err(err(1, "missing or unsupported checkpoint header")),
        }
        let (lno, dims) = lines.next().ok_or_else(|| err(2, "missing dimensions"))?;
        let dims: Vec<usize> = dims
            .split_whitespace()
            .map(|x| x.parse().map_err(|_| err(lno, "bad dimension")))
            .collect::<Result<_, _>>()?;
        let [d, h, n] = dims[..] else {
            return Err(err(lno, "expected three dimensions"));
        };
        let mut net = ClassifierNet::zeros(d, h, n);
        let mut block =
            |name: &str, rows: usize, width: usize| -> Result<Vec<f64>, ClassifierError> {
                match lines.next() {
                    Some((_, l)) if l == name => {}
                    Some((i, _)) => return Err(err(i, &format!("expected `{name}`"))),
                    None => return Err(err(0, &format!("missing `{name}` block"))),
                }
                let mut data = Vec::with_capacity(rows * width);
                for _ in 0..rows {
                    let (i, l) = lines.next().ok_or_else(|| err(0, "truncated checkpoint"))?;
                    let row: Vec<f64> = l
                        .split_whitespace()
                        .map(|x| x.parse().map_err(|_| err(i, "bad number")))
                        .collect::<Result<_, _>>()?;
                    if row.len() != width {
                        return Err(err(
                            i,
                            &format!("expected {width} values, found {}", row.len()),
                        ));
                    }
                    data.extend(row);
                }
                Ok(data)
            };
        net.w1 = block("w1", h, d)?;
        net.b1 = block("b1", 1, h)?;
        net.w2 = block("w2", n, h)?;
        net.b2 = block("b2", 1, n)?;
        Ok(net)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ClassifierError> {
        fs::write(path, self.to_checkpoint())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ClassifierError> {
        Self::from_checkpoint(&fs::read_to_string(path)?)
    }
}

/// First (1-based) epoch from which the training error stays at or below
/// [`CONVERGENCE_ERROR`] for [`CONVERGENCE_RUN`] consecutive epochs.
pub fn convergence_epoch(errors: &[f64]) -> Option<usize> {
    errors
        .windows(CONVERGENCE_RUN)
        .position(|w| w.iter().all(|&e| e <= CONVERGENCE_ERROR))
        .map(|i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn cfg(d: usize, h: usize, n: usize, seed: u64) -> ClassifierConfig {
        ClassifierConfig {
            input_dim: d,
            hidden_dim: h,
            output_dim: n,
            seed,
            ..ClassifierConfig::default()
        }
    }
    /// Independent forward pass written out loop by loop.
    #[allow(clippy::needless_range_loop)]
    /// Independent forward pass written out loop by loop.
    fn forward_oracle(net: &ClassifierNet, x: &[f64]) -> Vec<f64> {
        let mut hidden = vec![0.0; net.hidden_dim];
        for j in 0..net.hidden_dim {
            let mut a = net.b1[j];
            for i in 0..net.input_dim {
                a += net.w1[j * net.input_dim + i] * x[i];
            }
            hidden[j] = a.tanh();
        }
        let mut z = vec![0.0; net.output_dim];
        for k in 0..net.output_dim {
            z[k] = net.b2[k];
            for j in 0..net.hidden_dim {
                z[k] += net.w2[k * net.hidden_dim + j] * hidden[j];
            }
        }
        let denom: f64 = z.iter().map(|v| v.exp()).sum();
        z.iter().map(|v| v.exp() / denom).collect()
    }

    #[test]
    fn init_shapes_and_ranges() {
        let a = ClassifierNet::init(&cfg(3, 2, 4, 9)).unwrap();
        let b = ClassifierNet::init(&cfg(3, 2, 4, 9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.w1.len(), 2 * 3);
        assert_eq!(a.w2.len(), 4 * 2);
        assert!(a.w1.iter().all(|w| w.abs() <= 1.0 / 3f64.sqrt()));
        assert!(a.w2.iter().all(|w| w.abs() <= 1.0 / 2f64.sqrt()));
        assert!(a.b1.iter().chain(&a.b2).all(|&b| b == 0.0));
        assert_ne!(a, ClassifierNet::init(&cfg(3, 2, 4, 10)).unwrap());
    }

    #[test]
    fn invalid_configs() {
        assert!(ClassifierNet::init(&cfg(0, 2, 4, 1)).is_err());
        let mut c = cfg(3, 2, 4, 1);
        c.learning_rate = 0.0;
        assert!(c.validate().is_err());
        c.learning_rate = 0.01;
        c.weight_decay = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn softmax_examples() {
        assert_eq!(softmax(&[0.0; 4]), vec![0.25; 4]);
        let p = softmax(&[2f64.ln(), 0.0, 0.0, 0.0]);
        for (got, want) in p.iter().zip([0.4, 0.2, 0.2, 0.2]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert_eq!(softmax(&[1000.0; 4]), vec![0.25; 4]);
        let p = softmax(&[-700.0, 700.0]);
        assert!(p.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn forward_examples() {
        let zero = ClassifierNet::zeros(3, 2, 4);
        assert_eq!(zero.predict(&[1.0, -2.0, 0.5]).unwrap(), vec![0.25; 4]);

        let mut net = ClassifierNet::init(&cfg(3, 5, 4, 2)).unwrap();
        let f = net.forward(&[0.0; 3]).unwrap();
        assert!(f.hidden.iter().all(|&h| h == 0.0));

        net.b1 = vec![0.1, -0.2, 0.3, 0.0, 0.05];
        net.b2 = vec![0.5, 0.0, -0.5, 0.2];
        let x = [0.3, -1.2, 0.7];
        let f = net.forward(&x).unwrap();
        for (a, b) in f.probs.iter().zip(forward_oracle(&net, &x)) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(net.predict(&x).unwrap(), f.probs);
        assert!(matches!(
            net.forward(&[1.0]),
            Err(ClassifierError::DimMismatch {
                expected: 3,
                got: 1
            })
        ));
    }

    #[test]
    fn argmax_invariant_under_bias_shift() {
        let mut net = ClassifierNet::init(&cfg(4, 3, 4, 6)).unwrap();
        let x = [0.2, 0.9, -0.4, 1.1];
        let before = argmax(&net.predict(&x).unwrap());
        for b in &mut net.b2 {
            *b += 3.7;
        }
        assert_eq!(argmax(&net.predict(&x).unwrap()), before);
    }

    #[test]
    fn zero_learning_rate_leaves_net() {
        let mut net = ClassifierNet::init(&cfg(3, 2, 4, 1)).unwrap();
        let before = net.clone();
        let pair = LabeledPair {
            noun_vector: vec![0.5, -0.5, 1.0],
            label: 2,
        };
        let loss = net.train_step(&pair, 0.0, 0.01).unwrap();
        assert_eq!(net, before);
        let p = before.predict(&pair.noun_vector).unwrap()[2];
        assert!((loss + p.ln()).abs() < 1e-15);
    }

    fn loss_of(net: &ClassifierNet, pair: &LabeledPair) -> f64 {
        -net.predict(&pair.noun_vector).unwrap()[pair.label].ln()
    }

    #[test]
    fn gradients_match_finite_differences() {
        let eps = 1e-5;
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let net = ClassifierNet::init(&cfg(3, 2, 4, 8)).unwrap();
        let pair = LabeledPair {
            noun_vector: (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            label: 1,
        };
        let (_, g) = net.gradients(&pair).unwrap();
        let mut worst: f64 = 0.0;
        macro_rules! check {
            ($field:ident) => {
                for i in 0..net.$field.len() {
                    let mut plus = net.clone();
                    plus.$field[i] += eps;
                    let mut minus = net.clone();
                    minus.$field[i] -= eps;
                    let fd = (loss_of(&plus, &pair) - loss_of(&minus, &pair)) / (2.0 * eps);
                    let an = g.$field[i];
                    let rel = (fd - an).abs() / fd.abs().max(an.abs()).max(1e-7);
                    worst = worst.max(rel);
                }
            };
        }
        check!(w1);
        check!(b1);
        check!(w2);
        check!(b2);
        assert!(worst < 1e-4, "max relative error {worst}");
    }

    #[test]
    fn decay_only_dynamics() {
        // Loss gradient vanishes when the hidden layer is zero and the
        // output is already one-hot to machine precision.
        let mut net = ClassifierNet::zeros(2, 2, 2);
        net.w1 = vec![0.5, -0.25, 1.0, 2.0];
        net.w2 = vec![0.3, -0.6, 0.9, 0.1];
        net.b2 = vec![800.0, 0.0];
        let pair = LabeledPair {
            noun_vector: vec![0.0, 0.0],
            label: 0,
        };
        let (eta, gamma) = (0.1, 0.05);
        let w1 = net.w1.clone();
        let w2 = net.w2.clone();
        for step in 1..=5 {
            net.train_step(&pair, eta, gamma).unwrap();
            let factor = (1.0 - eta * gamma).powi(step);
            for (a, b) in net.w1.iter().zip(&w1) {
                assert!((a - b * factor).abs() < 1e-15);
            }
            for (a, b) in net.w2.iter().zip(&w2) {
                assert!((a - b * factor).abs() < 1e-15);
            }
        }
        assert_eq!(net.b1, vec![0.0, 0.0]);
    }

    #[test]
    fn identical_pairs_reach_zero_error() {
        let mut net = ClassifierNet::init(&cfg(3, 4, 4, 3)).unwrap();
        let pairs = vec![
            LabeledPair {
                noun_vector: vec![0.4, -0.1, 0.8],
                label: 3
            };
            5
        ];
        let mut errors = Vec::new();
        for epoch in 0..50 {
            let (_, err) = net.train_epoch(&pairs, 0.01, 0.01, epoch).unwrap();
            assert!((0.0..=1.0).contains(&err));
            errors.push(err);
        }
        assert_eq!(*errors.last().unwrap(), 0.0);
    }

    #[test]
    fn training_is_deterministic() {
        let pairs: Vec<LabeledPair> = (0..12)
            .map(|i| LabeledPair {
                noun_vector: vec![(i as f64).sin(), (i as f64 * 0.7).cos(), 0.3],
                label: i % 4,
            })
            .collect();
        let run = || {
            let mut net = ClassifierNet::init(&cfg(3, 4, 4, 5)).unwrap();
            (0..20)
                .map(|e| net.train_epoch(&pairs, 0.05, 0.01, 100 + e).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
        let mut net = ClassifierNet::init(&cfg(3, 4, 4, 5)).unwrap();
        assert!(matches!(
            net.train_epoch(&[], 0.1, 0.0, 0),
            Err(ClassifierError::EmptyPairs)
        ));
        let bad = LabeledPair {
            noun_vector: vec![0.0; 3],
            label: 4,
        };
        assert!(matches!(
            net.train_step(&bad, 0.1, 0.0),
            Err(ClassifierError::LabelOutOfRange { .. })
        ));
    }

    #[test]
    fn separable_data_converges_without_decay() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let centers = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [-1.0, -1.0, 0.0],
        ];
        let pairs: Vec<LabeledPair> = (0..40)
            .map(|i| {
                let c = centers[i % 4];
                LabeledPair {
                    noun_vector: c.iter().map(|v| v + rng.gen_range(-0.1..0.1)).collect(),
                    label: i % 4,
                }
            })
            .collect();
        let mut net = ClassifierNet::init(&cfg(3, 4, 4, 2)).unwrap();
        let errors: Vec<f64> = (0..300)
            .map(|e| net.train_epoch(&pairs, 0.05, 0.0, e).unwrap().1)
            .collect();
        assert!(convergence_epoch(&errors).is_some());
    }

    #[test]
    fn convergence_rule() {
        assert_eq!(
            convergence_epoch(&[0.5, 0.04, 0.0, 0.06, 0.0, 0.05, 0.01]),
            Some(5)
        );
        assert_eq!(convergence_epoch(&[0.0, 0.0]), None);
        assert_eq!(convergence_epoch(&[0.0, 0.0, 0.0, 0.9]), Some(1));
        assert_eq!(convergence_epoch(&[]), None);
    }

    #[test]
    fn checkpoint_round_trip() {
        let net = ClassifierNet::init(&cfg(5, 3, 4, 12)).unwrap();
        let back = ClassifierNet::from_checkpoint(&net.to_checkpoint()).unwrap();
        assert_eq!(back, net);
        assert!(ClassifierNet::from_checkpoint("garbage").is_err());
        let truncated: String = net
            .to_checkpoint()
            .lines()
            .take(4)
            .collect::<Vec<_>>()
            .join("\n");
        assert!(ClassifierNet::from_checkpoint(&truncated).is_err());
    }

    #[test]
    fn output_permutation() {
        let net = ClassifierNet::init(&cfg(3, 2, 4, 12)).unwrap();
        let x = [0.1, 0.2, -0.3];
        let p = net.predict(&x).unwrap();
        let mut permuted = net.clone();
        let perm = [2, 0, 3, 1];
        permuted.permute_outputs(&perm);
        let q = permuted.predict(&x).unwrap();
        for (k, &old) in perm.iter().enumerate() {
            assert!((q[k] - p[old]).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn softmax_properties(z in proptest::collection::vec(-1e3f64..1e3, 1..8), c in -1e3f64..1e3) {
            let p = softmax(&z);
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert_eq!(argmax(&p), argmax(&z));
            let shifted: Vec<f64> = z.iter().map(|v| v + c).collect();
            for (a, b) in p.iter().zip(softmax(&shifted)) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn bounded_steps_stay_finite(seed in any::<u64>(), eta in 1e-4f64..0.1, gamma in 0.0f64..0.1) {
            let mut net = ClassifierNet::init(&cfg(4, 3, 4, seed)).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..200 {
                let pair = LabeledPair {
                    noun_vector: (0..4).map(|_| rng.gen_range(-5.0..5.0)).collect(),
                    label: rng.gen_range(0..4),
                };
                net.train_step(&pair, eta, gamma).unwrap();
            }
            prop_assert!(net.is_finite());
        }
    }
}
