//! Generalization-gradient experiments.
//!
//! A spec lists training pairs (noun, novel word) and tagged test pairs on
//! nouns the classifier never sees during training. After every epoch each
//! test pair is scored by the softmax probability of its own novel word given
//! the noun's vector, and the scores are averaged per tag. The gap between
//! the grammatical and ungrammatical averages is the generalization readout.

mod spec;

pub use spec::{
    ExperimentSpec, HyperOverrides, Side, Tag, TestPair, TrainingPair, UngrammaticalMode,
};

use std::fmt::Write as _;
use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::classifier::{
    convergence_epoch, ClassifierConfig, ClassifierError, ClassifierNet, LabeledPair,
};
use crate::embeddings::{EmbeddingError, EmbeddingStore};

/// Weight decay used for cross-store contrasts unless overridden.
pub const CONTRAST_WEIGHT_DECAY: f64 = 0.05;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Validation {
        line: Option<usize>,
        message: String,
    },
    #[error("noun `{noun}` (line {line}) is not in the embedding vocabulary")]
    UnknownNoun { noun: String, line: usize },
    #[error("spec expects {spec}-dimensional embeddings but the store has dimension {store}")]
    DimMismatch { spec: usize, store: usize },
    #[error("epoch {epoch} is outside the trace (1..={len})")]
    EpochOutOfRange { epoch: usize, len: usize },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

impl ExperimentError {
    fn validation(message: impl Into<String>) -> Self {
        ExperimentError::Validation {
            line: None,
            message: message.into(),
        }
    }
}

/// What to do with nouns missing from the embedding store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Resolution {
    #[default]
    Strict,
    /// Drop the affected pairs and count them.
    Lenient,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub resolution: Resolution,
    pub side: Side,
    /// Settings that override the spec's `[hyper]` section.
    pub overrides: HyperOverrides,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_grammatical: f64,
    pub mean_ungrammatical: f64,
    pub training_error: f64,
    pub mean_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientTrace {
    pub records: Vec<EpochRecord>,
    pub convergence_epoch: Option<usize>,
    pub ungrammatical: UngrammaticalMode,
    /// Pairs dropped in lenient mode.
    pub dropped_pairs: usize,
}

impl GradientTrace {
    pub fn final_gap(&self) -> Option<f64> {
        self.records
            .last()
            .map(|r| r.mean_grammatical - r.mean_ungrammatical)
    }

    pub fn record(&self, epoch: usize) -> Option<&EpochRecord> {
        epoch.checked_sub(1).and_then(|i| self.records.get(i))
    }

    /// CSV with one row per epoch and a trailing `convergence_epoch` row
    /// (empty value when training never converged).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,mean_grammatical,mean_ungrammatical,training_error\n");
        for r in &self.records {
            writeln!(
                out,
                "{},{:.10},{:.10},{:.10}",
                r.epoch, r.mean_grammatical, r.mean_ungrammatical, r.training_error
            )
            .unwrap();
        }
        match self.convergence_epoch {
            Some(e) => writeln!(out, "convergence_epoch,{e}").unwrap(),
            None => out.push_str("convergence_epoch,\n"),
        }
        out
    }
}

/// `mean_grammatical - mean_ungrammatical` at a 1-based epoch.
pub fn grammaticality_gap(trace: &GradientTrace, epoch: usize) -> Result<f64, ExperimentError> {
    trace
        .record(epoch)
        .map(|r| r.mean_grammatical - r.mean_ungrammatical)
        .ok_or(ExperimentError::EpochOutOfRange {
            epoch,
            len: trace.records.len(),
        })
}

/// splitmix64 finalizer, used to derive independent per-epoch seeds.
pub fn mix_seed(base: u64, stream: u64) -> u64 {
    let mut z = base.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(stream.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedTest {
    pub noun: String,
    pub vector: Vec<f64>,
    pub label: usize,
    pub tag: Tag,
}

/// A spec bound to an embedding store: vectors looked up, labels assigned
/// and the classifier configuration settled.
#[derive(Debug, Clone)]
pub struct PreparedExperiment {
    pub config: ClassifierConfig,
    pub training: Vec<LabeledPair>,
    pub tests: Vec<ResolvedTest>,
    pub ungrammatical: UngrammaticalMode,
    pub dropped_pairs: usize,
}

impl PreparedExperiment {
    pub fn new(
        spec: &ExperimentSpec,
        store: &EmbeddingStore,
        opts: &RunOptions,
    ) -> Result<Self, ExperimentError> {
        Self::with_defaults(spec, store, opts, ClassifierConfig::default())
    }

    fn with_defaults(
        spec: &ExperimentSpec,
        store: &EmbeddingStore,
        opts: &RunOptions,
        defaults: ClassifierConfig,
    ) -> Result<Self, ExperimentError> {
        spec.validate()?;
        if opts.side == Side::Secondary {
            spec.require_secondary()?;
        }
        let hyper = spec.hyper.merged(&opts.overrides);
        if let Some(dim) = hyper.dim {
            if dim != store.dim() {
                return Err(ExperimentError::DimMismatch {
                    spec: dim,
                    store: store.dim(),
                });
            }
        }
        let config = ClassifierConfig {
            input_dim: store.dim(),
            output_dim: spec.novel_words.len(),
            ..hyper.apply(defaults)
        };
        config.validate()?;

        let mut dropped = 0usize;
        let mut lookup = |noun: &str, line: usize| -> Result<Option<Vec<f64>>, ExperimentError> {
            match store.lookup(noun) {
                Some(v) => Ok(Some(v.to_vec())),
                None if opts.resolution == Resolution::Lenient => {
                    dropped += 1;
                    Ok(None)
                }
                None => Err(ExperimentError::UnknownNoun {
                    noun: noun.to_owned(),
                    line,
                }),
            }
        };

        let mut training = Vec::with_capacity(spec.training_pairs.len());
        for p in &spec.training_pairs {
            let noun = p.noun_for(opts.side).expect("secondary column checked");
            if let Some(v) = lookup(noun, p.line)? {
                training.push(LabeledPair {
                    noun_vector: v,
                    label: spec.label_of(&p.novel_word).expect("validated novel word"),
                });
            }
        }
        let mut tests = Vec::with_capacity(spec.test_pairs.len());
        for p in &spec.test_pairs {
            let noun = p.noun_for(opts.side).expect("secondary column checked");
            if let Some(v) = lookup(noun, p.line)? {
                tests.push(ResolvedTest {
                    noun: noun.to_owned(),
                    vector: v,
                    label: spec.label_of(&p.novel_word).expect("validated novel word"),
                    tag: p.tag,
                });
            }
        }

        if training.is_empty() {
            return Err(ExperimentError::validation(
                "no training pairs left after dropping unknown nouns",
            ));
        }
        let has = |t: Tag| tests.iter().any(|p| p.tag == t);
        if !has(Tag::Grammatical) {
            return Err(ExperimentError::validation(
                "no grammatical test pairs left after dropping unknown nouns",
            ));
        }
        if spec.ungrammatical == UngrammaticalMode::Measured && !has(Tag::Ungrammatical) {
            return Err(ExperimentError::validation(
                "no ungrammatical test pairs left after dropping unknown nouns",
            ));
        }
        Ok(PreparedExperiment {
            config,
            training,
            tests,
            ungrammatical: spec.ungrammatical,
            dropped_pairs: dropped,
        })
    }

    pub fn init_net(&self) -> Result<ClassifierNet, ExperimentError> {
        Ok(ClassifierNet::init(&self.config)?)
    }

    /// Activation of every test pair: the probability of its own novel word.
    pub fn activations(&self, net: &ClassifierNet) -> Result<Vec<f64>, ExperimentError> {
        self.tests
            .iter()
            .map(|t| Ok(net.predict(&t.vector)?[t.label]))
            .collect()
    }

    /// (mean grammatical, mean ungrammatical) activations.
    pub fn evaluate(&self, net: &ClassifierNet) -> Result<(f64, f64), ExperimentError> {
        let acts = self.activations(net)?;
        let mean_for = |tag: Tag| {
            let (sum, n) = self
                .tests
                .iter()
                .zip(&acts)
                .filter(|(t, _)| t.tag == tag)
                .fold((0.0, 0usize), |(s, n), (_, a)| (s + a, n + 1));
            sum / n as f64
        };
        let g = mean_for(Tag::Grammatical);
        let u = match self.ungrammatical {
            UngrammaticalMode::Measured => mean_for(Tag::Ungrammatical),
            UngrammaticalMode::Complement => 1.0 - g,
        };
        Ok((g, u))
    }

    /// Train `net` for the configured epochs, recording the trace.
    pub fn run_with(&self, net: &mut ClassifierNet) -> Result<GradientTrace, ExperimentError> {
        let cfg = &self.config;
        let mut records = Vec::with_capacity(cfg.epochs);
        for epoch in 1..=cfg.epochs {
            let (mean_loss, training_error) = net.train_epoch(
                &self.training,
                cfg.learning_rate,
                cfg.weight_decay,
                mix_seed(cfg.seed, epoch as u64),
            )?;
            let (g, u) = self.evaluate(net)?;
            records.push(EpochRecord {
                epoch,
                mean_grammatical: g,
                mean_ungrammatical: u,
                training_error,
                mean_loss,
            });
        }
        let errors: Vec<f64> = records.iter().map(|r| r.training_error).collect();
        Ok(GradientTrace {
            records,
            convergence_epoch: convergence_epoch(&errors),
            ungrammatical: self.ungrammatical,
            dropped_pairs: self.dropped_pairs,
        })
    }

    pub fn run(&self) -> Result<GradientTrace, ExperimentError> {
        let mut net = self.init_net()?;
        self.run_with(&mut net)
    }
}

/// Train the classifier on `spec` with vectors from `store` and record the
/// per-epoch generalization gradient.
pub fn run_experiment(
    spec: &ExperimentSpec,
    store: &EmbeddingStore,
    opts: &RunOptions,
) -> Result<GradientTrace, ExperimentError> {
    PreparedExperiment::new(spec, store, opts)?.run()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NounSimilarity {
    pub noun: String,
    /// Mean cosine to the training nouns that share one of its grammatical
    /// novel words.
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityReport {
    /// Sorted by descending similarity.
    pub per_noun: Vec<NounSimilarity>,
    /// Mean over grammatical test pairs of the cosine between the test noun
    /// and the training nouns of the pair's novel word.
    pub grammatical: Option<f64>,
    /// Same for ungrammatical pairs.
    pub ungrammatical: Option<f64>,
    pub dropped_pairs: usize,
}

/// How close each test noun sits to the training exemplars of its class.
pub fn similarity_split_report(
    spec: &ExperimentSpec,
    store: &EmbeddingStore,
    opts: &RunOptions,
) -> Result<SimilarityReport, ExperimentError> {
    let side = opts.side;
    let mut dropped = 0usize;
    let mut known = |noun: &str, line: usize| -> Result<bool, ExperimentError> {
        if store.contains(noun) {
            Ok(true)
        } else if opts.resolution == Resolution::Lenient {
            dropped += 1;
            Ok(false)
        } else {
            Err(ExperimentError::UnknownNoun {
                noun: noun.to_owned(),
                line,
            })
        }
    };

    let mut exemplars: Vec<Vec<&str>> = vec![Vec::new(); spec.novel_words.len()];
    for p in &spec.training_pairs {
        let noun = p
            .noun_for(side)
            .ok_or_else(|| ExperimentError::validation("missing second-store noun column"))?;
        if known(noun, p.line)? {
            exemplars[spec.label_of(&p.novel_word).expect("validated")].push(noun);
        }
    }

    let mut tests: Vec<(&str, usize, Tag)> = Vec::new();
    for p in &spec.test_pairs {
        let noun = p
            .noun_for(side)
            .ok_or_else(|| ExperimentError::validation("missing second-store noun column"))?;
        if known(noun, p.line)? {
            tests.push((
                noun,
                spec.label_of(&p.novel_word).expect("validated"),
                p.tag,
            ));
        }
    }

    let mut sums = [(0.0, 0usize); 2];
    for &(noun, label, tag) in &tests {
        if exemplars[label].is_empty() {
            continue;
        }
        let s = store.mean_pairwise_similarity(&[noun], &exemplars[label])?;
        let slot = &mut sums[(tag == Tag::Ungrammatical) as usize];
        slot.0 += s;
        slot.1 += 1;
    }
    let mean = |(s, n): (f64, usize)| (n > 0).then(|| s / n as f64);

    let mut per_noun = Vec::new();
    let mut nouns: Vec<&str> = Vec::new();
    for &(noun, _, _) in &tests {
        if !nouns.contains(&noun) {
            nouns.push(noun);
        }
    }
    for noun in nouns {
        let mut class: Vec<&str> = Vec::new();
        for &(n, label, tag) in &tests {
            if n == noun && tag == Tag::Grammatical {
                for e in &exemplars[label] {
                    if !class.contains(e) {
                        class.push(e);
                    }
                }
            }
        }
        if class.is_empty() {
            continue;
        }
        per_noun.push(NounSimilarity {
            noun: noun.to_owned(),
            similarity: store.mean_pairwise_similarity(&[noun], &class)?,
        });
    }
    per_noun.sort_by(|a, b| b.similarity.total_cmp(&a.similarity));

    Ok(SimilarityReport {
        per_noun,
        grammatical: mean(sums[0]),
        ungrammatical: mean(sums[1]),
        dropped_pairs: dropped,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Contrast {
    /// Classifier settings shared by both runs.
    pub config: ClassifierConfig,
    pub trace_a: GradientTrace,
    pub trace_b: GradientTrace,
    pub gap_a: f64,
    pub gap_b: f64,
}

/// Run the same stimuli against two embedding spaces with identical
/// hyperparameters: `store_a` reads the first noun column, `store_b` the
/// second. Weight decay defaults to [`CONTRAST_WEIGHT_DECAY`].
pub fn cross_lingual_contrast(
    spec: &ExperimentSpec,
    store_a: &EmbeddingStore,
    store_b: &EmbeddingStore,
    opts: &RunOptions,
) -> Result<Contrast, ExperimentError> {
    spec.require_secondary()?;
    let defaults = ClassifierConfig {
        weight_decay: CONTRAST_WEIGHT_DECAY,
        ..ClassifierConfig::default()
    };
    let a_opts = RunOptions {
        side: Side::Primary,
        ..opts.clone()
    };
    let b_opts = RunOptions {
        side: Side::Secondary,
        ..opts.clone()
    };
    let prepared_a = PreparedExperiment::with_defaults(spec, store_a, &a_opts, defaults.clone())?;
    let prepared_b = PreparedExperiment::with_defaults(spec, store_b, &b_opts, defaults)?;
    let trace_a = prepared_a.run()?;
    let trace_b = prepared_b.run()?;
    let gap = |t: &GradientTrace| t.final_gap().expect("at least one epoch");
    Ok(Contrast {
        config: prepared_a.config,
        gap_a: gap(&trace_a),
        gap_b: gap(&trace_b),
        trace_a,
        trace_b,
    })
}
