//! Deterministic synthetic corpora, embedding spaces and stimulus sets.
//!
//! These give experiments a ground truth: in the generated spaces the
//! semantic class of every noun is a known direction, so whether a
//! regularity is learnable is fixed by construction. The bundled files under
//! `data/` are produced by these functions.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::embeddings::{EmbeddingError, EmbeddingStore};
use crate::experiment::{
    ExperimentSpec, HyperOverrides, Tag, TestPair, TrainingPair, UngrammaticalMode,
};

/// Words `a1..aN` and `b1..bN` used by [`two_topic_corpus`].
pub fn topic_words(topic: char, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{topic}{i}")).collect()
}

/// Two topics whose words only co-occur with each other.
///
/// Sentences are `sentence_len` words drawn uniformly from one topic's
/// `words_per_topic` words, one sentence per line. Topics alternate in
/// blocks of `block` sentences so window pairs rarely straddle topics.
pub fn two_topic_corpus(
    sentences_per_topic: usize,
    words_per_topic: usize,
    sentence_len: usize,
    block: usize,
    seed: u64,
) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topics = [
        topic_words('a', words_per_topic),
        topic_words('b', words_per_topic),
    ];
    let mut out = String::new();
    let mut done = [0usize; 2];
    let mut current = 0;
    while done.iter().any(|&d| d < sentences_per_topic) {
        for _ in 0..block {
            if done[current] == sentences_per_topic {
                break;
            }
            let words: Vec<&str> = (0..sentence_len)
                .map(|_| {
                    topics[current]
                        .choose(&mut rng)
                        .expect("topic has words")
                        .as_str()
                })
                .collect();
            out.push_str(&words.join(" "));
            out.push('\n');
            done[current] += 1;
        }
        current = 1 - current;
    }
    out
}

/// Mean within-topic cosine minus mean cross-topic cosine for the words of
/// [`two_topic_corpus`]. Within-topic pairs exclude a word with itself.
pub fn topic_separation(
    store: &EmbeddingStore,
    words_per_topic: usize,
) -> Result<f64, EmbeddingError> {
    let a = topic_words('a', words_per_topic);
    let b = topic_words('b', words_per_topic);
    let mut within = 0.0;
    let mut n = 0usize;
    for topic in [&a, &b] {
        for (i, x) in topic.iter().enumerate() {
            for y in &topic[i + 1..] {
                within += store.mean_pairwise_similarity(&[x], &[y])?;
                n += 1;
            }
        }
    }
    let cross = store.mean_pairwise_similarity(&a, &b)?;
    Ok(within / n as f64 - cross)
}

/// The bundled two-topic corpus: 200 sentences per topic over `a1..a5`,
/// `b1..b5`.
pub fn bundled_two_topic_corpus() -> String {
    two_topic_corpus(200, 5, 10, 10, 2024)
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

fn unit_axis(dim: usize, axis: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[axis] = 1.0;
    v
}

/// `signal · direction + noise` with isotropic Gaussian noise.
fn clustered(rng: &mut ChaCha8Rng, direction: &[f64], signal: f64, noise: f64) -> Vec<f64> {
    let mut v = gaussian(rng, direction.len(), noise);
    for (x, d) in v.iter_mut().zip(direction) {
        *x += signal * d;
    }
    v
}

/// Remove the component of `v` along the unit vector `direction`.
pub fn project_out(v: &[f64], direction: &[f64]) -> Vec<f64> {
    let along: f64 = v.iter().zip(direction).map(|(a, b)| a * b).sum();
    v.iter()
        .zip(direction)
        .map(|(x, d)| x - along * d)
        .collect()
}

/// Collects rows and builds an [`EmbeddingStore`].
#[derive(Default)]
struct StoreBuilder {
    words: Vec<String>,
    data: Vec<f64>,
}

impl StoreBuilder {
    fn push(&mut self, word: impl Into<String>, v: Vec<f64>) {
        self.words.push(word.into());
        self.data.extend(v);
    }

    fn build(self, dim: usize) -> EmbeddingStore {
        EmbeddingStore::new(self.words, dim, self.data).expect("generated store is valid")
    }
}

fn train(noun: &str, word: &str) -> TrainingPair {
    TrainingPair {
        noun: noun.to_owned(),
        novel_word: word.to_owned(),
        alt_noun: None,
        line: 0,
    }
}

fn test(noun: &str, word: &str, tag: Tag) -> TestPair {
    TestPair {
        noun: noun.to_owned(),
        novel_word: word.to_owned(),
        tag,
        alt_noun: None,
        line: 0,
    }
}

/// Parameters of a two-class embedding space.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoClassGeometry {
    pub dim: usize,
    /// Distance of each class centre from the origin along the class axis.
    pub signal: f64,
    /// Per-component standard deviation of the noun-specific noise.
    pub noise: f64,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub seed: u64,
}

/// Animate/inanimate determiner system with four novel words: `gi`, `ul`
/// go with animate nouns and `ro`, `ne` with inanimate ones. Training nouns
/// alternate between the two words of their class; each test noun is paired
/// with all four words.
pub fn animacy_experiment(geo: &TwoClassGeometry) -> (EmbeddingStore, ExperimentSpec) {
    let mut rng = ChaCha8Rng::seed_from_u64(geo.seed);
    let axis = unit_axis(geo.dim, 0);
    let mut store = StoreBuilder::default();
    let mut training = Vec::new();
    let mut tests = Vec::new();
    let classes = [
        ("animate", 1.0, ["gi", "ul"]),
        ("inanimate", -1.0, ["ro", "ne"]),
    ];
    for (name, sign, words) in classes {
        for i in 0..geo.train_per_class {
            let noun = format!("{name}{:02}", i + 1);
            store.push(
                &noun,
                clustered(&mut rng, &axis, sign * geo.signal, geo.noise),
            );
            training.push(train(&noun, words[i % 2]));
        }
    }
    for (name, sign, words) in classes {
        for i in 0..geo.test_per_class {
            let noun = format!("novel_{name}{:02}", i + 1);
            store.push(
                &noun,
                clustered(&mut rng, &axis, sign * geo.signal, geo.noise),
            );
            for (_, _, ws) in classes {
                for w in ws {
                    let tag = if words.contains(&w) {
                        Tag::Grammatical
                    } else {
                        Tag::Ungrammatical
                    };
                    tests.push(test(&noun, w, tag));
                }
            }
        }
    }
    let spec = ExperimentSpec {
        name: "synthetic-animacy".into(),
        novel_words: ["gi", "ro", "ul", "ne"].map(String::from).to_vec(),
        training_pairs: training,
        test_pairs: tests,
        embedding_source: None,
        hyper: HyperOverrides {
            eta: Some(0.01),
            gamma: Some(0.01),
            hidden: Some(100),
            epochs: Some(200),
            seed: Some(7),
            dim: Some(geo.dim),
        },
        ungrammatical: UngrammaticalMode::Measured,
        one_sided: false,
    };
    (store.build(geo.dim), spec)
}

/// Parameters for the near/far generalization sets.
#[derive(Debug, Clone, PartialEq)]
pub struct NearFarGeometry {
    pub base: TwoClassGeometry,
    /// Near test nouns: a training exemplar plus noise of this scale.
    pub near_noise: f64,
    /// Far test nouns: class signal scaled by this factor.
    pub far_signal_scale: f64,
    /// Far test nouns: noise scale.
    pub far_noise: f64,
}

/// Concrete/abstract verb system: `powl`, `mouten` with concrete nouns and
/// `gouch`, `conell` with abstract ones. Returns one store and two specs that
/// share their training pairs: the first tests nouns lying close to
/// training exemplars, the second nouns with weaker class signal.
pub fn concreteness_experiment(
    geo: &NearFarGeometry,
) -> (EmbeddingStore, ExperimentSpec, ExperimentSpec) {
    let b = &geo.base;
    let mut rng = ChaCha8Rng::seed_from_u64(b.seed);
    let axis = unit_axis(b.dim, 0);
    let mut store = StoreBuilder::default();
    let mut training = Vec::new();
    let classes = [
        ("concrete", 1.0, ["powl", "mouten"]),
        ("abstract", -1.0, ["gouch", "conell"]),
    ];
    let mut exemplars: Vec<Vec<Vec<f64>>> = vec![Vec::new(), Vec::new()];
    for (c, (name, sign, words)) in classes.iter().enumerate() {
        for i in 0..b.train_per_class {
            let noun = format!("{name}{:02}", i + 1);
            let v = clustered(&mut rng, &axis, sign * b.signal, b.noise);
            exemplars[c].push(v.clone());
            store.push(&noun, v);
            training.push(train(&noun, words[i % 2]));
        }
    }
    let mut near = Vec::new();
    let mut far = Vec::new();
    for (c, (name, sign, words)) in classes.iter().enumerate() {
        for i in 0..b.test_per_class {
            let anchor = &exemplars[c][i % exemplars[c].len()];
            let jitter = gaussian(&mut rng, b.dim, geo.near_noise);
            let v: Vec<f64> = anchor.iter().zip(&jitter).map(|(a, j)| a + j).collect();
            let near_noun = format!("near_{name}{:02}", i + 1);
            store.push(&near_noun, v);

            let far_noun = format!("far_{name}{:02}", i + 1);
            store.push(
                &far_noun,
                clustered(
                    &mut rng,
                    &axis,
                    sign * b.signal * geo.far_signal_scale,
                    geo.far_noise,
                ),
            );
            for (_, _, ws) in classes {
                for w in ws {
                    let tag = if words.contains(&w) {
                        Tag::Grammatical
                    } else {
                        Tag::Ungrammatical
                    };
                    near.push(test(&near_noun, w, tag));
                    far.push(test(&far_noun, w, tag));
                }
            }
        }
    }
    let hyper = HyperOverrides {
        eta: Some(0.01),
        gamma: Some(0.01),
        hidden: Some(100),
        epochs: Some(200),
        seed: Some(11),
        dim: Some(b.dim),
    };
    let mk = |name: &str, tests: Vec<TestPair>| ExperimentSpec {
        name: name.into(),
        novel_words: ["powl", "gouch", "mouten", "conell"]
            .map(String::from)
            .to_vec(),
        training_pairs: training.clone(),
        test_pairs: tests,
        embedding_source: None,
        hyper: hyper.clone(),
        ungrammatical: UngrammaticalMode::Measured,
        one_sided: false,
    };
    let store = store.build(b.dim);
    (
        store,
        mk("synthetic-concreteness-near", near),
        mk("synthetic-concreteness-far", far),
    )
}

/// Long/flat classifier system with two novel words (`gi` long, `ro` flat)
/// and complement-convention scoring. Store A encodes the long/flat feature
/// along one axis; store B holds the same vectors with that axis projected
/// out and prefixes every noun with `en_`.
pub fn shape_contrast_experiment(
    geo: &TwoClassGeometry,
) -> (EmbeddingStore, EmbeddingStore, ExperimentSpec) {
    let mut rng = ChaCha8Rng::seed_from_u64(geo.seed);
    let axis = unit_axis(geo.dim, 0);
    let mut a = StoreBuilder::default();
    let mut b = StoreBuilder::default();
    let mut training = Vec::new();
    let mut tests = Vec::new();
    let classes = [("long", 1.0, "gi"), ("flat", -1.0, "ro")];
    let mut add = |noun: String, v: Vec<f64>| {
        let alt = format!("en_{noun}");
        b.push(&alt, project_out(&v, &axis));
        a.push(&noun, v);
        (noun, alt)
    };
    for (name, sign, word) in classes {
        for i in 0..geo.train_per_class {
            let v = clustered(&mut rng, &axis, sign * geo.signal, geo.noise);
            let (noun, alt) = add(format!("{name}{:02}", i + 1), v);
            training.push(TrainingPair {
                alt_noun: Some(alt),
                ..train(&noun, word)
            });
        }
    }
    for (name, sign, word) in classes {
        for i in 0..geo.test_per_class {
            let v = clustered(&mut rng, &axis, sign * geo.signal, geo.noise);
            let (noun, alt) = add(format!("novel_{name}{:02}", i + 1), v);
            for (_, _, w) in classes {
                let tag = if w == word {
                    Tag::Grammatical
                } else {
                    Tag::Ungrammatical
                };
                tests.push(TestPair {
                    alt_noun: Some(alt.clone()),
                    ..test(&noun, w, tag)
                });
            }
        }
    }
    let spec = ExperimentSpec {
        name: "synthetic-long-flat".into(),
        novel_words: ["gi", "ro"].map(String::from).to_vec(),
        training_pairs: training,
        test_pairs: tests,
        embedding_source: None,
        hyper: HyperOverrides {
            eta: Some(0.01),
            gamma: Some(0.05),
            hidden: Some(100),
            epochs: Some(200),
            seed: Some(13),
            dim: Some(geo.dim),
        },
        ungrammatical: UngrammaticalMode::Complement,
        one_sided: false,
    };
    (a.build(geo.dim), b.build(geo.dim), spec)
}

fn bundled_geometry(seed: u64) -> TwoClassGeometry {
    TwoClassGeometry {
        dim: 20,
        signal: 1.0,
        noise: 0.3,
        train_per_class: 8,
        test_per_class: 8,
        seed,
    }
}

/// The bundled animacy store and spec.
pub fn bundled_animacy() -> (EmbeddingStore, ExperimentSpec) {
    animacy_experiment(&bundled_geometry(3))
}

/// The bundled concreteness store with its near and far specs.
pub fn bundled_concreteness() -> (EmbeddingStore, ExperimentSpec, ExperimentSpec) {
    concreteness_experiment(&NearFarGeometry {
        base: bundled_geometry(103),
        near_noise: 0.1,
        far_signal_scale: 0.4,
        far_noise: 0.4,
    })
}

/// The bundled long/flat stores (feature present, feature ablated) and spec.
pub fn bundled_shape_contrast() -> (EmbeddingStore, EmbeddingStore, ExperimentSpec) {
    shape_contrast_experiment(&TwoClassGeometry {
        test_per_class: 100,
        ..bundled_geometry(203)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocab, tokenize, TokenizerMode};

    #[test]
    fn corpus_topics_never_mix_within_a_sentence() {
        let text = two_topic_corpus(30, 5, 10, 10, 1);
        assert_eq!(text.lines().count(), 60);
        for line in text.lines() {
            let first = line.chars().next().unwrap();
            assert!(line.split(' ').all(|w| w.starts_with(first)));
            assert_eq!(line.split(' ').count(), 10);
        }
        let toks = tokenize(&text, TokenizerMode::Whitespace, true);
        assert_eq!(build_vocab(&toks, 1).unwrap().len(), 10);
    }

    #[test]
    fn projection_removes_axis() {
        let axis = unit_axis(3, 0);
        assert_eq!(project_out(&[2.0, -1.0, 0.5], &axis), vec![0.0, -1.0, 0.5]);
    }

    #[test]
    fn bundled_specs_are_valid() {
        let (store, spec) = bundled_animacy();
        spec.validate().unwrap();
        assert_eq!(store.len(), 32);
        let (store, near, far) = bundled_concreteness();
        near.validate().unwrap();
        far.validate().unwrap();
        assert_eq!(near.training_pairs, far.training_pairs);
        assert_eq!(store.len(), 16 + 32);
        let (a, b, spec) = bundled_shape_contrast();
        spec.validate().unwrap();
        spec.require_secondary().unwrap();
        assert_eq!(a.len(), b.len());
        assert!(b.data().chunks(20).all(|row| row[0] == 0.0));
    }
}
