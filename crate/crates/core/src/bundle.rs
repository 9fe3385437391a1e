//! Generators for the files shipped under `data/`.
//!
//! Synthetic stores and specs come from [`crate::synthetic`]. The sample
//! corpora are templated sentences in which each noun class draws context
//! words from its own list, so embeddings trained on them carry the class
//! distinctions used by the real-noun specs.

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embeddings::EmbeddingStore;
use crate::experiment::{
    ExperimentSpec, HyperOverrides, Tag, TestPair, TrainingPair, UngrammaticalMode,
};
use crate::synthetic;

/// A file path relative to `data/` and its contents.
#[derive(Debug, Clone, PartialEq)]
pub struct BundledFile {
    pub path: PathBuf,
    pub contents: String,
}

fn file(path: &str, contents: String) -> BundledFile {
    BundledFile {
        path: PathBuf::from(path),
        contents,
    }
}

fn store_text(store: &EmbeddingStore) -> String {
    let mut buf = Vec::new();
    store.write_text(&mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("text format is UTF-8")
}

fn spec_text(mut spec: ExperimentSpec, embeddings: Option<&str>, header: &str) -> String {
    spec.embedding_source = embeddings.map(PathBuf::from);
    format!("{header}{}", spec.to_text())
}

const APPROX_HEADER: &str = "\
# Illustrative stimuli: everyday nouns arranged after the published design.
# The original item lists are not reproduced. Pair with embeddings trained
# on the sample corpora (see README).
";

/// One noun class of a templated corpus.
struct NounClass<'a> {
    nouns: &'a [&'a str],
    /// Probability that a context slot uses a class word instead of a
    /// generic one.
    purity: f64,
    contexts: &'a [&'a str],
    prefix: &'a [&'a str],
}

fn templated_corpus(
    classes: &[NounClass],
    generic: &[&str],
    sentences_per_noun: usize,
    context_len: usize,
    seed: u64,
) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sentences = Vec::new();
    for class in classes {
        for noun in class.nouns {
            for _ in 0..sentences_per_noun {
                let mut words: Vec<&str> = class.prefix.to_vec();
                words.push(noun);
                for _ in 0..context_len {
                    let pool = if rng.gen::<f64>() < class.purity {
                        class.contexts
                    } else {
                        generic
                    };
                    words.push(pool.choose(&mut rng).expect("non-empty pool"));
                }
                sentences.push(words.join(" "));
            }
        }
    }
    sentences.shuffle(&mut rng);
    let mut out = sentences.join("\n");
    out.push('\n');
    out
}

const EN_GENERIC: &[&str] = &[
    "day", "time", "place", "people", "way", "thing", "there", "again", "today", "often", "some",
    "other",
];

const ANIMATE_TRAIN: &[&str] = &[
    "lion", "dog", "cat", "horse", "cow", "bird", "rabbit", "monkey",
];
const INANIMATE_TRAIN: &[&str] = &[
    "table", "chair", "cup", "book", "lamp", "clock", "spoon", "bottle",
];
const ANIMATE_TEST: &[&str] = &["tiger", "sheep", "mouse", "elephant"];
const INANIMATE_TEST: &[&str] = &["bucket", "kettle", "shoe", "bell"];

const CONCRETE_TRAIN: &[&str] = &["hammer", "stone", "brick", "knife", "wagon", "barrel"];
const ABSTRACT_TRAIN: &[&str] = &[
    "freedom", "honesty", "justice", "courage", "wisdom", "patience",
];
const CONCRETE_NEAR: &[&str] = &["axe", "rock", "saw"];
const ABSTRACT_NEAR: &[&str] = &["loyalty", "bravery", "fairness"];
const CONCRETE_FAR: &[&str] = &["candle", "anchor", "mirror"];
const ABSTRACT_FAR: &[&str] = &["theory", "reason", "memory"];

const LONG_EN: &[&str] = &["rope", "stick", "belt", "scarf", "snake", "ribbon"];
const FLAT_EN: &[&str] = &["paper", "photo", "map", "blanket", "stamp", "towel"];
const LONG_EN_TEST: &[&str] = &["river", "road", "fish", "trousers"];
const FLAT_EN_TEST: &[&str] = &["ticket", "painting", "card", "carpet"];
const LONG_ZH: &[&str] = &["绳子", "棍子", "腰带", "围巾", "蛇", "丝带"];
const FLAT_ZH: &[&str] = &["纸", "照片", "地图", "毯子", "邮票", "毛巾"];
const LONG_ZH_TEST: &[&str] = &["河", "路", "鱼", "裤子"];
const FLAT_ZH_TEST: &[&str] = &["票", "画", "卡片", "地毯"];

/// Templated English sample corpus. Animacy and concreteness are carried
/// by context words; long/flat nouns only get generic contexts.
pub fn sample_english_corpus() -> String {
    let animate_ctx = &[
        "breathes", "eats", "sleeps", "runs", "hunts", "drinks", "grows", "alive",
    ];
    let inanimate_ctx = &[
        "stored", "cleaned", "painted", "polished", "broken", "bought", "shelf", "plastic",
    ];
    let concrete_ctx = &["touch", "hold", "heavy", "wooden", "solid", "carry"];
    let abstract_ctx = &["think", "believe", "idea", "feel", "discuss", "mind"];
    let animate: Vec<&str> = [ANIMATE_TRAIN, ANIMATE_TEST].concat();
    let inanimate: Vec<&str> = [INANIMATE_TRAIN, INANIMATE_TEST].concat();
    let concrete: Vec<&str> = [CONCRETE_TRAIN, CONCRETE_NEAR].concat();
    let abstract_: Vec<&str> = [ABSTRACT_TRAIN, ABSTRACT_NEAR].concat();
    let shapes: Vec<&str> = [LONG_EN, FLAT_EN, LONG_EN_TEST, FLAT_EN_TEST].concat();
    let the: &[&str] = &["the"];
    let classes = [
        NounClass {
            nouns: &animate,
            purity: 0.7,
            contexts: animate_ctx,
            prefix: the,
        },
        NounClass {
            nouns: &inanimate,
            purity: 0.7,
            contexts: inanimate_ctx,
            prefix: the,
        },
        NounClass {
            nouns: &concrete,
            purity: 0.7,
            contexts: concrete_ctx,
            prefix: the,
        },
        NounClass {
            nouns: &abstract_,
            purity: 0.7,
            contexts: abstract_ctx,
            prefix: the,
        },
        NounClass {
            nouns: CONCRETE_FAR,
            purity: 0.25,
            contexts: concrete_ctx,
            prefix: the,
        },
        NounClass {
            nouns: ABSTRACT_FAR,
            purity: 0.25,
            contexts: abstract_ctx,
            prefix: the,
        },
        NounClass {
            nouns: &shapes,
            purity: 0.0,
            contexts: EN_GENERIC,
            prefix: the,
        },
    ];
    templated_corpus(&classes, EN_GENERIC, 30, 6, 31)
}

/// Pre-segmented Chinese sample corpus for the long/flat nouns, each noun
/// introduced by its shape classifier.
pub fn sample_chinese_corpus() -> String {
    let generic = &[
        "我", "看见", "了", "在", "这", "那", "买", "有", "家里", "桌上",
    ];
    let long_ctx = &["长", "细", "弯", "拉"];
    let flat_ctx = &["平", "薄", "铺", "叠"];
    let long: Vec<&str> = [LONG_ZH, LONG_ZH_TEST].concat();
    let flat: Vec<&str> = [FLAT_ZH, FLAT_ZH_TEST].concat();
    let classes = [
        NounClass {
            nouns: &long,
            purity: 0.4,
            contexts: long_ctx,
            prefix: &["一", "条"],
        },
        NounClass {
            nouns: &flat,
            purity: 0.4,
            contexts: flat_ctx,
            prefix: &["一", "张"],
        },
    ];
    templated_corpus(&classes, generic, 40, 6, 37)
}

fn pair(noun: &str, word: &str, alt: Option<&str>) -> TrainingPair {
    TrainingPair {
        noun: noun.to_owned(),
        novel_word: word.to_owned(),
        alt_noun: alt.map(str::to_owned),
        line: 0,
    }
}

/// Test nouns, their optional second-store forms, and their grammatical words.
type TestClass<'a> = (&'a [&'a str], Option<&'a [&'a str]>, &'a [&'a str]);

/// Every test noun paired with every novel word, tagged by class.
fn crossed_tests(classes: &[TestClass], all_words: &[&str]) -> Vec<TestPair> {
    let mut out = Vec::new();
    for (nouns, alts, words) in classes {
        for (i, noun) in nouns.iter().enumerate() {
            for w in all_words {
                out.push(TestPair {
                    noun: (*noun).to_owned(),
                    novel_word: (*w).to_owned(),
                    tag: if words.contains(w) {
                        Tag::Grammatical
                    } else {
                        Tag::Ungrammatical
                    },
                    alt_noun: alts.map(|a| a[i].to_owned()),
                    line: 0,
                });
            }
        }
    }
    out
}

fn alternating(nouns: &[&str], alts: Option<&[&str]>, words: [&str; 2]) -> Vec<TrainingPair> {
    nouns
        .iter()
        .enumerate()
        .map(|(i, n)| pair(n, words[i % 2], alts.map(|a| a[i])))
        .collect()
}

fn real_noun_hyper(gamma: f64) -> HyperOverrides {
    HyperOverrides {
        eta: Some(0.01),
        gamma: Some(gamma),
        hidden: Some(100),
        epochs: Some(200),
        seed: Some(7),
        dim: None,
    }
}

fn real_noun_spec(
    name: &str,
    words: [&str; 4],
    training: Vec<TrainingPair>,
    tests: Vec<TestPair>,
    gamma: f64,
    ungrammatical: UngrammaticalMode,
) -> ExperimentSpec {
    ExperimentSpec {
        name: name.into(),
        novel_words: words.map(String::from).to_vec(),
        training_pairs: training,
        test_pairs: tests,
        embedding_source: None,
        hyper: real_noun_hyper(gamma),
        ungrammatical,
        one_sided: false,
    }
}

/// Real-noun animacy spec: `gi`/`ul` animate, `ro`/`ne` inanimate.
pub fn animacy_english_spec() -> ExperimentSpec {
    let words = ["gi", "ro", "ul", "ne"];
    let training = [
        alternating(ANIMATE_TRAIN, None, ["gi", "ul"]),
        alternating(INANIMATE_TRAIN, None, ["ro", "ne"]),
    ]
    .concat();
    let tests = crossed_tests(
        &[
            (ANIMATE_TEST, None, &["gi", "ul"]),
            (INANIMATE_TEST, None, &["ro", "ne"]),
        ],
        &words,
    );
    real_noun_spec(
        "animacy-en",
        words,
        training,
        tests,
        0.01,
        UngrammaticalMode::Measured,
    )
}

/// Real-noun concreteness specs (near, far) sharing training pairs:
/// `powl`/`mouten` concrete, `gouch`/`conell` abstract.
pub fn concreteness_english_specs() -> (ExperimentSpec, ExperimentSpec) {
    let words = ["powl", "gouch", "mouten", "conell"];
    let training = [
        alternating(CONCRETE_TRAIN, None, ["powl", "mouten"]),
        alternating(ABSTRACT_TRAIN, None, ["gouch", "conell"]),
    ]
    .concat();
    let tests = |c: &'static [&'static str], a: &'static [&'static str]| {
        crossed_tests(
            &[
                (c, None, &["powl", "mouten"]),
                (a, None, &["gouch", "conell"]),
            ],
            &words,
        )
    };
    (
        real_noun_spec(
            "concreteness-near-en",
            words,
            training.clone(),
            tests(CONCRETE_NEAR, ABSTRACT_NEAR),
            0.01,
            UngrammaticalMode::Measured,
        ),
        real_noun_spec(
            "concreteness-far-en",
            words,
            training,
            tests(CONCRETE_FAR, ABSTRACT_FAR),
            0.01,
            UngrammaticalMode::Measured,
        ),
    )
}

/// Real-noun long/flat spec: first column Chinese, second column English.
/// Two novel words, `gi` long and `ro` flat, with complement scoring and
/// decay 0.05.
pub fn long_flat_spec() -> ExperimentSpec {
    let words = ["gi", "ro"];
    let training = [
        alternating(LONG_ZH, Some(LONG_EN), ["gi", "gi"]),
        alternating(FLAT_ZH, Some(FLAT_EN), ["ro", "ro"]),
    ]
    .concat();
    let tests = crossed_tests(
        &[
            (LONG_ZH_TEST, Some(LONG_EN_TEST), &["gi"]),
            (FLAT_ZH_TEST, Some(FLAT_EN_TEST), &["ro"]),
        ],
        &words,
    );
    ExperimentSpec {
        name: "long-flat-zh-en".into(),
        novel_words: words.map(String::from).to_vec(),
        training_pairs: training,
        test_pairs: tests,
        embedding_source: None,
        hyper: real_noun_hyper(0.05),
        ungrammatical: UngrammaticalMode::Complement,
        one_sided: false,
    }
}

/// Every file under `data/`, in a fixed order.
pub fn bundled_files() -> Vec<BundledFile> {
    let mut files = vec![
        file(
            "corpus/two_topic.txt",
            synthetic::bundled_two_topic_corpus(),
        ),
        file("corpus/sample_en.txt", sample_english_corpus()),
        file("corpus/sample_zh.txt", sample_chinese_corpus()),
    ];

    let (store, spec) = synthetic::bundled_animacy();
    files.push(file("embeddings/animacy.txt", store_text(&store)));
    files.push(file(
        "specs/animacy.spec",
        spec_text(spec, Some("../embeddings/animacy.txt"), ""),
    ));

    let (store, near, far) = synthetic::bundled_concreteness();
    files.push(file("embeddings/concreteness.txt", store_text(&store)));
    let emb = Some("../embeddings/concreteness.txt");
    files.push(file(
        "specs/concreteness_near.spec",
        spec_text(near, emb, ""),
    ));
    files.push(file("specs/concreteness_far.spec", spec_text(far, emb, "")));

    let (a, b, spec) = synthetic::bundled_shape_contrast();
    files.push(file("embeddings/shape_present.txt", store_text(&a)));
    files.push(file("embeddings/shape_ablated.txt", store_text(&b)));
    files.push(file("specs/shape_contrast.spec", spec_text(spec, None, "")));

    files.push(file(
        "specs/animacy_en.spec",
        spec_text(animacy_english_spec(), None, APPROX_HEADER),
    ));
    let (near, far) = concreteness_english_specs();
    files.push(file(
        "specs/concreteness_near_en.spec",
        spec_text(near, None, APPROX_HEADER),
    ));
    files.push(file(
        "specs/concreteness_far_en.spec",
        spec_text(far, None, APPROX_HEADER),
    ));
    files.push(file(
        "specs/long_flat_zh_en.spec",
        spec_text(long_flat_spec(), None, APPROX_HEADER),
    ));
    files
}
