//! Distributional word embeddings and a feedforward novel-word classifier
//! for simulating implicit learning of semantic regularities.
//!
//! The pipeline has two stages. [`skipgram`] trains word vectors with
//! hierarchical softmax on a tokenized corpus ([`corpus`]); [`embeddings`]
//! persists and queries them. [`classifier`] maps noun vectors to novel words
//! through a tanh hidden layer, and [`experiment`] tracks, epoch by epoch,
//! how strongly the network prefers grammatical over ungrammatical pairings
//! for nouns it never saw in training.

pub mod bundle;
pub mod classifier;
pub mod corpus;
pub mod embeddings;
pub mod experiment;
pub mod linalg;
pub mod skipgram;
pub mod synthetic;
