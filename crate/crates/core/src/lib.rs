//! Hand-crafted linguistic features for one-liner humor detection.
//!
//! The pipeline turns a raw sentence into a fixed 33-entry feature vector:
//! ten NRC emotion counts, fourteen statistics over a shallow chunk parse, and
//! nine semantic/phonetic scores (embedding incongruity, WordNet ambiguity,
//! alliteration and rhyme chains). The [`models`] module trains CART trees,
//! gradient-boosted ensembles and a small fusion MLP on top of those vectors.
//!
//! Every resource is read from a plain file:
//!
//! | module        | resource                                  |
//! |---------------|-------------------------------------------|
//! | [`emolex`]    | NRC word-emotion lexicon (TSV)            |
//! | [`postag`]    | averaged-perceptron tagger model (JSON)   |
//! | [`distsem`]   | word2vec text or binary embeddings        |
//! | [`wordnet`]   | WordNet 3.0 `index.*` / `data.*` files    |
//! | [`phonetics`] | CMU Pronouncing Dictionary                |

pub mod chunker;
pub mod corpus;
pub mod distsem;
pub mod emolex;
pub mod error;
pub mod features;
pub mod models;
pub mod morphy;
pub mod phonetics;
pub mod postag;
pub mod rng;
pub mod wordnet;

pub use error::{Error, Result};
