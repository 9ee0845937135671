//! Unsupervised machine translation driven by language models.
//!
//! The pipeline trains two monolingual n-gram LMs and cross-lingual word
//! embeddings, infers a phrase table from embedding cosines, bootstraps
//! translation with a noisy-channel phrase decoder, and then improves two
//! small attention seq2seq models by iterative back-translation in which
//! every synthetic sentence pair is weighted by the LMs and the current
//! translation model.
//!
//! Verification is desk-scale: synthetic cipher language pairs provide gold
//! dictionaries and aligned dev/test references that real unsupervised
//! setups lack.

pub mod config;
pub mod corpus;
pub mod embed;
pub mod error;
pub mod eval;
pub mod lm;
pub mod phrase;
pub mod seq2seq;
pub mod smt;
pub mod trainer;
pub mod weighting;

pub mod cli;

pub use error::{Error, Result};
