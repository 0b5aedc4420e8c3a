//! Polarity mismatch detection for scored online reviews.
//!
//! The crate trains a text polarity classifier on strongly labeled reviews
//! (ten-point scale, scores above 8 or below 4), then applies it to a
//! five-point scored corpus and flags every review whose predicted text
//! polarity disagrees with the polarity implied by its score.
//!
//! Pipeline stages, in order:
//!
//! - [`corpus`]: ingestion, filtering, score labeling, class balancing
//! - [`textpipe`]: tokenization, stopwords, Porter stemming, vocabulary, TF weighting
//! - [`featsel`]: information-gain ranking and selection
//! - [`classify`]: linear SVM (SMO), multinomial naive Bayes, presence decision tree
//! - [`eval`]: stratified k-fold cross-validation and metrics
//! - [`mismatch`]: polarity mismatch records and report tables
//!
//! Data-parallel loops go through [`exec`], which uses rayon when the
//! `parallel` feature is enabled and falls back to plain iterators otherwise.

pub mod classify;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod exec;
pub mod featsel;
pub mod manifest;
pub mod mismatch;
pub mod rng;
pub mod synth;
pub mod table;
pub mod textpipe;

pub use error::{Error, Result};
