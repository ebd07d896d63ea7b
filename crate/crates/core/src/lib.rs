//! Semi-supervised text classification with multinomial naive Bayes.
//!
//! The crate trains naive Bayes from labeled sentences, optionally folds in
//! unlabeled sentences with expectation-maximization, and sweeps the
//! dictionary size to expose how the benefit of unlabeled data depends on the
//! choice of features. A synthetic mixture-model generator supplies corpora
//! with known ground truth, including knobs that break the naive Bayes
//! assumptions on purpose.
//!
//! Module map:
//!
//! * [`corpus`]: sentences, tokenization, JSONL I/O, train/test splits.
//! * [`vocabulary`]: ordered word pools, truncation to a dictionary, count vectors.
//! * [`classifier`]: supervised multinomial naive Bayes in log space.
//! * [`em`]: EM over labeled and unlabeled data with an unlabeled weight.
//! * [`feature_selection`]: information gain from hard and pseudo-labeled counts.
//! * [`synth`]: corpus generator with a known generating model.
//! * [`harness`]: experiment grids and accuracy-surface analysis.
//! * [`cli`]: the `ssnb` command line.

pub mod classifier;
pub mod cli;
pub mod corpus;
pub mod em;
mod error;
pub mod feature_selection;
pub mod harness;
pub mod math;
pub mod rng;
pub mod synth;
pub mod vocabulary;

pub use crate::error::{Error, Result};
