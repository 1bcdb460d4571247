//! Corpus annotation toolkit for gender-aware English-Arabic machine
//! translation data.
//!
//! The pipeline, end to end:
//!
//! 1. [`alignment_filter`] — score alignment quality per sentence pair and
//!    drop poorly aligned pairs (decision tree or thresholds).
//! 2. [`annotator`] — apply the Arabic gender labelling rules, using the
//!    aligned English side to disambiguate ambiguous verb forms.
//! 3. [`codec`] — append gender side-constraint tokens to the English
//!    source for NMT training, and strip them back out.
//! 4. [`trigger`] — match English trigger patterns that route a sentence
//!    to the base or the gender-adapted translation model.
//! 5. [`eval`] — per-class precision/recall, gender-dependence statistics,
//!    and corpus BLEU with a baseline-vs-proposed comparison.
//!
//! File formats live in [`corpus_io`]; the `gendermt` binary wires the
//! stages together over files.

pub mod alignment_filter;
pub mod annotator;
pub mod codec;
pub mod config;
pub mod corpus_io;
pub mod error;
pub mod eval;
pub mod trigger;
pub mod types;

pub use error::{Error, Result};
