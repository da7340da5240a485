//! Pragmatic radiology-report toolkit.
//!
//! - [`report`] and [`corpus`]: domain types, normalization, segmentation, file formats
//! - [`labeler`]: deterministic lexicon labeler (positive / negative / uncertain / not mentioned)
//! - [`stats`]: corpus summaries, indication-conditioned negative-mention rates, χ² test
//! - [`cleaning`]: seven-rule report cleaning with a label-preservation guard
//! - [`metrics`]: positive/negative F1, BLEU-2, keyword hallucination rate
//! - [`generator`]: label-set retrieval with indication-driven negative sentences
//! - [`cli`]: the `radprag` command line

pub mod cleaning;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod generator;
pub mod labeler;
pub mod metrics;
pub mod report;
pub mod stats;

pub use error::{Error, Result};
pub use labeler::{indication_mentions, label_report, label_sentence, Lexicon};
pub use report::{normalize_text, segment_sentences, Condition, LabelValue, LabelVector, Report, Sentence};
