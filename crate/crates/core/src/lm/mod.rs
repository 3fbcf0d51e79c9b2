//! Word-level backoff n-gram language models: counting, count pruning,
//! interpolated modified Kneser-Ney estimation, ARPA I/O and scoring.

mod arpa;
mod counts;
mod estimate;
mod model;
mod vocab;

pub use arpa::{read_arpa, read_arpa_str, write_arpa, write_arpa_string, ArpaOptions};
pub use counts::{
    count_ngrams, count_ngrams_with_limit, prune, Count, NGramCounts, PruneThresholds,
};
pub use estimate::{estimate, estimate_with, Discounts, EstimateOptions};
pub use model::{LmEntry, NGramModel};
pub use vocab::{Vocab, WordId, BOS, EOS, UNK};

use thiserror::Error;

/// Highest order accepted without an explicit override.
pub const MAX_ORDER: usize = 4;

#[derive(Debug, Error)]
pub enum LmError {
    #[error("n-gram order {order} outside 1..={max}")]
    OrderOutOfRange { order: usize, max: usize },
    #[error("no usable n-grams to estimate from")]
    DegenerateCounts,
    #[error("ARPA order {0} exceeds the {MAX_ORDER}-gram cap")]
    OrderTooHigh(usize),
    #[error("malformed ARPA at line {line}: {reason}")]
    MalformedArpa { line: usize, reason: String },
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
}

pub(crate) fn malformed(line: usize, reason: impl Into<String>) -> LmError {
    LmError::MalformedArpa {
        line,
        reason: reason.into(),
    }
}
