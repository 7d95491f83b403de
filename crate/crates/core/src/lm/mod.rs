//! N-gram language models: counting, smoothing, scoring and serialization.

mod counts;
mod format;
mod model;
mod stats;
mod vocab;

pub use counts::{count_ngrams, NGramCounts};
pub use format::{escape_token, unescape_token};
pub use model::{EntropyAccumulator, EntropyReport, NGramModel, ReportMeta, Smoothing};
pub use stats::{corpus_stats, CorpusRow};
pub use vocab::{build_counts, Vocabulary};

/// Start-of-sequence marker.
pub const BOS: &str = "<s>";
/// End-of-sequence marker.
pub const EOS: &str = "</s>";
/// Placeholder for tokens outside the training vocabulary.
pub const UNK: &str = "<unk>";

#[derive(Debug, thiserror::Error)]
pub enum LmError {
    #[error("n-gram order must be at least 1, got {0}")]
    InvalidOrder(usize),
    #[error("cannot merge counts of order {left} and {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("additive smoothing needs delta > 0, got {0}")]
    InvalidDelta(f64),
    #[error("unknown smoothing `{0}` (expected mkn, mle or additive=<delta>)")]
    InvalidSmoothing(String),
    #[error("cannot train a model on empty counts")]
    EmptyCounts,
    #[error("unseen context under MLE: {0}")]
    UnseenContext(String),
    #[error("zero-probability n-gram under MLE: {0}")]
    ZeroProbability(String),
    #[error("token {0:?} is not in the model vocabulary")]
    OutOfVocabulary(String),
    #[error("context must have {expected} tokens, got {got}")]
    ContextLength { expected: usize, got: usize },
    #[error("malformed model file at line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
