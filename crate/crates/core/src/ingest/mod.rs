//! Review archives: data model, parsing, version reconstruction, churn and
//! Gerrit retrieval.

mod archive;
pub mod gerrit;
mod versions;

use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub use archive::{parse_review_archive, write_review_archive, ArchiveParse, MalformedPolicy};
pub use gerrit::{fetch_reviews, FetchOptions, HttpResponse, HttpTransport, UreqTransport};
pub use versions::{compute_churn, reconstruct_versions, select_review_versions, SelectionMode};

/// Final decision on a review.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReviewStatus {
    Accepted,
    Abandoned,
}

impl ReviewStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ReviewStatus::Accepted => "accepted",
            ReviewStatus::Abandoned => "abandoned",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "accepted" => Some(ReviewStatus::Accepted),
            "abandoned" => Some(ReviewStatus::Abandoned),
            _ => None,
        }
    }
}

impl fmt::Display for ReviewStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Annotation of a single diff line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineOp {
    Added,
    Removed,
    Unchanged,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffLine {
    pub op: LineOp,
    pub text: String,
}

impl DiffLine {
    pub fn new(op: LineOp, text: impl Into<String>) -> Self {
        Self { op, text: text.into() }
    }
}

/// Line-annotated diff of one file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDiff {
    pub path: String,
    pub lines: Vec<DiffLine>,
}

impl FileDiff {
    pub fn new(path: impl Into<String>, lines: Vec<DiffLine>) -> Self {
        Self { path: path.into(), lines }
    }
}

/// One uploaded iteration of a review.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchRevision {
    pub revision_number: u32,
    pub created: DateTime<Utc>,
    pub files: Vec<FileDiff>,
}

/// A review with its decision and ordered revisions.
///
/// Construct through [`parse_review_archive`] or [`ReviewRecord::new`], both of
/// which enforce the record invariants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewRecord {
    pub review_id: String,
    pub status: ReviewStatus,
    pub revisions: Vec<PatchRevision>,
}

impl ReviewRecord {
    pub fn new(
        review_id: impl Into<String>,
        status: ReviewStatus,
        revisions: Vec<PatchRevision>,
    ) -> Result<Self, String> {
        let record = Self { review_id: review_id.into(), status, revisions };
        record.validate()?;
        Ok(record)
    }

    /// Checks identity, revision ordering and per-revision path uniqueness.
    pub fn validate(&self) -> Result<(), String> {
        if self.review_id.is_empty() {
            return Err("empty review_id".into());
        }
        if self.revisions.is_empty() {
            return Err("review has no revisions".into());
        }
        let mut previous = 0u32;
        for rev in &self.revisions {
            if rev.revision_number < 1 {
                return Err("revision_number must be >= 1".into());
            }
            if rev.revision_number <= previous {
                return Err(format!("non-monotonic revision numbers ({} after {})", rev.revision_number, previous));
            }
            previous = rev.revision_number;
            let mut seen = std::collections::HashSet::new();
            for file in &rev.files {
                if !seen.insert(file.path.as_str()) {
                    return Err(format!("duplicate path {:?} in revision {}", file.path, rev.revision_number));
                }
            }
        }
        Ok(())
    }

    /// Creation time of the first revision.
    pub fn created(&self) -> DateTime<Utc> {
        self.revisions[0].created
    }

    pub fn final_revision(&self) -> &PatchRevision {
        self.revisions.last().expect("validated record has revisions")
    }
}

/// Which side of a review a file version belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Pre,
    Post,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Pre => "pre",
            Side::Post => "post",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Reconstructed content of one file on one side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileVersion {
    pub path: String,
    pub side: Side,
    pub lines: Vec<String>,
}

impl FileVersion {
    pub fn text(&self) -> String {
        self.lines.join("\n")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ChurnCounts {
    pub added: u64,
    pub removed: u64,
}

impl ChurnCounts {
    pub fn churn(&self) -> u64 {
        self.added + self.removed
    }
}

/// Added/removed line counts of one file diff.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChurnStats {
    pub path: String,
    pub counts: ChurnCounts,
}

impl ChurnStats {
    pub fn added(&self) -> u64 {
        self.counts.added
    }
    pub fn removed(&self) -> u64 {
        self.counts.removed
    }
    pub fn churn(&self) -> u64 {
        self.counts.churn()
    }
}

/// A malformed archive record.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{reason} at record {index}")]
pub struct RecordError {
    pub index: usize,
    pub reason: String,
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("reading archive: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error("review {0:?} has no revisions")]
    NoRevisions(String),
    #[error("fetching {url}: {reason}")]
    Fetch { url: String, reason: String, retriable: bool },
    #[error("pagination loop at offset {start} for query {query:?}")]
    PaginationLoop { query: String, start: usize },
}

impl IngestError {
    /// Whether retrying the same operation later may succeed.
    pub fn is_retriable(&self) -> bool {
        match self {
            IngestError::Fetch { retriable, .. } => *retriable,
            IngestError::PaginationLoop { .. } => true,
            _ => false,
        }
    }
}
