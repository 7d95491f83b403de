use chrono::{DateTime, Utc};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::AnalysisError;
use crate::ingest::{select_review_versions, ReviewRecord, ReviewStatus, SelectionMode, Side};
use crate::lexing::{classify_file, FileKind, TokenSets, TokenStream};

/// Identity of a review inside training sets: SHA-256 of its id.
pub fn fingerprint(review_id: &str) -> String {
    format!("{:x}", Sha256::digest(review_id.as_bytes()))
}

/// One review with its pre-review and post-review files lexed.
#[derive(Debug, Clone)]
pub struct PreparedReview {
    pub review_id: String,
    pub status: ReviewStatus,
    pub created: DateTime<Utc>,
    pub fingerprint: String,
    pub pre: Vec<TokenStream>,
    pub post: Vec<TokenStream>,
}

impl PreparedReview {
    pub fn side(&self, side: Side) -> &[TokenStream] {
        match side {
            Side::Pre => &self.pre,
            Side::Post => &self.post,
        }
    }
}

/// A review archive ready for analysis. Reviews keep archive order.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub reviews: Vec<PreparedReview>,
}

impl Corpus {
    pub fn prepare(records: &[ReviewRecord], mode: SelectionMode, sets: &TokenSets) -> Result<Corpus, AnalysisError> {
        let reviews = records
            .par_iter()
            .map(|r| {
                let (pre, post) = select_review_versions(r, mode)?;
                let lex = |versions: Vec<crate::ingest::FileVersion>| -> Vec<TokenStream> {
                    versions.iter().map(|v| TokenStream::lex(&v.path, v.side, &v.text(), sets)).collect()
                };
                Ok(PreparedReview {
                    review_id: r.review_id.clone(),
                    status: r.status,
                    created: r.created(),
                    fingerprint: fingerprint(&r.review_id),
                    pre: lex(pre),
                    post: lex(post),
                })
            })
            .collect::<Result<Vec<_>, AnalysisError>>()?;
        Ok(Corpus { reviews })
    }

    pub fn len(&self) -> usize {
        self.reviews.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reviews.is_empty()
    }
}

/// Which streams a model pools.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    Extension(String),
    Kind(FileKind),
}

impl Group {
    pub fn contains(&self, stream: &TokenStream) -> bool {
        match self {
            Group::Extension(e) => stream.extension().as_deref() == Some(e.as_str()),
            Group::Kind(k) => classify_file(&stream.path) == *k,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Group::Extension(e) => e.clone(),
            Group::Kind(k) => k.to_string(),
        }
    }
}
