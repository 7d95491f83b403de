//! The review-conformance experiments: churn by file kind, entropy curves,
//! syntax-token tables and the group significance test.

mod churn;
mod corpus;
mod entropy;
mod kruskal;
mod report;
mod syntax;
mod training;

use std::ops::RangeInclusive;

pub use churn::{churn_by_kind, ChurnReport, ChurnRow};
pub use corpus::{fingerprint, Corpus, Group, PreparedReview};
pub use entropy::{accepted_vs_abandoned, entropy_by_kind, pre_vs_post_entropy, EntropyCell, EntropyTable};
pub use kruskal::{kruskal_wallis, GroupTestResult};
pub use report::{corpus_table, run_experiment, Experiment, Report, Table, SCHEMA_VERSION};
pub use syntax::{
    syntax_proportions, top_changed_tokens, ChangedToken, Stability, SyntaxCell, SyntaxTable, TopChangedTable,
};
pub use training::{TrainPolicy, TrainedModel};

use crate::ingest::{IngestError, SelectionMode};
use crate::lexing::FileKind;
use crate::lm::{LmError, Smoothing};
use crate::Scalar;

pub const MAX_ORDER: usize = 9;

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{0}")]
    Precondition(String),
    #[error("review {0} is part of its own training data")]
    Leakage(String),
    #[error(transparent)]
    Lm(#[from] LmError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

/// Settings shared by all experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig<F> {
    pub orders: RangeInclusive<usize>,
    pub smoothing: Smoothing<F>,
    /// Training tokens seen fewer times become `<unk>`.
    pub min_count: u32,
    pub mode: SelectionMode,
    pub policy: TrainPolicy,
    /// Restricts extension-level experiments; defaults to the programming
    /// extensions (or the extensions of `kinds` when given).
    pub extensions: Option<Vec<String>>,
    /// Restricts kind-level experiments; defaults to the analyzed kinds.
    pub kinds: Option<Vec<FileKind>>,
}

impl<F: Scalar> Default for ExperimentConfig<F> {
    fn default() -> Self {
        ExperimentConfig {
            orders: 3..=9,
            smoothing: Smoothing::ModifiedKneserNey,
            min_count: 2,
            mode: SelectionMode::FirstVsLast,
            policy: TrainPolicy::Loo,
            extensions: None,
            kinds: None,
        }
    }
}

impl<F: Scalar> ExperimentConfig<F> {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        let (lo, hi) = (*self.orders.start(), *self.orders.end());
        if lo < 1 || hi > MAX_ORDER || lo > hi {
            return Err(AnalysisError::InvalidConfig(format!(
                "orders must lie within 1..={MAX_ORDER}, got {lo}..={hi}"
            )));
        }
        if self.min_count < 1 {
            return Err(AnalysisError::InvalidConfig("min_count must be at least 1".into()));
        }
        Ok(())
    }

    /// Extensions analyzed by the per-extension experiments.
    pub fn analyzed_extensions(&self) -> Vec<String> {
        if let Some(e) = &self.extensions {
            return e.clone();
        }
        let kinds = self.kinds.clone().unwrap_or_else(|| vec![FileKind::Programming]);
        kinds.iter().flat_map(|k| k.extensions()).map(|e| e.to_string()).collect()
    }

    pub fn analyzed_kinds(&self) -> Vec<FileKind> {
        self.kinds.clone().unwrap_or_else(|| FileKind::ANALYZED.to_vec())
    }
}
