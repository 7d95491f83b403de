use serde::Serialize;

use super::corpus::{Corpus, Group};
use super::training::{score_targets, Aggregates, Target};
use super::{AnalysisError, ExperimentConfig};
use crate::ingest::{ReviewStatus, Side};
use crate::lexing::classify_file;
use crate::Scalar;

/// Aggregated entropy of one `(group, label, order)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyCell {
    /// Extension or file kind.
    pub group: String,
    /// Side or decision; `all` when the experiment has no split.
    pub label: String,
    pub order: usize,
    /// Token-weighted mean over files.
    pub bits_per_token: f64,
    /// Unweighted mean of per-file entropies.
    pub file_mean: f64,
    pub files: u64,
    pub tokens: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EntropyTable {
    pub cells: Vec<EntropyCell>,
    pub warnings: Vec<String>,
}

impl EntropyTable {
    pub fn get(&self, group: &str, label: &str, order: usize) -> Option<&EntropyCell> {
        self.cells.iter().find(|c| c.group == group && c.label == label && c.order == order)
    }

    /// `(order, bits_per_token)` points of one curve, by ascending order.
    pub fn curve(&self, group: &str, label: &str) -> Vec<(usize, f64)> {
        self.cells
            .iter()
            .filter(|c| c.group == group && c.label == label)
            .map(|c| (c.order, c.bits_per_token))
            .collect()
    }

    fn from_aggregates<F: Scalar>(agg: Aggregates<F>, warnings: Vec<String>) -> Self {
        let cells = agg
            .into_iter()
            .filter_map(|((group, label, order), acc)| {
                Some(EntropyCell {
                    group: group.label(),
                    label,
                    order,
                    bits_per_token: acc.token_weighted()?.as_f64(),
                    file_mean: acc.file_mean()?.as_f64(),
                    files: acc.files,
                    tokens: acc.tokens,
                })
            })
            .collect();
        EntropyTable { cells, warnings }
    }
}

/// Post-side streams of accepted reviews, pooled per file kind and scored
/// against the kind's model.
pub fn entropy_by_kind<F: Scalar>(
    corpus: &Corpus,
    config: &ExperimentConfig<F>,
) -> Result<EntropyTable, AnalysisError> {
    config.validate()?;
    let mut targets = Vec::new();
    let mut warnings = Vec::new();
    for kind in config.analyzed_kinds() {
        let before = targets.len();
        for (i, r) in corpus.reviews.iter().enumerate() {
            if r.status != ReviewStatus::Accepted {
                continue;
            }
            for s in r.post.iter().filter(|s| classify_file(&s.path) == kind) {
                targets.push(Target { review: i, group: Group::Kind(kind), label: "all".into(), stream: s });
            }
        }
        if targets.len() == before {
            log::warn!("no {kind} files; omitted");
            warnings.push(format!("no {kind} files"));
        }
    }
    let (agg, more) = score_targets(corpus, &targets, config)?;
    warnings.extend(more);
    Ok(EntropyTable::from_aggregates(agg, warnings))
}

/// Pre-review and post-review streams of every review, per extension,
/// scored against models of the other accepted reviews.
pub fn pre_vs_post_entropy<F: Scalar>(
    corpus: &Corpus,
    config: &ExperimentConfig<F>,
) -> Result<EntropyTable, AnalysisError> {
    config.validate()?;
    let exts = config.analyzed_extensions();
    let mut targets = Vec::new();
    for (i, r) in corpus.reviews.iter().enumerate() {
        for side in [Side::Pre, Side::Post] {
            for s in r.side(side) {
                let Some(ext) = s.extension().filter(|e| exts.contains(e)) else { continue };
                targets.push(Target {
                    review: i,
                    group: Group::Extension(ext),
                    label: side.as_str().into(),
                    stream: s,
                });
            }
        }
    }
    let (agg, warnings) = score_targets(corpus, &targets, config)?;
    Ok(EntropyTable::from_aggregates(agg, warnings))
}

/// Final post-side streams per extension, split by review decision.
pub fn accepted_vs_abandoned<F: Scalar>(
    corpus: &Corpus,
    config: &ExperimentConfig<F>,
) -> Result<EntropyTable, AnalysisError> {
    config.validate()?;
    let exts = config.analyzed_extensions();
    let mut targets = Vec::new();
    for (i, r) in corpus.reviews.iter().enumerate() {
        for s in &r.post {
            let Some(ext) = s.extension().filter(|e| exts.contains(e)) else { continue };
            targets.push(Target {
                review: i,
                group: Group::Extension(ext),
                label: r.status.as_str().into(),
                stream: s,
            });
        }
    }
    let (agg, mut warnings) = score_targets(corpus, &targets, config)?;
    let table = EntropyTable::from_aggregates(agg, Vec::new());
    for status in [ReviewStatus::Accepted, ReviewStatus::Abandoned] {
        if !table.cells.iter().any(|c| c.label == status.as_str()) {
            log::warn!("no scored {status} reviews; curve omitted");
            warnings.push(format!("no scored {status} reviews"));
        }
    }
    Ok(EntropyTable { warnings, ..table })
}
