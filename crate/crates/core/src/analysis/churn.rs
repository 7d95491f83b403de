use std::collections::BTreeMap;

use serde::Serialize;

use super::kruskal::{kruskal_wallis, GroupTestResult};
use super::AnalysisError;
use crate::ingest::{compute_churn, ReviewRecord};
use crate::lexing::{classify_file, FileKind};

/// Share of a review's churned lines (added + removed, over all revisions)
/// falling in each analyzed kind.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChurnRow {
    pub review_id: String,
    pub programming: f64,
    pub configuration: f64,
    pub documentation: f64,
    /// Churned lines in files of kind "other", kept out of the proportions.
    pub other_lines: u64,
    /// Churned lines in the analyzed kinds.
    pub analyzed_lines: u64,
}

impl ChurnRow {
    pub fn proportion(&self, kind: FileKind) -> Option<f64> {
        match kind {
            FileKind::Programming => Some(self.programming),
            FileKind::Configuration => Some(self.configuration),
            FileKind::Documentation => Some(self.documentation),
            FileKind::Other => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChurnReport {
    pub rows: Vec<ChurnRow>,
    /// Mean proportion per kind over `rows`.
    pub means: BTreeMap<FileKind, f64>,
    /// Kinds compared by the test: those with churn in some review.
    pub tested_kinds: Vec<FileKind>,
    pub test: GroupTestResult,
    /// Reviews without churn in the analyzed kinds.
    pub excluded: Vec<String>,
}

pub fn churn_by_kind(records: &[ReviewRecord]) -> Result<ChurnReport, AnalysisError> {
    if records.is_empty() {
        return Err(AnalysisError::Precondition("no reviews to analyze".into()));
    }
    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    for record in records {
        let mut lines: BTreeMap<FileKind, u64> = BTreeMap::new();
        for rev in &record.revisions {
            for diff in &rev.files {
                *lines.entry(classify_file(&diff.path)).or_default() += compute_churn(diff).churn();
            }
        }
        let get = |k: FileKind| lines.get(&k).copied().unwrap_or(0);
        let analyzed: u64 = FileKind::ANALYZED.iter().map(|k| get(*k)).sum();
        if analyzed == 0 {
            log::info!("review {} has no churn in analyzed kinds", record.review_id);
            excluded.push(record.review_id.clone());
            continue;
        }
        let share = |k: FileKind| get(k) as f64 / analyzed as f64;
        rows.push(ChurnRow {
            review_id: record.review_id.clone(),
            programming: share(FileKind::Programming),
            configuration: share(FileKind::Configuration),
            documentation: share(FileKind::Documentation),
            other_lines: get(FileKind::Other),
            analyzed_lines: analyzed,
        });
    }
    let tested_kinds: Vec<FileKind> =
        FileKind::ANALYZED.into_iter().filter(|k| rows.iter().any(|r| r.proportion(*k).unwrap_or(0.0) > 0.0)).collect();
    if tested_kinds.len() < 2 {
        return Err(AnalysisError::Precondition(format!(
            "churn comparison needs at least 2 file kinds with changes, found {}",
            tested_kinds.len()
        )));
    }
    let groups: Vec<Vec<f64>> =
        tested_kinds.iter().map(|k| rows.iter().filter_map(|r| r.proportion(*k)).collect()).collect();
    let test = kruskal_wallis(&groups)?;
    let means = FileKind::ANALYZED
        .into_iter()
        .map(|k| (k, rows.iter().filter_map(|r| r.proportion(k)).sum::<f64>() / rows.len() as f64))
        .collect();
    Ok(ChurnReport { rows, means, tested_kinds, test, excluded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{DiffLine, FileDiff, LineOp, PatchRevision, ReviewStatus};
    use chrono::{TimeZone, Utc};

    fn review(id: &str, files: &[(&str, usize, usize)]) -> ReviewRecord {
        let diffs = files
            .iter()
            .map(|(p, add, rem)| {
                let mut lines = vec![DiffLine::new(LineOp::Unchanged, "ctx")];
                lines.extend((0..*add).map(|i| DiffLine::new(LineOp::Added, format!("+{i}"))));
                lines.extend((0..*rem).map(|i| DiffLine::new(LineOp::Removed, format!("-{i}"))));
                FileDiff::new(*p, lines)
            })
            .collect();
        let rev = PatchRevision { revision_number: 1, created: Utc.timestamp_opt(0, 0).unwrap(), files: diffs };
        ReviewRecord::new(id, ReviewStatus::Accepted, vec![rev]).unwrap()
    }

    #[test]
    fn single_python_file_is_all_programming() {
        let r = review("a", &[("x.py", 3, 1)]);
        let err = churn_by_kind(std::slice::from_ref(&r)).unwrap_err();
        assert!(matches!(err, AnalysisError::Precondition(_)));
        let with_doc = review("b", &[("x.py", 2, 0), ("README.rst", 1, 1), ("logo.png", 5, 0)]);
        let rep = churn_by_kind(&[r, with_doc]).unwrap();
        assert_eq!(rep.rows[0].programming, 1.0);
        assert_eq!(rep.rows[0].configuration, 0.0);
        assert_eq!(rep.rows[1].programming, 0.5);
        assert_eq!(rep.rows[1].documentation, 0.5);
        assert_eq!(rep.rows[1].other_lines, 5);
        assert_eq!(rep.tested_kinds, [FileKind::Programming, FileKind::Documentation]);
        assert_eq!(rep.means[&FileKind::Programming], 0.75);
    }

    #[test]
    fn zero_churn_review_excluded() {
        let rep = churn_by_kind(&[
            review("a", &[("x.py", 1, 0)]),
            review("b", &[("y.yaml", 1, 0)]),
            review("c", &[("x.py", 0, 0)]),
        ])
        .unwrap();
        assert_eq!(rep.excluded, ["c"]);
        for row in &rep.rows {
            let sum = row.programming + row.configuration + row.documentation;
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }
}
