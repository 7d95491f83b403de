use serde::{Deserialize, Serialize};

use super::{ChurnCounts, ChurnStats, FileDiff, FileVersion, LineOp, PatchRevision, ReviewRecord, Side};

/// How the pre-review and post-review file sets are picked from a review.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    /// Pre = post side of the first revision, post = post side of the final
    /// revision.
    #[default]
    FirstVsLast,
    /// Both sides of the final revision's diffs.
    DiffSidesOfFinal,
}

impl SelectionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SelectionMode::FirstVsLast => "first_vs_last",
            SelectionMode::DiffSidesOfFinal => "diff_sides",
        }
    }
}

impl std::str::FromStr for SelectionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "first_vs_last" => Ok(SelectionMode::FirstVsLast),
            "diff_sides" | "diff_sides_of_final" => Ok(SelectionMode::DiffSidesOfFinal),
            other => Err(format!("unknown selection mode {other:?}")),
        }
    }
}

fn side_lines(diff: &FileDiff, side: Side) -> Vec<String> {
    let skip = match side {
        Side::Pre => LineOp::Added,
        Side::Post => LineOp::Removed,
    };
    diff.lines.iter().filter(|l| l.op != skip).map(|l| l.text.clone()).collect()
}

/// Splits a diff into the version before it (unchanged + removed lines) and
/// after it (unchanged + added lines), keeping diff order.
pub fn reconstruct_versions(diff: &FileDiff) -> (FileVersion, FileVersion) {
    let pre = FileVersion { path: diff.path.clone(), side: Side::Pre, lines: side_lines(diff, Side::Pre) };
    let post = FileVersion { path: diff.path.clone(), side: Side::Post, lines: side_lines(diff, Side::Post) };
    (pre, post)
}

pub fn compute_churn(diff: &FileDiff) -> ChurnStats {
    let mut counts = ChurnCounts::default();
    for line in &diff.lines {
        match line.op {
            LineOp::Added => counts.added += 1,
            LineOp::Removed => counts.removed += 1,
            LineOp::Unchanged => {}
        }
    }
    ChurnStats { path: diff.path.clone(), counts }
}

fn revision_side(rev: &PatchRevision, side: Side, relabel: Side) -> Vec<FileVersion> {
    rev.files.iter().map(|d| FileVersion { path: d.path.clone(), side: relabel, lines: side_lines(d, side) }).collect()
}

/// Picks the pre-review and post-review file versions of a review.
pub fn select_review_versions(
    record: &ReviewRecord,
    mode: SelectionMode,
) -> Result<(Vec<FileVersion>, Vec<FileVersion>), super::IngestError> {
    let (first, last) = match (record.revisions.first(), record.revisions.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(super::IngestError::NoRevisions(record.review_id.clone())),
    };
    Ok(match mode {
        SelectionMode::FirstVsLast => {
            (revision_side(first, Side::Post, Side::Pre), revision_side(last, Side::Post, Side::Post))
        }
        SelectionMode::DiffSidesOfFinal => {
            (revision_side(last, Side::Pre, Side::Pre), revision_side(last, Side::Post, Side::Post))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{DiffLine, ReviewStatus};
    use chrono::{TimeZone, Utc};
    use proptest::prelude::*;

    fn diff(lines: &[(LineOp, &str)]) -> FileDiff {
        FileDiff::new("f.py", lines.iter().map(|(op, t)| DiffLine::new(*op, *t)).collect())
    }

    #[test]
    fn reconstruct_mixed() {
        let d = diff(&[(LineOp::Unchanged, "x=1"), (LineOp::Removed, "y=2"), (LineOp::Added, "y=3")]);
        let (pre, post) = reconstruct_versions(&d);
        assert_eq!(pre.lines, ["x=1", "y=2"]);
        assert_eq!(post.lines, ["x=1", "y=3"]);
        assert_eq!(pre.side, Side::Pre);
        assert_eq!(post.side, Side::Post);
    }

    #[test]
    fn reconstruct_identity_and_pure_addition() {
        let d = diff(&[(LineOp::Unchanged, "a"), (LineOp::Unchanged, "b")]);
        let (pre, post) = reconstruct_versions(&d);
        assert_eq!(pre.lines, post.lines);

        let d = diff(&[(LineOp::Added, "a"), (LineOp::Added, "b")]);
        let (pre, post) = reconstruct_versions(&d);
        assert!(pre.lines.is_empty());
        assert_eq!(post.lines, ["a", "b"]);
    }

    #[test]
    fn churn_counts() {
        let d = diff(&[(LineOp::Added, "a"), (LineOp::Removed, "b"), (LineOp::Unchanged, "c")]);
        let c = compute_churn(&d);
        assert_eq!((c.added(), c.removed(), c.churn()), (1, 1, 2));

        let d = diff(&[(LineOp::Unchanged, "a"), (LineOp::Unchanged, "b")]);
        assert_eq!(compute_churn(&d).churn(), 0);

        let d = diff(&[(LineOp::Added, "a"); 5]);
        let c = compute_churn(&d);
        assert_eq!((c.added(), c.removed(), c.churn()), (5, 0, 5));
    }

    fn rev(n: u32, files: Vec<FileDiff>) -> PatchRevision {
        PatchRevision { revision_number: n, created: Utc.with_ymd_and_hms(2019, 1, n, 0, 0, 0).unwrap(), files }
    }

    #[test]
    fn selection_modes() {
        let r1 = diff(&[(LineOp::Added, "v1")]);
        let r2 = diff(&[(LineOp::Unchanged, "keep"), (LineOp::Removed, "old"), (LineOp::Added, "v2")]);
        let single = ReviewRecord::new("s", ReviewStatus::Accepted, vec![rev(1, vec![r1.clone()])]).unwrap();
        let (pre, post) = select_review_versions(&single, SelectionMode::FirstVsLast).unwrap();
        assert_eq!(pre[0].lines, post[0].lines);
        assert_eq!(pre[0].side, Side::Pre);

        let two = ReviewRecord::new("t", ReviewStatus::Accepted, vec![rev(1, vec![r1]), rev(2, vec![r2])]).unwrap();
        let (pre, post) = select_review_versions(&two, SelectionMode::FirstVsLast).unwrap();
        assert_eq!(pre[0].lines, ["v1"]);
        assert_eq!(post[0].lines, ["keep", "v2"]);

        let (pre, post) = select_review_versions(&two, SelectionMode::DiffSidesOfFinal).unwrap();
        assert_eq!(pre[0].lines, ["keep", "old"]);
        assert_eq!(post[0].lines, ["keep", "v2"]);
    }

    #[test]
    fn selection_rejects_empty_review() {
        let bogus = ReviewRecord { review_id: "x".into(), status: ReviewStatus::Accepted, revisions: vec![] };
        assert!(select_review_versions(&bogus, SelectionMode::FirstVsLast).is_err());
    }

    fn op_strategy() -> impl Strategy<Value = LineOp> {
        prop_oneof![Just(LineOp::Added), Just(LineOp::Removed), Just(LineOp::Unchanged)]
    }

    proptest! {
        #[test]
        fn sides_are_order_preserving_filters(lines in prop::collection::vec((op_strategy(), "[a-z]{0,4}"), 0..40)) {
            let d = FileDiff::new("p", lines.iter().map(|(op, t)| DiffLine::new(*op, t.clone())).collect());
            let (pre, post) = reconstruct_versions(&d);
            let want_pre: Vec<String> = lines.iter().filter(|(op, _)| *op != LineOp::Added).map(|(_, t)| t.clone()).collect();
            let want_post: Vec<String> = lines.iter().filter(|(op, _)| *op != LineOp::Removed).map(|(_, t)| t.clone()).collect();
            prop_assert_eq!(pre.lines, want_pre);
            prop_assert_eq!(post.lines, want_post);
            let edits = lines.iter().filter(|(op, _)| *op != LineOp::Unchanged).count() as u64;
            prop_assert_eq!(compute_churn(&d).churn(), edits);
        }
    }
}
