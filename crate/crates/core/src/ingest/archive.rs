//! Line-delimited JSON review archive: one review per line.

use std::io::{BufRead, Write};

use chrono::{DateTime, Utc};
use serde::Deserialize;

use super::{DiffLine, FileDiff, IngestError, LineOp, PatchRevision, RecordError, ReviewRecord, ReviewStatus};

/// What to do with a record that fails validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MalformedPolicy {
    /// Log the record error and continue with the next record.
    #[default]
    Skip,
    /// Stop at the first malformed record.
    FailFast,
}

/// Outcome of reading an archive.
#[derive(Debug, Default)]
pub struct ArchiveParse {
    pub records: Vec<ReviewRecord>,
    pub skipped: Vec<RecordError>,
}

// Raw shapes accept any status string so an unknown value is reported as a
// record error rather than a generic decode failure.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    review_id: String,
    status: String,
    revisions: Vec<RawRevision>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRevision {
    revision_number: i64,
    created: DateTime<Utc>,
    files: Vec<RawFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    path: String,
    lines: Vec<RawLine>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLine {
    op: String,
    text: String,
}

fn convert(raw: RawRecord) -> Result<ReviewRecord, String> {
    let status = ReviewStatus::parse(&raw.status).ok_or_else(|| format!("unknown status {:?}", raw.status))?;
    let mut revisions = Vec::with_capacity(raw.revisions.len());
    for rev in raw.revisions {
        let revision_number = u32::try_from(rev.revision_number)
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| format!("invalid revision_number {}", rev.revision_number))?;
        let mut files = Vec::with_capacity(rev.files.len());
        for file in rev.files {
            let lines = file
                .lines
                .into_iter()
                .map(|l| {
                    let op = match l.op.as_str() {
                        "added" => LineOp::Added,
                        "removed" => LineOp::Removed,
                        "unchanged" => LineOp::Unchanged,
                        other => return Err(format!("unknown line op {other:?}")),
                    };
                    Ok(DiffLine { op, text: l.text })
                })
                .collect::<Result<Vec<_>, String>>()?;
            files.push(FileDiff { path: file.path, lines });
        }
        revisions.push(PatchRevision { revision_number, created: rev.created, files });
    }
    ReviewRecord::new(raw.review_id, status, revisions)
}

fn parse_line(line: &str) -> Result<ReviewRecord, String> {
    let raw: RawRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    convert(raw)
}

/// Reads every record of a line-delimited archive, preserving input order.
///
/// Blank lines are ignored and do not count towards record indices.
pub fn parse_review_archive<R: BufRead>(source: R, policy: MalformedPolicy) -> Result<ArchiveParse, IngestError> {
    let mut out = ArchiveParse::default();
    let mut index = 0usize;
    for line in source.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(&line) {
            Ok(record) => out.records.push(record),
            Err(reason) => {
                let err = RecordError { index, reason };
                match policy {
                    MalformedPolicy::FailFast => return Err(err.into()),
                    MalformedPolicy::Skip => {
                        log::warn!("skipping malformed record: {err}");
                        out.skipped.push(err);
                    }
                }
            }
        }
        index += 1;
    }
    Ok(out)
}

/// Writes records in archive format, one JSON object per line.
pub fn write_review_archive<W: Write>(mut sink: W, records: &[ReviewRecord]) -> std::io::Result<()> {
    for record in records {
        serde_json::to_writer(&mut sink, record)?;
        sink.write_all(b"\n")?;
    }
    Ok(())
}
