//! Experiment dispatch and tabular/JSON report assembly.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::{
    accepted_vs_abandoned, churn_by_kind, entropy_by_kind, pre_vs_post_entropy, syntax_proportions, top_changed_tokens,
    AnalysisError, Corpus, EntropyTable, ExperimentConfig,
};
use crate::ingest::{reconstruct_versions, ReviewRecord, ReviewStatus};
use crate::lexing::{TokenSets, TokenStream};
use crate::lm::{corpus_stats, CorpusRow};
use crate::Scalar;

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    /// Churn proportions by file kind with a Kruskal-Wallis test.
    Pq1,
    /// Entropy curves by file kind.
    Pq2,
    /// Pre-review against post-review entropy.
    Rq1,
    /// Accepted against abandoned entropy.
    Rq2,
    /// Corpus size per extension.
    Table1,
    /// Syntax-class proportions.
    Table3,
    /// Top changed syntax tokens.
    Table4,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Pq1,
        Experiment::Pq2,
        Experiment::Rq1,
        Experiment::Rq2,
        Experiment::Table1,
        Experiment::Table3,
        Experiment::Table4,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Pq1 => "pq1",
            Experiment::Pq2 => "pq2",
            Experiment::Rq1 => "rq1",
            Experiment::Rq2 => "rq2",
            Experiment::Table1 => "table1",
            Experiment::Table3 => "table3",
            Experiment::Table4 => "table4",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL.into_iter().find(|e| e.as_str() == s).ok_or_else(|| format!("unknown experiment {s:?}"))
    }
}

/// Rows of strings under a header; written as CSV.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, sink: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV of UTF-8 fields is UTF-8")
    }
}

/// Output of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub experiment: Experiment,
    pub table: Table,
    /// Full nested results including configuration and schema version.
    pub json: Value,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.json).expect("report values serialize");
        s.push('\n');
        s
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn entropy_table(t: &EntropyTable, group: &str, label: Option<&str>) -> Table {
    let mut cols = vec![group];
    cols.extend(label);
    cols.extend(["order", "bits_per_token", "file_mean", "files", "tokens"]);
    let mut table = Table::new(&cols);
    for c in &t.cells {
        let mut row = vec![c.group.clone()];
        if label.is_some() {
            row.push(c.label.clone());
        }
        row.extend([
            c.order.to_string(),
            num(c.bits_per_token),
            num(c.file_mean),
            c.files.to_string(),
            c.tokens.to_string(),
        ]);
        table.push(row);
    }
    table
}

fn config_json<F: Scalar>(config: &ExperimentConfig<F>, k: usize) -> Value {
    json!({
        "orders": [config.orders.start(), config.orders.end()],
        "smoothing": config.smoothing.to_string(),
        "min_count": config.min_count,
        "mode": config.mode.as_str(),
        "train_policy": config.policy.as_str(),
        "extensions": config.analyzed_extensions(),
        "kinds": config.analyzed_kinds().iter().map(|k| k.as_str()).collect::<Vec<_>>(),
        "k": k,
    })
}

/// Per-extension corpus size over the post side of every file of every
/// revision.
pub fn corpus_table(records: &[ReviewRecord], sets: &TokenSets) -> BTreeMap<String, CorpusRow> {
    let streams: Vec<((&str, u32), TokenStream)> = records
        .par_iter()
        .flat_map_iter(|r| {
            r.revisions.iter().flat_map(move |rev| {
                rev.files.iter().map(move |d| {
                    let (_, post) = reconstruct_versions(d);
                    (
                        (r.review_id.as_str(), rev.revision_number),
                        TokenStream::lex(&post.path, post.side, &post.text(), sets),
                    )
                })
            })
        })
        .collect();
    corpus_stats(streams.iter().map(|(k, s)| (*k, s)))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

/// Runs one experiment over an archive. `k` only matters for the
/// top-changed-tokens table.
pub fn run_experiment<F: Scalar>(
    experiment: Experiment,
    records: &[ReviewRecord],
    config: &ExperimentConfig<F>,
    sets: &TokenSets,
    k: usize,
) -> Result<Report, AnalysisError> {
    config.validate()?;
    let corpus = || Corpus::prepare(records, config.mode, sets);
    let mut warnings = Vec::new();
    let (table, results) = match experiment {
        Experiment::Pq1 => {
            let rep = churn_by_kind(records)?;
            let mut t = Table::new(&["review_id", "kind", "proportion"]);
            for row in &rep.rows {
                for kind in crate::lexing::FileKind::ANALYZED {
                    t.push(vec![row.review_id.clone(), kind.to_string(), num(row.proportion(kind).unwrap_or(0.0))]);
                }
            }
            (t, to_value(&rep))
        }
        Experiment::Pq2 => {
            let rep = entropy_by_kind(&corpus()?, config)?;
            warnings.extend(rep.warnings.iter().cloned());
            (entropy_table(&rep, "kind", None), to_value(&rep.cells))
        }
        Experiment::Rq1 => {
            let rep = pre_vs_post_entropy(&corpus()?, config)?;
            warnings.extend(rep.warnings.iter().cloned());
            (entropy_table(&rep, "extension", Some("side")), to_value(&rep.cells))
        }
        Experiment::Rq2 => {
            let present = |s: ReviewStatus| records.iter().any(|r| r.status == s);
            if !present(ReviewStatus::Accepted) || !present(ReviewStatus::Abandoned) {
                return Err(AnalysisError::Precondition(
                    "accepted-vs-abandoned needs both accepted and abandoned reviews".into(),
                ));
            }
            let rep = accepted_vs_abandoned(&corpus()?, config)?;
            warnings.extend(rep.warnings.iter().cloned());
            (entropy_table(&rep, "extension", Some("decision")), to_value(&rep.cells))
        }
        Experiment::Table1 => {
            let stats = corpus_table(records, sets);
            let mut t = Table::new(&["extension", "revisions", "files", "unique_tokens", "tokens"]);
            for (ext, row) in &stats {
                t.push(vec![
                    ext.clone(),
                    row.revisions.to_string(),
                    row.files.to_string(),
                    row.unique_tokens.to_string(),
                    row.tokens.to_string(),
                ]);
            }
            (t, to_value(&stats))
        }
        Experiment::Table3 => {
            let rep = syntax_proportions(&corpus()?, config, sets)?;
            let mut t = Table::new(&["extension", "side", "class", "count", "total", "percent"]);
            for c in &rep.cells {
                t.push(vec![
                    c.extension.clone(),
                    c.side.to_string(),
                    c.class.to_string(),
                    c.count.to_string(),
                    c.total.to_string(),
                    c.percent.map(num).unwrap_or_default(),
                ]);
            }
            (t, to_value(&rep.cells))
        }
        Experiment::Table4 => {
            let rep = top_changed_tokens(&corpus()?, config, k)?;
            let mut t =
                Table::new(&["extension", "direction", "class", "rank", "token", "count", "percent", "stability"]);
            for r in &rep.rows {
                t.push(vec![
                    r.extension.clone(),
                    r.direction.clone(),
                    r.class.to_string(),
                    r.rank.to_string(),
                    r.token.clone(),
                    r.count.to_string(),
                    num(r.percent),
                    to_value(&r.stability).as_str().unwrap_or_default().to_string(),
                ]);
            }
            (t, to_value(&rep.rows))
        }
    };
    let json = json!({
        "schema_version": SCHEMA_VERSION,
        "experiment": experiment.as_str(),
        "config": config_json(config, k),
        "warnings": warnings,
        "results": results,
    });
    Ok(Report { experiment, table, json, warnings })
}
