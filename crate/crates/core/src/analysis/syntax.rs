use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::corpus::Corpus;
use super::{AnalysisError, ExperimentConfig};
use crate::ingest::Side;
use crate::lexing::{Language, TokenClass, TokenSets, TokenStream};
use crate::Scalar;

/// Share of one token class among an extension's tokens on one side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntaxCell {
    pub extension: String,
    pub side: Side,
    pub class: TokenClass,
    pub count: u64,
    pub total: u64,
    /// Absent when the extension has no tokens on this side.
    pub percent: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SyntaxTable {
    pub cells: Vec<SyntaxCell>,
}

impl SyntaxTable {
    pub fn get(&self, extension: &str, side: Side, class: TokenClass) -> Option<&SyntaxCell> {
        self.cells.iter().find(|c| c.extension == extension && c.side == side && c.class == class)
    }
}

/// Languages whose token tables define no separators (shell) report no
/// separator column.
fn reported_classes(extension: &str, sets: &TokenSets) -> Vec<TokenClass> {
    let language = Language::for_path(&format!("f{extension}"));
    let drop_separators = language != Language::Generic && !sets.for_language(language).has_separators();
    TokenClass::ALL.into_iter().filter(|c| !(drop_separators && *c == TokenClass::Separator)).collect()
}

fn streams_by_ext<'a, F: Scalar>(
    corpus: &'a Corpus,
    config: &ExperimentConfig<F>,
    side: Side,
) -> BTreeMap<String, Vec<&'a TokenStream>> {
    let exts = config.analyzed_extensions();
    let mut out: BTreeMap<String, Vec<&TokenStream>> = BTreeMap::new();
    for r in &corpus.reviews {
        for s in r.side(side) {
            if let Some(ext) = s.extension().filter(|e| exts.contains(e)) {
                out.entry(ext).or_default().push(s);
            }
        }
    }
    out
}

/// Percent of tokens in each class per extension and side.
pub fn syntax_proportions<F: Scalar>(
    corpus: &Corpus,
    config: &ExperimentConfig<F>,
    sets: &TokenSets,
) -> Result<SyntaxTable, AnalysisError> {
    let mut cells = Vec::new();
    for side in [Side::Pre, Side::Post] {
        for (ext, streams) in streams_by_ext(corpus, config, side) {
            let mut counts: HashMap<TokenClass, u64> = HashMap::new();
            for s in &streams {
                for t in &s.tokens {
                    *counts.entry(t.class).or_default() += 1;
                }
            }
            let total: u64 = counts.values().sum();
            for class in reported_classes(&ext, sets) {
                let count = counts.get(&class).copied().unwrap_or(0);
                let percent = (total > 0).then(|| 100.0 * count as f64 / total as f64);
                cells.push(SyntaxCell { extension: ext.clone(), side, class, count, total, percent });
            }
        }
    }
    cells.sort_by(|a, b| (&a.extension, a.side, a.class).cmp(&(&b.extension, b.side, b.class)));
    Ok(SyntaxTable { cells })
}

/// Whether a top token was both added and removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Changed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChangedToken {
    pub extension: String,
    /// `added` or `removed`.
    pub direction: String,
    pub class: TokenClass,
    pub rank: usize,
    pub token: String,
    pub count: u64,
    /// Share of all tokens changed in this direction for the extension.
    pub percent: f64,
    pub stability: Stability,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TopChangedTable {
    pub k: usize,
    pub rows: Vec<ChangedToken>,
}

type Multiset = HashMap<(TokenClass, String), u64>;

fn multiset<'a>(streams: impl Iterator<Item = &'a TokenStream>) -> Multiset {
    let mut m = Multiset::new();
    for s in streams {
        for t in &s.tokens {
            *m.entry((t.class, t.text.clone())).or_default() += 1;
        }
    }
    m
}

/// `a - b` as multisets, accumulated into `into`.
fn subtract_into(a: &Multiset, b: &Multiset, into: &mut Multiset) {
    for (key, c) in a {
        let rest = c.saturating_sub(b.get(key).copied().unwrap_or(0));
        if rest > 0 {
            *into.entry(key.clone()).or_default() += rest;
        }
    }
}

/// Most frequent added and removed syntax tokens per extension and class.
///
/// Per review and file, the added tokens are the post-side tokens left after
/// taking away the pre-side tokens (as multisets), and vice versa for the
/// removed ones. Ranking is by count, ties broken by token text.
pub fn top_changed_tokens<F: Scalar>(
    corpus: &Corpus,
    config: &ExperimentConfig<F>,
    k: usize,
) -> Result<TopChangedTable, AnalysisError> {
    if k < 1 {
        return Err(AnalysisError::InvalidConfig("k must be at least 1".into()));
    }
    let exts = config.analyzed_extensions();
    let mut added: BTreeMap<String, Multiset> = BTreeMap::new();
    let mut removed: BTreeMap<String, Multiset> = BTreeMap::new();
    for r in &corpus.reviews {
        let mut paths: BTreeMap<&str, (Vec<&TokenStream>, Vec<&TokenStream>)> = BTreeMap::new();
        for s in &r.pre {
            paths.entry(&s.path).or_default().0.push(s);
        }
        for s in &r.post {
            paths.entry(&s.path).or_default().1.push(s);
        }
        for (path, (pre, post)) in paths {
            let Some(ext) = crate::lexing::extension_of(path).filter(|e| exts.contains(e)) else { continue };
            let pre = multiset(pre.into_iter());
            let post = multiset(post.into_iter());
            subtract_into(&post, &pre, added.entry(ext.clone()).or_default());
            subtract_into(&pre, &post, removed.entry(ext).or_default());
        }
    }

    let rank = |m: &Multiset, class: TokenClass| -> Vec<(String, u64)> {
        let mut v: Vec<(String, u64)> =
            m.iter().filter(|((c, _), _)| *c == class).map(|((_, t), n)| (t.clone(), *n)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        v.truncate(k);
        v
    };
    let mut rows = Vec::new();
    let empty = Multiset::new();
    let exts_seen: Vec<String> =
        added.keys().chain(removed.keys()).cloned().collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    for ext in exts_seen {
        let add = added.get(&ext).unwrap_or(&empty);
        let rem = removed.get(&ext).unwrap_or(&empty);
        for class in TokenClass::SYNTAX {
            let top_add = rank(add, class);
            let top_rem = rank(rem, class);
            for (direction, top, other, side_total) in [
                ("added", &top_add, &top_rem, add.values().sum::<u64>()),
                ("removed", &top_rem, &top_add, rem.values().sum::<u64>()),
            ] {
                for (i, (token, count)) in top.iter().enumerate() {
                    let stable = other.iter().any(|(t, _)| t == token);
                    rows.push(ChangedToken {
                        extension: ext.clone(),
                        direction: direction.to_string(),
                        class,
                        rank: i + 1,
                        token: token.clone(),
                        count: *count,
                        percent: 100.0 * *count as f64 / side_total as f64,
                        stability: if stable { Stability::Stable } else { Stability::Changed },
                    });
                }
            }
        }
    }
    Ok(TopChangedTable { k, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::PreparedReview;
    use crate::ingest::ReviewStatus;
    use chrono::{TimeZone, Utc};

    fn corpus(files: &[(&str, &str, &str)]) -> Corpus {
        let sets = TokenSets::builtin();
        let review = PreparedReview {
            review_id: "r".into(),
            status: ReviewStatus::Accepted,
            created: Utc.timestamp_opt(0, 0).unwrap(),
            fingerprint: crate::analysis::fingerprint("r"),
            pre: files.iter().map(|(p, a, _)| TokenStream::lex(p, Side::Pre, a, sets)).collect(),
            post: files.iter().map(|(p, _, b)| TokenStream::lex(p, Side::Post, b, sets)).collect(),
        };
        Corpus { reviews: vec![review] }
    }

    #[test]
    fn python_def_line() {
        let c = corpus(&[("m.py", "def f():", "def f():")]);
        let t = syntax_proportions(&c, &ExperimentConfig::<f64>::default(), TokenSets::builtin()).unwrap();
        let pct = |class| t.get(".py", Side::Post, class).unwrap().percent.unwrap();
        assert!((pct(TokenClass::Keyword) - 20.0).abs() < 1e-9);
        assert!((pct(TokenClass::Separator) - 60.0).abs() < 1e-9);
        assert!((pct(TokenClass::Identifier) - 20.0).abs() < 1e-9);
        let sum: f64 = TokenClass::ALL.iter().map(|c| pct(*c)).sum();
        assert!((sum - 100.0).abs() < 1e-9);
    }

    #[test]
    fn shell_has_no_separator_column_and_empty_is_absent() {
        let c = corpus(&[("run.sh", "", "echo $HOME | grep x")]);
        let t = syntax_proportions(&c, &ExperimentConfig::<f64>::default(), TokenSets::builtin()).unwrap();
        assert!(t.get(".sh", Side::Post, TokenClass::Separator).is_none());
        assert!(t.get(".sh", Side::Post, TokenClass::Operator).unwrap().percent.unwrap() > 0.0);
        assert_eq!(t.get(".sh", Side::Pre, TokenClass::Keyword).unwrap().percent, None);
        let empty = Corpus { reviews: vec![] };
        assert!(syntax_proportions(&empty, &ExperimentConfig::<f64>::default(), TokenSets::builtin())
            .unwrap()
            .cells
            .is_empty());
    }

    #[test]
    fn added_only_token_is_changed() {
        let c = corpus(&[("m.py", "x = a.b\n", "x = a.b + c.d\n")]);
        let t = top_changed_tokens(&c, &ExperimentConfig::<f64>::default(), 3).unwrap();
        let plus = t.rows.iter().find(|r| r.token == "+").unwrap();
        assert_eq!(plus.direction, "added");
        assert_eq!(plus.stability, Stability::Changed);
        assert!(t.rows.iter().all(|r| r.direction == "added"));
    }

    #[test]
    fn stable_tokens_and_ranking() {
        let c = corpus(&[("a.py", "x.y.z = 1\n", "p = q\n"), ("b.py", "", "r.s = t.u\n")]);
        let t = top_changed_tokens(&c, &ExperimentConfig::<f64>::default(), 10).unwrap();
        let dot_added = t.rows.iter().find(|r| r.token == "." && r.direction == "added").unwrap();
        let dot_removed = t.rows.iter().find(|r| r.token == "." && r.direction == "removed").unwrap();
        assert_eq!(dot_added.stability, Stability::Stable);
        assert_eq!(dot_removed.stability, Stability::Stable);
        assert_eq!(dot_added.count, 2);
        // "=" appears on both sides of a.py and is added once by b.py
        let eq = t.rows.iter().find(|r| r.token == "=" && r.direction == "added").unwrap();
        assert_eq!(eq.count, 1);
        for w in t.rows.windows(2) {
            if (w[0].extension.as_str(), w[0].direction.as_str(), w[0].class)
                == (w[1].extension.as_str(), w[1].direction.as_str(), w[1].class)
            {
                assert!(w[0].percent >= w[1].percent);
                assert_eq!(w[0].rank + 1, w[1].rank);
            }
        }
        assert!(top_changed_tokens(&c, &ExperimentConfig::<f64>::default(), 0).is_err());
    }
}
