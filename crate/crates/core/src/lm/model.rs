//! Smoothed conditional distributions over `vocabulary ∪ {</s>}`.
//!
//! Three estimators are supported:
//!
//! - maximum likelihood: `c(h w) / c(h)`, undefined for unseen histories;
//! - additive: `(c(h w) + δ) / (c(h) + δ (|V| + 1))`;
//! - interpolated modified Kneser-Ney. The highest order uses raw counts,
//!   lower orders use continuation counts `N1+(• h w)`, each order subtracts
//!   one of three discounts (for counts 1, 2 and ≥3) and gives the freed mass
//!   to the next lower order. Below unigrams sits the uniform distribution.
//!   Discounts come from the count-of-counts `n1..n4` of each order:
//!   `Y = n1 / (n1 + 2 n2)`, `D1 = 1 - 2Y n2/n1`, `D2 = 2 - 3Y n3/n2`,
//!   `D3+ = 3 - 4Y n4/n3`; when a count-of-count is zero or a discount falls
//!   outside `(0, k]`, all three discounts of that order are 0.5.

// `!(x > 0)` is used on purpose below: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::HashMap;
use std::fmt;

use super::counts::{NGramCounts, Sym, BOS_ID, EOS_ID};
use super::{LmError, BOS, EOS, UNK};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoothing<F> {
    Mle,
    Additive(F),
    ModifiedKneserNey,
}

impl<F: Scalar> Smoothing<F> {
    pub fn is_smoothed(&self) -> bool {
        !matches!(self, Smoothing::Mle)
    }
}

impl<F: Scalar> fmt::Display for Smoothing<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Smoothing::Mle => f.write_str("mle"),
            Smoothing::Additive(d) => write!(f, "additive={d}"),
            Smoothing::ModifiedKneserNey => f.write_str("mkn"),
        }
    }
}

impl<F: Scalar> std::str::FromStr for Smoothing<F> {
    type Err = LmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mle" => Ok(Smoothing::Mle),
            "mkn" | "kn" | "modified_kneser_ney" => Ok(Smoothing::ModifiedKneserNey),
            other => {
                let delta = other
                    .strip_prefix("additive=")
                    .and_then(|d| F::from_str_radix(d, 10).ok())
                    .ok_or_else(|| LmError::InvalidSmoothing(other.to_string()))?;
                if !(delta > F::zero()) || !delta.is_finite() {
                    return Err(LmError::InvalidDelta(delta.as_f64()));
                }
                Ok(Smoothing::Additive(delta))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct History {
    total: u64,
    n1: u64,
    n2: u64,
    n3: u64,
}

#[derive(Debug, Clone)]
struct Level<F> {
    grams: HashMap<Vec<Sym>, u64>,
    histories: HashMap<Vec<Sym>, History>,
    discounts: [F; 3],
}

impl<F: Scalar> Level<F> {
    fn new(grams: HashMap<Vec<Sym>, u64>, estimate_discounts: bool) -> Self {
        let mut histories: HashMap<Vec<Sym>, History> = HashMap::new();
        for (g, c) in &grams {
            let key = &g[..g.len() - 1];
            if !histories.contains_key(key) {
                histories.insert(key.to_vec(), History::default());
            }
            let h = histories.get_mut(key).expect("inserted above");
            h.total += c;
            match c {
                1 => h.n1 += 1,
                2 => h.n2 += 1,
                _ => h.n3 += 1,
            }
        }
        let discounts = if estimate_discounts { estimate(&grams) } else { [F::zero(); 3] };
        Level { grams, histories, discounts }
    }

    fn discount(&self, c: u64) -> F {
        match c {
            0 => F::zero(),
            1 => self.discounts[0],
            2 => self.discounts[1],
            _ => self.discounts[2],
        }
    }
}

fn estimate<F: Scalar>(grams: &HashMap<Vec<Sym>, u64>) -> [F; 3] {
    let mut n = [0u64; 5];
    for c in grams.values() {
        if (1..=4).contains(c) {
            n[*c as usize] += 1;
        }
    }
    let fallback = [F::lit(0.5); 3];
    if n[1..=4].contains(&0) {
        return fallback;
    }
    let [n1, n2, n3, n4] = [n[1], n[2], n[3], n[4]].map(F::from_count);
    let y = n1 / (n1 + F::lit(2.0) * n2);
    let d = [
        F::one() - F::lit(2.0) * y * n2 / n1,
        F::lit(2.0) - F::lit(3.0) * y * n3 / n2,
        F::lit(3.0) - F::lit(4.0) * y * n4 / n3,
    ];
    let valid = d.iter().enumerate().all(|(i, v)| *v > F::zero() && *v <= F::from_count(i as u64 + 1));
    if valid {
        d
    } else {
        fallback
    }
}

/// A trained n-gram model. Immutable once built.
#[derive(Debug, Clone)]
pub struct NGramModel<F: Scalar> {
    counts: NGramCounts,
    smoothing: Smoothing<F>,
    /// `levels[k - 1]` scores with histories of length k - 1. Only the top
    /// level is populated for MLE and additive smoothing.
    levels: Vec<Level<F>>,
    unk: Option<Sym>,
}

fn without_bos_targets(table: &HashMap<Vec<Sym>, u64>) -> HashMap<Vec<Sym>, u64> {
    table.iter().filter(|(g, _)| *g.last().unwrap() != BOS_ID).map(|(g, c)| (g.clone(), *c)).collect()
}

impl<F: Scalar> NGramModel<F> {
    pub fn train(counts: NGramCounts, smoothing: Smoothing<F>) -> Result<Self, LmError> {
        if let Smoothing::Additive(d) = smoothing {
            if !(d > F::zero()) || !d.is_finite() {
                return Err(LmError::InvalidDelta(d.as_f64()));
            }
        }
        if counts.is_empty() {
            return Err(LmError::EmptyCounts);
        }
        let n = counts.order();
        let top = without_bos_targets(&counts.grams[n - 1]);
        let levels = match smoothing {
            Smoothing::Mle | Smoothing::Additive(_) => {
                let mut levels: Vec<Level<F>> = (1..n)
                    .map(|_| Level { grams: HashMap::new(), histories: HashMap::new(), discounts: [F::zero(); 3] })
                    .collect();
                levels.push(Level::new(top, false));
                levels
            }
            Smoothing::ModifiedKneserNey => {
                let mut levels = Vec::with_capacity(n);
                for k in 1..n {
                    let mut cont: HashMap<Vec<Sym>, u64> = HashMap::new();
                    for g in counts.grams[k].keys() {
                        if *g.last().unwrap() == BOS_ID {
                            continue;
                        }
                        match cont.get_mut(&g[1..]) {
                            Some(c) => *c += 1,
                            None => {
                                cont.insert(g[1..].to_vec(), 1);
                            }
                        }
                    }
                    levels.push(Level::new(cont, true));
                }
                levels.push(Level::new(top, true));
                levels
            }
        };
        let unk = counts.symbols.get(UNK).filter(|id| counts.vocabulary.contains(id));
        Ok(NGramModel { counts, smoothing, levels, unk })
    }

    pub fn order(&self) -> usize {
        self.counts.order()
    }

    pub fn smoothing(&self) -> Smoothing<F> {
        self.smoothing
    }

    pub fn counts(&self) -> &NGramCounts {
        &self.counts
    }

    /// |V|, the vocabulary size without the end marker.
    pub fn vocabulary_size(&self) -> usize {
        self.counts.vocabulary_size()
    }

    /// Discounts (D1, D2, D3+) of order `k` under modified Kneser-Ney.
    pub fn discounts(&self, k: usize) -> Option<[F; 3]> {
        match self.smoothing {
            Smoothing::ModifiedKneserNey if (1..=self.order()).contains(&k) => Some(self.levels[k - 1].discounts),
            _ => None,
        }
    }

    /// Maps a predicted token into the model vocabulary.
    fn target_id(&self, token: &str) -> Result<Sym, LmError> {
        if token == EOS {
            return Ok(EOS_ID);
        }
        if token == BOS {
            return Err(LmError::OutOfVocabulary(token.to_string()));
        }
        match self.counts.symbols.get(token) {
            Some(id) if self.counts.vocabulary.contains(&id) => Ok(id),
            _ => self.unk.ok_or_else(|| LmError::OutOfVocabulary(token.to_string())),
        }
    }

    fn context_id(&self, token: &str) -> Result<Sym, LmError> {
        if token == BOS {
            Ok(BOS_ID)
        } else {
            self.target_id(token)
        }
    }

    /// `P(token | context)` with `context` the preceding `order - 1` tokens
    /// (start markers included). Unknown tokens map to `<unk>`.
    pub fn probability(&self, context: &[&str], token: &str) -> Result<F, LmError> {
        let n = self.order();
        if context.len() != n - 1 {
            return Err(LmError::ContextLength { expected: n - 1, got: context.len() });
        }
        let ctx = context.iter().map(|t| self.context_id(t)).collect::<Result<Vec<_>, _>>()?;
        let w = self.target_id(token)?;
        self.prob_ids(&ctx, w)
    }

    pub(crate) fn prob_ids(&self, ctx: &[Sym], w: Sym) -> Result<F, LmError> {
        let n = self.order();
        debug_assert_eq!(ctx.len(), n - 1);
        let mut key: Vec<Sym> = Vec::with_capacity(n);
        match self.smoothing {
            Smoothing::Mle => {
                let top = &self.levels[n - 1];
                let hist = top.histories.get(ctx).ok_or_else(|| LmError::UnseenContext(self.render(ctx)))?;
                key.extend_from_slice(ctx);
                key.push(w);
                let c = top.grams.get(&key).copied().unwrap_or(0);
                Ok(F::from_count(c) / F::from_count(hist.total))
            }
            Smoothing::Additive(delta) => {
                let top = &self.levels[n - 1];
                let total = top.histories.get(ctx).map_or(0, |h| h.total);
                key.extend_from_slice(ctx);
                key.push(w);
                let c = top.grams.get(&key).copied().unwrap_or(0);
                let support = F::from_count(self.vocabulary_size() as u64 + 1);
                Ok((F::from_count(c) + delta) / (F::from_count(total) + delta * support))
            }
            Smoothing::ModifiedKneserNey => {
                let support = F::from_count(self.vocabulary_size() as u64 + 1);
                let mut p = F::one() / support;
                for k in 1..=n {
                    let level = &self.levels[k - 1];
                    let hist_ids = &ctx[ctx.len() - (k - 1)..];
                    let Some(hist) = level.histories.get(hist_ids) else { continue };
                    key.clear();
                    key.extend_from_slice(hist_ids);
                    key.push(w);
                    let c = level.grams.get(&key).copied().unwrap_or(0);
                    let d = level.discount(c);
                    let kept = (F::from_count(c) - d).max(F::zero());
                    let freed = level.discounts[0] * F::from_count(hist.n1)
                        + level.discounts[1] * F::from_count(hist.n2)
                        + level.discounts[2] * F::from_count(hist.n3);
                    p = (kept + freed * p) / F::from_count(hist.total);
                }
                Ok(p)
            }
        }
    }

    /// Texts of the full support, `vocabulary ∪ {</s>}`.
    pub fn support(&self) -> Vec<&str> {
        let mut v = self.counts.vocabulary();
        v.push(EOS);
        v
    }

    /// Histories of length `order - 1` observed in training.
    pub fn observed_contexts(&self) -> Vec<Vec<&str>> {
        let n = self.order();
        let mut out: Vec<Vec<&str>> = self.counts.grams[n - 1]
            .keys()
            .map(|g| g[..n - 1].iter().map(|s| self.counts.symbols.text(*s)).collect())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    fn render(&self, ids: &[Sym]) -> String {
        ids.iter().map(|s| self.counts.symbols.text(*s)).collect::<Vec<_>>().join(" ")
    }

    /// Average `-log2 P` per scored event over the padded sequence: every
    /// token plus the end marker, each conditioned on its `order - 1`
    /// predecessors.
    pub fn cross_entropy<I, S>(&self, tokens: I) -> Result<EntropyReport<F>, LmError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let n = self.order();
        let mut seq: Vec<Sym> = vec![BOS_ID; n - 1];
        for t in tokens {
            seq.push(self.target_id(t.as_ref())?);
        }
        seq.push(EOS_ID);
        let mut bits = F::zero();
        let events = seq.len() - (n - 1);
        for i in (n - 1)..seq.len() {
            let ctx = &seq[i + 1 - n..i];
            let p = self.prob_ids(ctx, seq[i])?;
            if !(p > F::zero()) {
                return Err(LmError::ZeroProbability(self.render(&seq[i + 1 - n..=i])));
            }
            bits = bits - p.log2();
        }
        let mean = bits / F::from_count(events as u64);
        Ok(EntropyReport { bits_per_token: mean.max(F::zero()), token_count: events, meta: ReportMeta::order(n) })
    }
}

/// Grouping labels carried by an entropy value.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReportMeta {
    pub order: usize,
    pub extension: Option<String>,
    pub kind: Option<crate::lexing::FileKind>,
    pub side: Option<crate::ingest::Side>,
    pub decision: Option<crate::ingest::ReviewStatus>,
}

impl ReportMeta {
    pub fn order(order: usize) -> Self {
        ReportMeta { order, ..Default::default() }
    }
}

/// Cross-entropy of one stream.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport<F> {
    pub bits_per_token: F,
    /// Number of scored events (tokens plus the end marker).
    pub token_count: usize,
    pub meta: ReportMeta,
}

/// Running aggregate of per-file entropies.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EntropyAccumulator<F> {
    pub bits: F,
    pub tokens: u64,
    pub files: u64,
    pub file_entropy_sum: F,
}

impl<F: Scalar> EntropyAccumulator<F> {
    pub fn add(&mut self, report: &EntropyReport<F>) {
        self.bits = self.bits + report.bits_per_token * F::from_count(report.token_count as u64);
        self.tokens += report.token_count as u64;
        self.files += 1;
        self.file_entropy_sum = self.file_entropy_sum + report.bits_per_token;
    }

    pub fn merge(&mut self, other: &EntropyAccumulator<F>) {
        self.bits = self.bits + other.bits;
        self.tokens += other.tokens;
        self.files += other.files;
        self.file_entropy_sum = self.file_entropy_sum + other.file_entropy_sum;
    }

    /// Corpus-level bits per token.
    pub fn token_weighted(&self) -> Option<F> {
        (self.tokens > 0).then(|| self.bits / F::from_count(self.tokens))
    }

    /// Unweighted mean of per-file entropies.
    pub fn file_mean(&self) -> Option<F> {
        (self.files > 0).then(|| self.file_entropy_sum / F::from_count(self.files))
    }
}
