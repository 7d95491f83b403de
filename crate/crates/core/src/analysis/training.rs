//! Per-review training sets, model construction and leakage-checked
//! scoring.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::corpus::{Corpus, Group};
use super::{AnalysisError, ExperimentConfig};
use crate::ingest::ReviewStatus;
use crate::lexing::TokenStream;
use crate::lm::{build_counts, EntropyAccumulator, NGramModel};
use crate::Scalar;

/// Which accepted reviews a scored review is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainPolicy {
    /// Every accepted review except the scored one.
    #[default]
    Loo,
    /// Accepted reviews created strictly before the scored one.
    Chrono,
}

impl TrainPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            TrainPolicy::Loo => "loo",
            TrainPolicy::Chrono => "chrono",
        }
    }
}

impl std::str::FromStr for TrainPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "loo" | "loo-accepted" => Ok(TrainPolicy::Loo),
            "chrono" | "chronological" => Ok(TrainPolicy::Chrono),
            other => Err(format!("unknown training policy {other:?}")),
        }
    }
}

/// Identifies a training set within one group. Reviews whose exclusion does
/// not change the pool share a key, so their model is built once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum TrainSet {
    /// All contributors, minus the given review index when it is one.
    AllBut(Option<usize>),
    /// The first `n` contributors in creation order.
    Earliest(usize),
}

/// A model together with the fingerprints of the reviews it was trained on.
pub struct TrainedModel<F: Scalar> {
    pub model: NGramModel<F>,
    pub fingerprints: HashSet<String>,
}

impl<F: Scalar> TrainedModel<F> {
    /// Fails when the review with `fingerprint` is part of the training data.
    pub fn check_disjoint(&self, review_id: &str, fingerprint: &str) -> Result<(), AnalysisError> {
        if self.fingerprints.contains(fingerprint) {
            return Err(AnalysisError::Leakage(review_id.to_string()));
        }
        Ok(())
    }
}

/// Non-empty post-side streams of accepted reviews in `group`, by review.
struct Pool<'a> {
    /// Contributing review indices in creation order (ties by archive order).
    by_time: Vec<usize>,
    members: BTreeSet<usize>,
    streams: BTreeMap<usize, Vec<&'a TokenStream>>,
}

impl<'a> Pool<'a> {
    fn new(corpus: &'a Corpus, group: &Group) -> Self {
        let mut streams = BTreeMap::new();
        for (i, r) in corpus.reviews.iter().enumerate() {
            if r.status != ReviewStatus::Accepted {
                continue;
            }
            let own: Vec<&TokenStream> = r.post.iter().filter(|s| !s.is_empty() && group.contains(s)).collect();
            if !own.is_empty() {
                streams.insert(i, own);
            }
        }
        let members: BTreeSet<usize> = streams.keys().copied().collect();
        let mut by_time: Vec<usize> = members.iter().copied().collect();
        by_time.sort_by_key(|i| (corpus.reviews[*i].created, *i));
        Pool { by_time, members, streams }
    }

    fn key(&self, corpus: &Corpus, review: usize, policy: TrainPolicy) -> TrainSet {
        match policy {
            TrainPolicy::Loo => TrainSet::AllBut(self.members.contains(&review).then_some(review)),
            TrainPolicy::Chrono => {
                let t = corpus.reviews[review].created;
                TrainSet::Earliest(self.by_time.partition_point(|i| corpus.reviews[*i].created < t))
            }
        }
    }

    fn reviews(&self, key: TrainSet) -> Vec<usize> {
        match key {
            TrainSet::AllBut(skip) => self.members.iter().copied().filter(|i| Some(*i) != skip).collect(),
            TrainSet::Earliest(n) => {
                let mut v = self.by_time[..n].to_vec();
                v.sort_unstable();
                v
            }
        }
    }

    fn train<F: Scalar>(
        &self,
        corpus: &Corpus,
        key: TrainSet,
        order: usize,
        config: &ExperimentConfig<F>,
    ) -> Result<Option<TrainedModel<F>>, AnalysisError> {
        let reviews = self.reviews(key);
        if reviews.is_empty() {
            return Ok(None);
        }
        let seqs: Vec<&TokenStream> = reviews.iter().flat_map(|i| self.streams[i].iter().copied()).collect();
        let counts = build_counts(seqs.iter().map(|s| s.texts()), order, config.min_count)?;
        let model = NGramModel::train(counts, config.smoothing)?;
        let fingerprints = reviews.iter().map(|i| corpus.reviews[*i].fingerprint.clone()).collect();
        Ok(Some(TrainedModel { model, fingerprints }))
    }
}

/// One stream to score: which review it belongs to, the model group and the
/// report label it is aggregated under.
#[derive(Debug, Clone)]
pub(crate) struct Target<'a> {
    pub review: usize,
    pub group: Group,
    pub label: String,
    pub stream: &'a TokenStream,
}

/// Aggregated entropy per `(group, label, order)`.
pub(crate) type Aggregates<F> = BTreeMap<(Group, String, usize), EntropyAccumulator<F>>;

/// Scores every target at every configured order against the model of its
/// training set. Empty streams are skipped; targets without any training
/// data are reported in the returned warnings.
pub(crate) fn score_targets<F: Scalar>(
    corpus: &Corpus,
    targets: &[Target<'_>],
    config: &ExperimentConfig<F>,
) -> Result<(Aggregates<F>, Vec<String>), AnalysisError> {
    let mut warnings = Vec::new();
    let groups: BTreeSet<&Group> = targets.iter().map(|t| &t.group).collect();
    let pools: BTreeMap<&Group, Pool> = groups.into_iter().map(|g| (g, Pool::new(corpus, g))).collect();

    let skipped = targets.iter().filter(|t| t.stream.is_empty()).count();
    if skipped > 0 {
        warnings.push(format!("skipped {skipped} empty streams"));
    }
    // bucket targets by the model that scores them
    let mut jobs: BTreeMap<(&Group, usize, TrainSet), Vec<usize>> = BTreeMap::new();
    for order in config.orders.clone() {
        for (ti, t) in targets.iter().enumerate() {
            if t.stream.is_empty() {
                continue;
            }
            let key = pools[&t.group].key(corpus, t.review, config.policy);
            jobs.entry((&t.group, order, key)).or_default().push(ti);
        }
    }
    let jobs: Vec<_> = jobs.into_iter().collect();
    let results = jobs
        .par_iter()
        .map(|((group, order, key), members)| {
            let Some(trained) = pools[group].train(corpus, *key, *order, config)? else {
                return Ok((Vec::new(), members.len()));
            };
            let mut scored = Vec::with_capacity(members.len());
            for ti in members {
                let t = &targets[*ti];
                let review = &corpus.reviews[t.review];
                trained.check_disjoint(&review.review_id, &review.fingerprint)?;
                let report = trained.model.cross_entropy(t.stream.texts())?;
                scored.push(((t.group.clone(), t.label.clone(), *order), report));
            }
            Ok((scored, 0))
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;

    let mut agg: Aggregates<F> = BTreeMap::new();
    let mut untrained = 0;
    for (scored, missing) in results {
        untrained += missing;
        for (cell, report) in scored {
            agg.entry(cell).or_default().add(&report);
        }
    }
    if untrained > 0 {
        warnings.push(format!("{untrained} stream scorings had no training data"));
    }
    Ok((agg, warnings))
}
