use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::AnalysisError;
use crate::Scalar;

/// Outcome of a rank-based test across groups.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupTestResult {
    pub h: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    pub group_sizes: Vec<usize>,
}

/// Kruskal-Wallis H test with tie correction; the p-value is the chi-square
/// survival function at H with `groups - 1` degrees of freedom.
pub fn kruskal_wallis<F: Scalar>(groups: &[Vec<F>]) -> Result<GroupTestResult, AnalysisError> {
    if groups.len() < 2 {
        return Err(AnalysisError::Precondition(format!("need at least 2 groups, got {}", groups.len())));
    }
    if let Some(i) = groups.iter().position(Vec::is_empty) {
        return Err(AnalysisError::Precondition(format!("group {i} is empty")));
    }
    let mut pooled: Vec<(f64, usize)> = Vec::new();
    for (g, values) in groups.iter().enumerate() {
        for v in values {
            let v = v.as_f64();
            if v.is_nan() {
                return Err(AnalysisError::Precondition(format!("NaN in group {g}")));
            }
            pooled.push((v, g));
        }
    }
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = pooled.len() as f64;
    let mut rank_sums = vec![0.0; groups.len()];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j + 1 < pooled.len() && pooled[j + 1].0 == pooled[i].0 {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their average
        let rank = (i + j + 2) as f64 / 2.0;
        for item in &pooled[i..=j] {
            rank_sums[item.1] += rank;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
    let spread: f64 = rank_sums.iter().zip(&sizes).map(|(r, s)| r * r / *s as f64).sum();
    let raw = 12.0 / (n * (n + 1.0)) * spread - 3.0 * (n + 1.0);
    let correction = 1.0 - tie_term / (n * n * n - n);
    let h = if correction > 0.0 { (raw / correction).max(0.0) } else { 0.0 };
    let df = groups.len() - 1;
    let chi = ChiSquared::new(df as f64).expect("df >= 1");
    let p_value = if h == 0.0 { 1.0 } else { chi.sf(h).clamp(0.0, 1.0) };
    Ok(GroupTestResult { h, degrees_of_freedom: df, p_value, group_sizes: sizes })
}
