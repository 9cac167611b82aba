//! ROC/AUC machinery, DeLong inference and the classical tests used for
//! model comparison and baseline tables.

mod delong;
mod metrics;
mod roc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use delong::{delong_auc_variance, delong_ci, delong_paired_test, DelongAuc};
pub use metrics::{classification_metrics, ClassificationMetrics, ConfusionCounts};
pub use roc::{auc, roc_points, trapezoid_area, RocPoint};
pub use tests::{chi_square_independence, chi_square_sf_df1, mcnemar, normal_two_sided_p, two_sample_t};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

/// Outcome of a statistical test or interval estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: String,
    #[serde(with = "crate::serde_f64")]
    pub statistic: f64,
    pub p_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci: Option<ConfidenceInterval>,
    /// Discordant counts `(b, c)` for McNemar; `b - c` is the signed discordance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discordant: Option<(u64, u64)>,
    /// Zero-variance case: the interval collapsed to a point.
    #[serde(default)]
    pub degenerate: bool,
}

impl TestResult {
    pub(crate) fn new(method: &str, statistic: f64, p_value: f64) -> Self {
        TestResult {
            method: method.to_string(),
            statistic,
            p_value: p_value.clamp(0.0, 1.0),
            estimate: None,
            std_error: None,
            ci: None,
            discordant: None,
            degenerate: false,
        }
    }
}

/// Split scores by label: (positives, negatives).
pub(crate) fn split_by_label(labels: &[u8], scores: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if labels.len() != scores.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            actual: scores.len(),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("scores".into()));
    }
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (&l, &s) in labels.iter().zip(scores) {
        if l == 1 {
            pos.push(s);
        } else {
            neg.push(s);
        }
    }
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::SingleClass("labels".into()));
    }
    Ok((pos, neg))
}

/// Midranks (1-based, ties averaged) of `values`.
pub(crate) fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Positions i..=j share the average of ranks i+1..=j+1.
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample variance (divisor n-1); 0 for fewer than two values.
pub(crate) fn sample_variance(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
}

/// Mean and sample standard deviation.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    (mean(values), sample_variance(values).sqrt())
}

/// Linear-interpolation quantile of unsorted data, `q` in [0,1].
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}
