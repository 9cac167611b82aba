//! DeLong's structural-component estimator of AUC (co)variance.

use statrs::distribution::{ContinuousCDF, Normal};

use super::{mean, midranks, normal_two_sided_p, split_by_label, ConfidenceInterval, TestResult};
use crate::error::{Error, Result};

/// Per-observation placement values: `v10[i]` for positive i, `v01[j]` for negative j.
struct Components {
    auc: f64,
    v10: Vec<f64>,
    v01: Vec<f64>,
}

fn components(pos: &[f64], neg: &[f64]) -> Components {
    let (m, n) = (pos.len(), neg.len());
    let all: Vec<f64> = pos.iter().chain(neg).copied().collect();
    let r_all = midranks(&all);
    let r_pos = midranks(pos);
    let r_neg = midranks(neg);
    // ψ-averages via midranks: a positive beats (rank among all − rank among positives) negatives.
    let v10: Vec<f64> = (0..m).map(|i| (r_all[i] - r_pos[i]) / n as f64).collect();
    let v01: Vec<f64> = (0..n).map(|j| 1.0 - (r_all[m + j] - r_neg[j]) / m as f64).collect();
    Components {
        auc: mean(&v10),
        v10,
        v01,
    }
}

fn covariance(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (a.len() - 1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelongAuc {
    pub auc: f64,
    pub variance: f64,
}

pub fn delong_auc_variance(labels: &[u8], scores: &[f64]) -> Result<DelongAuc> {
    let (pos, neg) = split_by_label(labels, scores)?;
    if pos.len() < 2 || neg.len() < 2 {
        return Err(Error::InvalidArgument("DeLong needs at least 2 observations per class".into()));
    }
    let c = components(&pos, &neg);
    let variance = covariance(&c.v10, &c.v10) / pos.len() as f64 + covariance(&c.v01, &c.v01) / neg.len() as f64;
    Ok(DelongAuc {
        auc: c.auc,
        variance: variance.max(0.0),
    })
}

/// AUC with a Wald interval at `level`, clamped to [0,1]. The p-value tests AUC = 0.5.
pub fn delong_ci(labels: &[u8], scores: &[f64], level: f64) -> Result<TestResult> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!("confidence level {level} not in (0,1)")));
    }
    let d = delong_auc_variance(labels, scores)?;
    let se = d.variance.sqrt();
    let z = Normal::standard().inverse_cdf(0.5 + level / 2.0);
    let (statistic, p) = if se > 0.0 {
        let s = (d.auc - 0.5) / se;
        (s, normal_two_sided_p(s))
    } else if d.auc == 0.5 {
        (0.0, 1.0)
    } else {
        ((d.auc - 0.5).signum() * f64::INFINITY, 0.0)
    };
    let mut r = TestResult::new(if se > 0.0 { "delong" } else { "delong-degenerate" }, statistic, p);
    r.estimate = Some(d.auc);
    r.std_error = Some(se);
    r.degenerate = se == 0.0;
    r.ci = Some(ConfidenceInterval {
        lower: (d.auc - z * se).clamp(0.0, 1.0),
        upper: (d.auc + z * se).clamp(0.0, 1.0),
        level,
    });
    Ok(r)
}

/// Two-sided paired test of AUC(A) = AUC(B) on the same labels.
pub fn delong_paired_test(labels: &[u8], scores_a: &[f64], scores_b: &[f64]) -> Result<TestResult> {
    let (pa, na) = split_by_label(labels, scores_a)?;
    let (pb, nb) = split_by_label(labels, scores_b)?;
    if pa.len() < 2 || na.len() < 2 {
        return Err(Error::InvalidArgument("DeLong needs at least 2 observations per class".into()));
    }
    let ca = components(&pa, &na);
    let cb = components(&pb, &nb);
    let (m, n) = (pa.len() as f64, na.len() as f64);
    let var_a = covariance(&ca.v10, &ca.v10) / m + covariance(&ca.v01, &ca.v01) / n;
    let var_b = covariance(&cb.v10, &cb.v10) / m + covariance(&cb.v01, &cb.v01) / n;
    let cov = covariance(&ca.v10, &cb.v10) / m + covariance(&ca.v01, &cb.v01) / n;
    let var = (var_a + var_b - 2.0 * cov).max(0.0);
    let diff = ca.auc - cb.auc;
    let (statistic, p) = if diff == 0.0 {
        (0.0, 1.0)
    } else if var > 0.0 {
        let z = diff / var.sqrt();
        (z, normal_two_sided_p(z))
    } else {
        (diff.signum() * f64::INFINITY, 0.0)
    };
    let mut r = TestResult::new("delong-paired", statistic, p);
    r.estimate = Some(diff);
    r.std_error = Some(var.sqrt());
    r.degenerate = var == 0.0;
    Ok(r)
}
