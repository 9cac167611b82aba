//! Recursive feature elimination with an inner stratified cross-validation.

use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spatial_sign;
use crate::cohort::stratified_kfold_labels;
use crate::error::{Error, Result};
use crate::glm::{fit_elastic_net_from, predict_proba, ElasticNetConfig, LogisticModel};
use crate::stats::auc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfeConfig {
    pub base: ElasticNetConfig,
    pub inner_folds: usize,
    /// Subset sizes eligible for selection; `None` means every size 1..=p.
    #[serde(default)]
    pub candidate_sizes: Option<Vec<usize>>,
    pub seed: u64,
}

impl Default for RfeConfig {
    fn default() -> Self {
        RfeConfig {
            base: ElasticNetConfig::new(0.5, 0.01),
            inner_folds: 5,
            candidate_sizes: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfeStep {
    pub removed: String,
    /// Subset size after the removal.
    pub size: usize,
    /// Inner-CV AUC of the subset after the removal.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSubset {
    pub features: Vec<String>,
    /// Removals leading from the full set to `features`.
    pub trace: Vec<RfeStep>,
    /// Inner-CV AUC of every evaluated subset size.
    pub size_scores: Vec<(usize, f64)>,
}

impl FeatureSubset {
    /// A subset that keeps everything (no selection performed).
    pub fn all(names: &[String]) -> Self {
        FeatureSubset {
            features: names.to_vec(),
            trace: Vec::new(),
            size_scores: Vec::new(),
        }
    }
}

const SCORE_TIE: f64 = 1e-12;

fn select(x: ArrayView2<f64>, rows: &[usize], cols: &[usize]) -> Array2<f64> {
    let mut out = x.select(Axis(0), rows).select(Axis(1), cols);
    spatial_sign(&mut out);
    out
}

struct FoldFit {
    auc: f64,
    model: LogisticModel,
}

/// Eliminate the feature with the smallest mean |coefficient| one at a time
/// and return the size with the best inner-CV AUC (ties go to the smaller set).
///
/// `x` must be standardized; spatial sign is applied per candidate subset.
pub fn rfe_select(x: ArrayView2<f64>, y: &[u8], names: &[String], config: &RfeConfig) -> Result<FeatureSubset> {
    let p = names.len();
    if x.ncols() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            actual: x.ncols(),
        });
    }
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            actual: y.len(),
        });
    }
    if p < 1 {
        return Err(Error::InvalidArgument("RFE needs at least one feature".into()));
    }
    let candidates: Vec<usize> = match &config.candidate_sizes {
        Some(c) if c.is_empty() => return Err(Error::InvalidArgument("empty candidate sizes".into())),
        Some(c) => {
            if c.iter().any(|&s| s == 0 || s > p) {
                return Err(Error::InvalidArgument(format!("candidate sizes must lie in 1..={p}")));
            }
            c.clone()
        }
        None => (1..=p).collect(),
    };
    let min_size = *candidates.iter().min().expect("non-empty");

    let pos = y.iter().filter(|&&v| v == 1).count();
    let smallest_class = pos.min(y.len() - pos);
    let k = config.inner_folds.min(smallest_class);
    if k < 2 {
        return Err(Error::SingleClass(format!(
            "RFE inner folds: smallest class has {smallest_class} members"
        )));
    }
    let fold_of = stratified_kfold_labels(y, k, config.seed)?;
    let folds: Vec<(Vec<usize>, Vec<usize>)> = (0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..y.len()).partition(|&i| fold_of[i] == f);
            (train, test)
        })
        .collect();

    let mut current: Vec<usize> = (0..p).collect();
    let mut warm: Vec<Option<LogisticModel>> = vec![None; k];
    let mut history: Vec<(Vec<usize>, f64)> = Vec::new();
    let mut removed: Vec<usize> = Vec::new();
    loop {
        let fits: Vec<FoldFit> = folds
            .par_iter()
            .zip(warm.par_iter())
            .map(|((train, test), start)| -> Result<FoldFit> {
                let xtr = select(x, train, &current);
                let ytr: Vec<u8> = train.iter().map(|&i| y[i]).collect();
                let start = start.as_ref().map(|m| (m.intercept, m.coefficients.as_slice()));
                let model = fit_elastic_net_from(xtr.view(), &ytr, &config.base, start, None)?;
                let xte = select(x, test, &current);
                let yte: Vec<u8> = test.iter().map(|&i| y[i]).collect();
                let probs = xte
                    .rows()
                    .into_iter()
                    .map(|r| predict_proba(&model, &r.to_vec()))
                    .collect::<Result<Vec<f64>>>()?;
                Ok(FoldFit {
                    auc: auc(&yte, &probs)?,
                    model,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let score = fits.iter().map(|f| f.auc).sum::<f64>() / k as f64;
        history.push((current.clone(), score));
        if current.len() <= min_size {
            break;
        }
        let importance: Vec<f64> = (0..current.len())
            .map(|j| fits.iter().map(|f| f.model.coefficients[j].abs()).sum::<f64>() / k as f64)
            .collect();
        let drop = importance
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(j, _)| j)
            .expect("non-empty subset");
        removed.push(current.remove(drop));
        warm = fits
            .into_iter()
            .map(|f| {
                let mut m = f.model;
                m.coefficients.remove(drop);
                Some(m)
            })
            .collect();
    }

    let mut best: Option<(usize, f64)> = None;
    for (idx, (set, score)) in history.iter().enumerate() {
        if !candidates.contains(&set.len()) {
            continue;
        }
        // History runs from large to small sets, so a tie moves to the later (smaller) one.
        match best {
            Some((_, s)) if *score < s - SCORE_TIE => {}
            _ => best = Some((idx, *score)),
        }
    }
    let (best_idx, _) = best.expect("full set or a candidate was evaluated");
    let trace = (0..best_idx)
        .map(|i| RfeStep {
            removed: names[removed[i]].clone(),
            size: history[i + 1].0.len(),
            score: history[i + 1].1,
        })
        .collect();
    Ok(FeatureSubset {
        features: history[best_idx].0.iter().map(|&j| names[j].clone()).collect(),
        trace,
        size_scores: history.iter().map(|(s, sc)| (s.len(), *sc)).collect(),
    })
}
