//! Pairwise model comparisons on pooled test predictions.

use serde::{Deserialize, Serialize};

use super::{ExperimentReport, FoldResult, ModelKind};
use crate::error::{Error, Result};
use crate::stats::{delong_paired_test, mcnemar, TestResult};

/// Pooled per-sample outputs of one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOutputs {
    pub name: String,
    /// Probabilities, when the model produces them.
    pub scores: Option<Vec<f64>>,
    pub predictions: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub model_a: String,
    pub model_b: String,
    /// Paired DeLong test; absent when either model has no score.
    pub delong: Option<TestResult>,
    /// McNemar on correctness among positives.
    pub mcnemar_sensitivity: TestResult,
    /// McNemar on correctness among negatives.
    pub mcnemar_specificity: TestResult,
}

/// Labels and per-model outputs concatenated over folds, in [`ModelKind::ALL`] order.
pub fn pooled_outputs(folds: &[FoldResult], threshold: f64) -> (Vec<u8>, Vec<ModelOutputs>) {
    let samples: Vec<_> = folds.iter().flat_map(|f| &f.samples).collect();
    let labels = samples.iter().map(|s| s.label).collect();
    let outputs = ModelKind::ALL
        .iter()
        .map(|&m| ModelOutputs {
            name: m.name().to_string(),
            scores: m
                .has_score()
                .then(|| samples.iter().map(|s| s.score(m).expect("scored model")).collect()),
            predictions: samples.iter().map(|s| s.prediction(m, threshold)).collect(),
        })
        .collect();
    (labels, outputs)
}

fn correctness(labels: &[u8], predictions: &[u8], class: u8) -> Vec<bool> {
    labels
        .iter()
        .zip(predictions)
        .filter(|(&l, _)| l == class)
        .map(|(&l, &p)| l == p)
        .collect()
}

pub fn compare_outputs(labels: &[u8], a: &ModelOutputs, b: &ModelOutputs) -> Result<Comparison> {
    for o in [a, b] {
        if o.predictions.len() != labels.len() || o.scores.as_ref().is_some_and(|s| s.len() != labels.len()) {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                actual: o.predictions.len(),
            });
        }
    }
    let delong = match (&a.scores, &b.scores) {
        (Some(sa), Some(sb)) => Some(delong_paired_test(labels, sa, sb)?),
        _ => None,
    };
    Ok(Comparison {
        model_a: a.name.clone(),
        model_b: b.name.clone(),
        delong,
        mcnemar_sensitivity: mcnemar(&correctness(labels, &a.predictions, 1), &correctness(labels, &b.predictions, 1))?,
        mcnemar_specificity: mcnemar(&correctness(labels, &a.predictions, 0), &correctness(labels, &b.predictions, 0))?,
    })
}

/// Every unordered pair, in input order.
pub(super) fn compare_all(labels: &[u8], outputs: &[ModelOutputs]) -> Result<Vec<Comparison>> {
    let mut out = Vec::new();
    for i in 0..outputs.len() {
        for j in i + 1..outputs.len() {
            out.push(compare_outputs(labels, &outputs[i], &outputs[j])?);
        }
    }
    Ok(out)
}

/// Recompute the pairwise table from a report's pooled test predictions.
pub fn compare_models(report: &ExperimentReport) -> Result<Vec<Comparison>> {
    if report.folds.iter().all(|f| f.samples.is_empty()) {
        return Err(Error::Empty("report has no pooled predictions".into()));
    }
    let (labels, outputs) = pooled_outputs(&report.folds, report.config.classification_threshold);
    compare_all(&labels, &outputs)
}
