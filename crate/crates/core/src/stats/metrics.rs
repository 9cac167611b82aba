use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub r#fn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.r#fn
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub counts: ConfusionCounts,
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
}

impl ClassificationMetrics {
    pub fn from_predictions(labels: &[u8], predicted: &[u8]) -> Result<Self> {
        if labels.len() != predicted.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                actual: predicted.len(),
            });
        }
        let mut c = ConfusionCounts::default();
        for (&y, &p) in labels.iter().zip(predicted) {
            match (y, p) {
                (1, 1) => c.tp += 1,
                (1, _) => c.r#fn += 1,
                (_, 1) => c.fp += 1,
                _ => c.tn += 1,
            }
        }
        if c.tp + c.r#fn == 0 || c.tn + c.fp == 0 {
            return Err(Error::SingleClass("labels".into()));
        }
        Ok(ClassificationMetrics {
            counts: c,
            accuracy: (c.tp + c.tn) as f64 / c.total() as f64,
            sensitivity: c.tp as f64 / (c.tp + c.r#fn) as f64,
            specificity: c.tn as f64 / (c.tn + c.fp) as f64,
        })
    }
}

/// Metrics at `threshold`; a probability equal to the threshold is predicted positive.
pub fn classification_metrics(labels: &[u8], probabilities: &[f64], threshold: f64) -> Result<ClassificationMetrics> {
    let predicted: Vec<u8> = probabilities.iter().map(|&p| u8::from(p >= threshold)).collect();
    ClassificationMetrics::from_predictions(labels, &predicted)
}
