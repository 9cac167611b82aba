//! The uncertainty-gated two-stage model and its threshold tuner.

use serde::{Deserialize, Serialize};

use crate::cohort::PatientRecord;
use crate::ensemble::{predict_uncertain, Ensemble, UncertainPrediction};
use crate::error::{Error, Result};
use crate::preprocess::StagePreprocessor;
use crate::stats::auc;

const SCORE_TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeThresholds {
    /// Escalate when the member spread exceeds this.
    pub std_threshold: f64,
    /// Escalate when the mean lies closer than this to 0.5.
    pub midway_threshold: f64,
    /// Exponent parameter of the retention weight used during tuning.
    pub scaling_weight: f64,
}

impl CascadeThresholds {
    pub fn new(std_threshold: f64, midway_threshold: f64, scaling_weight: f64) -> Result<Self> {
        let t = CascadeThresholds {
            std_threshold,
            midway_threshold,
            scaling_weight,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.std_threshold) {
            return Err(Error::InvalidArgument(format!("std threshold {} not in [0,0.5]", self.std_threshold)));
        }
        if !(0.0..=0.5).contains(&self.midway_threshold) {
            return Err(Error::InvalidArgument(format!(
                "midway threshold {} not in [0,0.5]",
                self.midway_threshold
            )));
        }
        check_scaling(self.scaling_weight)
    }
}

fn check_scaling(s: f64) -> Result<()> {
    if !(0.5..=9.0).contains(&s) {
        return Err(Error::InvalidArgument(format!("scaling weight {s} not in [0.5,9]")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoutingReason {
    LowUncertainty,
    HighStd,
    NearMidway,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoutingDecision {
    /// 1 or 2.
    pub stage_used: u8,
    pub stage1_mean: f64,
    pub stage1_std: f64,
    /// Stage-2 aggregated probability, once computed.
    pub stage2_mean: Option<f64>,
    /// Stage-1 mean when kept; stage-2 mean when escalated and resolved, NaN before.
    #[serde(with = "crate::serde_f64")]
    pub final_probability: f64,
    pub reason: RoutingReason,
}

impl RoutingDecision {
    pub fn escalated(&self) -> bool {
        self.stage_used == 2
    }

    /// Fill in the stage-2 probability of an escalated decision.
    pub fn resolve(mut self, stage2_mean: f64) -> Self {
        if self.escalated() {
            self.stage2_mean = Some(stage2_mean);
            self.final_probability = stage2_mean;
        }
        self
    }
}

/// Gate on the stage-1 prediction alone.
pub fn gate(mean: f64, std: f64, thresholds: &CascadeThresholds) -> RoutingReason {
    if std > thresholds.std_threshold {
        RoutingReason::HighStd
    } else if (mean - 0.5).abs() < thresholds.midway_threshold {
        RoutingReason::NearMidway
    } else {
        RoutingReason::LowUncertainty
    }
}

/// Route a stage-1 prediction. Escalated decisions carry a NaN final
/// probability until [`RoutingDecision::resolve`] is called.
pub fn route(pred: &UncertainPrediction, thresholds: &CascadeThresholds) -> RoutingDecision {
    let reason = gate(pred.mean, pred.std, thresholds);
    let keep = reason == RoutingReason::LowUncertainty;
    RoutingDecision {
        stage_used: if keep { 1 } else { 2 },
        stage1_mean: pred.mean,
        stage1_std: pred.std,
        stage2_mean: None,
        final_probability: if keep { pred.mean } else { f64::NAN },
        reason,
    }
}

/// Retention weight f^(1/s).
pub fn weight_function(retained: f64, scaling: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&retained) {
        return Err(Error::InvalidArgument(format!("retained fraction {retained} not in [0,1]")));
    }
    check_scaling(scaling)?;
    Ok(retained.powf(1.0 / scaling))
}

pub fn scaled_weighted_auc(labels: &[u8], probabilities: &[f64], retained: f64, scaling: f64) -> Result<f64> {
    let w = weight_function(retained, scaling)?;
    Ok(auc(labels, probabilities)? * w)
}

/// Preprocessing plus ensemble for one stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageModel {
    pub preprocessor: StagePreprocessor,
    pub ensemble: Ensemble,
}

impl StageModel {
    pub fn features(&self) -> &[String] {
        &self.ensemble.features
    }

    pub fn predict_values(&self, raw: &[f64]) -> Result<UncertainPrediction> {
        let z = self.preprocessor.transform_one(raw)?;
        predict_uncertain(&self.ensemble, &z)
    }

    pub fn predict_record(&self, record: &PatientRecord) -> Result<UncertainPrediction> {
        let raw = record.values(self.features()).ok_or_else(|| {
            let missing = self.features().iter().find(|n| record.get(n).is_none()).cloned().unwrap_or_default();
            Error::Schema(format!("record `{}` lacks `{missing}`", record.id))
        })?;
        self.predict_values(&raw)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeModel {
    pub stage1: StageModel,
    pub stage2: StageModel,
    pub thresholds: CascadeThresholds,
}

/// Score a record with stage 1 and escalate to stage 2 when the gate fires.
///
/// Returns [`Error::AcquisitionRequired`] when escalation is needed but the
/// record has no stage-2 values.
pub fn predict_cascade(model: &CascadeModel, record: &PatientRecord) -> Result<RoutingDecision> {
    let first = model.stage1.predict_record(record)?;
    let decision = route(&first, &model.thresholds);
    if !decision.escalated() {
        return Ok(decision);
    }
    let available = model.stage2.features().iter().all(|n| record.get(n).is_some());
    if !available {
        return Err(Error::AcquisitionRequired { id: record.id.clone() });
    }
    let second = model.stage2.predict_record(record)?;
    Ok(decision.resolve(second.mean))
}

/// Fraction of decisions that used stage 2.
pub fn escalation_fraction(decisions: &[RoutingDecision]) -> f64 {
    if decisions.is_empty() {
        return 0.0;
    }
    decisions.iter().filter(|d| d.escalated()).count() as f64 / decisions.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdGrids {
    pub std_thresholds: Vec<f64>,
    pub midway_thresholds: Vec<f64>,
    pub scaling_weights: Vec<f64>,
}

fn steps(from: i32, to: i32, unit: f64) -> Vec<f64> {
    (from..=to).map(|i| f64::from(i) * unit).collect()
}

impl Default for ThresholdGrids {
    fn default() -> Self {
        let mut scaling = vec![0.5];
        scaling.extend(steps(1, 9, 1.0));
        ThresholdGrids {
            std_thresholds: steps(1, 20, 0.01),
            midway_thresholds: steps(0, 10, 0.01),
            scaling_weights: scaling,
        }
    }
}

impl ThresholdGrids {
    pub fn point(t: CascadeThresholds) -> Self {
        ThresholdGrids {
            std_thresholds: vec![t.std_threshold],
            midway_thresholds: vec![t.midway_threshold],
            scaling_weights: vec![t.scaling_weight],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.std_thresholds.is_empty() || self.midway_thresholds.is_empty() || self.scaling_weights.is_empty() {
            return Err(Error::InvalidArgument("threshold grids must be non-empty".into()));
        }
        for &s in &self.std_thresholds {
            for &m in &self.midway_thresholds {
                CascadeThresholds::new(s, m, 1.0)?;
            }
        }
        self.scaling_weights.iter().try_for_each(|&s| check_scaling(s))
    }
}

/// Both stages' predictions on one validation slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationScores {
    pub labels: Vec<u8>,
    /// Stage-1 (mean, std) per row.
    pub stage1: Vec<(f64, f64)>,
    /// Stage-2 mean per row.
    pub stage2: Vec<f64>,
}

impl ValidationScores {
    pub fn new(labels: Vec<u8>, stage1: &[UncertainPrediction], stage2: &[UncertainPrediction]) -> Result<Self> {
        if stage1.len() != labels.len() || stage2.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                actual: stage1.len().min(stage2.len()),
            });
        }
        Ok(ValidationScores {
            labels,
            stage1: stage1.iter().map(|p| (p.mean, p.std)).collect(),
            stage2: stage2.iter().map(|p| p.mean).collect(),
        })
    }

    /// Cascade probabilities and the fraction kept at stage 1.
    pub fn cascade(&self, thresholds: &CascadeThresholds) -> (Vec<f64>, f64) {
        let mut kept = 0usize;
        let probs = self
            .stage1
            .iter()
            .zip(&self.stage2)
            .map(|(&(mean, std), &p2)| {
                if gate(mean, std, thresholds) == RoutingReason::LowUncertainty {
                    kept += 1;
                    mean
                } else {
                    p2
                }
            })
            .collect();
        (probs, kept as f64 / self.labels.len() as f64)
    }

    fn check(&self, what: &str) -> Result<()> {
        let pos = self.labels.iter().filter(|&&l| l == 1).count();
        if pos == 0 || pos == self.labels.len() {
            return Err(Error::SingleClass(format!("{what} labels")));
        }
        Ok(())
    }
}

/// The (σ_th, τ) chosen on the first validation slice for one scaling weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingCandidate {
    pub thresholds: CascadeThresholds,
    pub val1_score: f64,
    pub val1_retained: f64,
    pub val2_auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTuning {
    pub best: ScalingCandidate,
    pub candidates: Vec<ScalingCandidate>,
}

/// Pick (σ_th, τ) per scaling weight on `val1`, then the scaling weight on `val2`.
pub fn tune_thresholds(val1: &ValidationScores, val2: &ValidationScores, grids: &ThresholdGrids) -> Result<ThresholdTuning> {
    grids.validate()?;
    val1.check("first validation")?;
    val2.check("second validation")?;
    let mut scaling = grids.scaling_weights.clone();
    scaling.sort_by(f64::total_cmp);

    // The val1 AUC and retention of each (σ_th, τ) cell do not depend on s.
    let mut cells = Vec::new();
    for &std in &grids.std_thresholds {
        for &mid in &grids.midway_thresholds {
            let t = CascadeThresholds {
                std_threshold: std,
                midway_threshold: mid,
                scaling_weight: 1.0,
            };
            let (probs, retained) = val1.cascade(&t);
            cells.push((t, auc(&val1.labels, &probs)?, retained));
        }
    }

    let mut candidates = Vec::with_capacity(scaling.len());
    for &s in &scaling {
        let mut best: Option<(CascadeThresholds, f64, f64)> = None;
        for &(t, plain, retained) in &cells {
            let score = plain * weight_function(retained, s)?;
            let wins = match best {
                None => true,
                Some((bt, bs, br)) => {
                    if (score - bs).abs() > SCORE_TIE {
                        score > bs
                    } else if retained != br {
                        retained > br
                    } else if t.std_threshold != bt.std_threshold {
                        t.std_threshold > bt.std_threshold
                    } else {
                        t.midway_threshold < bt.midway_threshold
                    }
                }
            };
            if wins {
                best = Some((t, score, retained));
            }
        }
        let (t, score, retained) = best.expect("grids are non-empty");
        let thresholds = CascadeThresholds { scaling_weight: s, ..t };
        let (probs2, _) = val2.cascade(&thresholds);
        candidates.push(ScalingCandidate {
            thresholds,
            val1_score: score,
            val1_retained: retained,
            val2_auc: auc(&val2.labels, &probs2)?,
        });
    }
    // Scaling weights are ascending, so keeping the first maximum prefers the smaller s.
    let mut best = candidates[0];
    for c in &candidates[1..] {
        if c.val2_auc > best.val2_auc + SCORE_TIE {
            best = *c;
        }
    }
    Ok(ThresholdTuning { best, candidates })
}
