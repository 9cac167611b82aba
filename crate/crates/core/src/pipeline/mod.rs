//! Nested cross-validation of the two-stage model and the sample-size simulation.
//!
//! Per outer fold: two validation slices are carved from the training side,
//! both stages are standardized, feature-selected, tuned and fitted on the
//! remaining rows, the gate thresholds are tuned on the validation slices, and
//! all four models are scored on the untouched test fold.

mod compare;
mod output;
mod simulate;

use ndarray::Axis;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cascade::{
    route, tune_thresholds, CascadeModel, RoutingReason, StageModel, ThresholdGrids, ThresholdTuning,
    ValidationScores,
};
use crate::cohort::{slice_validation_positions, stratified_kfold, Cohort, FoldPlan, PatientRecord, Stage};
use crate::ensemble::{fit_ensemble, tune_ensemble, EnsembleGrids, GridCell, InnerCv};
use crate::error::{Error, Result};
use crate::glm::ElasticNetConfig;
use crate::guideline::{classify_guideline, Recommendation};
use crate::preprocess::{fit_scaler, matrix_from_records, rfe_select, FeatureSubset, RfeConfig, StagePreprocessor};
use crate::seed::{self, purpose};
use crate::stats::{classification_metrics, mean_sd, quantile, ClassificationMetrics, ConfusionCounts};

pub use compare::{compare_models, compare_outputs, pooled_outputs, Comparison, ModelOutputs};
pub use output::{write_report_files, ReportFiles};
pub use simulate::{
    sample_size_simulation, SimulationConfig, SimulationReport, SimulationRun, SimulationSummary,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub outer_folds: usize,
    /// Sizes of the two validation slices taken from each training fold.
    pub validation_sizes: [usize; 2],
    pub inner_folds: usize,
    pub ensemble_grids: EnsembleGrids,
    pub threshold_grids: ThresholdGrids,
    /// Solver settings; its alpha/lambda drive feature elimination.
    pub base: ElasticNetConfig,
    pub feature_selection: bool,
    pub seed: u64,
    pub classification_threshold: f64,
    pub confidence_level: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            outer_folds: 10,
            validation_sizes: [20, 20],
            inner_folds: 5,
            ensemble_grids: EnsembleGrids::default(),
            threshold_grids: ThresholdGrids::default(),
            base: ElasticNetConfig::default(),
            feature_selection: true,
            seed: 0,
            classification_threshold: 0.5,
            confidence_level: 0.95,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.outer_folds < 2 {
            return Err(Error::InvalidArgument("outer_folds must be >= 2".into()));
        }
        if self.inner_folds < 2 {
            return Err(Error::InvalidArgument("inner_folds must be >= 2".into()));
        }
        if self.validation_sizes.iter().any(|&s| s < 2) {
            return Err(Error::InvalidArgument("validation slices need >= 2 rows each".into()));
        }
        if !(self.classification_threshold > 0.0 && self.classification_threshold < 1.0) {
            return Err(Error::InvalidArgument("classification_threshold must lie in (0,1)".into()));
        }
        if !(self.confidence_level > 0.0 && self.confidence_level < 1.0) {
            return Err(Error::InvalidArgument("confidence_level must lie in (0,1)".into()));
        }
        self.base.validate()?;
        self.ensemble_grids.validate()?;
        self.threshold_grids.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    MultiStage,
    Ensemble1,
    Ensemble2,
    Guideline,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::MultiStage,
        ModelKind::Ensemble1,
        ModelKind::Ensemble2,
        ModelKind::Guideline,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::MultiStage => "multi_stage",
            ModelKind::Ensemble1 => "ensemble1",
            ModelKind::Ensemble2 => "ensemble2",
            ModelKind::Guideline => "guideline",
        }
    }

    pub fn has_score(&self) -> bool {
        *self != ModelKind::Guideline
    }
}

/// Everything recorded about one test-fold record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSample {
    pub id: String,
    pub label: u8,
    pub stage1_mean: f64,
    pub stage1_std: f64,
    pub stage2_mean: f64,
    pub stage2_std: f64,
    pub stage_used: u8,
    pub reason: RoutingReason,
    pub multi_stage: f64,
    pub guideline: u8,
    pub guideline_class: Recommendation,
    pub guideline_trace: String,
}

impl TestSample {
    pub fn score(&self, model: ModelKind) -> Option<f64> {
        match model {
            ModelKind::MultiStage => Some(self.multi_stage),
            ModelKind::Ensemble1 => Some(self.stage1_mean),
            ModelKind::Ensemble2 => Some(self.stage2_mean),
            ModelKind::Guideline => None,
        }
    }

    pub fn prediction(&self, model: ModelKind, threshold: f64) -> u8 {
        match self.score(model) {
            Some(p) => u8::from(p >= threshold),
            None => self.guideline,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetrics {
    /// Absent for the guideline, which has no score.
    pub auc: Option<f64>,
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub counts: ConfusionCounts,
}

impl ModelMetrics {
    pub fn evaluate(samples: &[TestSample], model: ModelKind, threshold: f64) -> Result<Self> {
        let labels: Vec<u8> = samples.iter().map(|s| s.label).collect();
        let m: ClassificationMetrics = match model.has_score() {
            true => {
                let scores: Vec<f64> = samples.iter().filter_map(|s| s.score(model)).collect();
                classification_metrics(&labels, &scores, threshold)?
            }
            false => {
                let preds: Vec<u8> = samples.iter().map(|s| s.guideline).collect();
                ClassificationMetrics::from_predictions(&labels, &preds)?
            }
        };
        let auc = match model.has_score() {
            true => {
                let scores: Vec<f64> = samples.iter().filter_map(|s| s.score(model)).collect();
                Some(crate::stats::auc(&labels, &scores)?)
            }
            false => None,
        };
        Ok(ModelMetrics {
            auc,
            accuracy: m.accuracy,
            sensitivity: m.sensitivity,
            specificity: m.specificity,
            counts: m.counts,
        })
    }

    pub fn value(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Auc => self.auc,
            Metric::Accuracy => Some(self.accuracy),
            Metric::Sensitivity => Some(self.sensitivity),
            Metric::Specificity => Some(self.specificity),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Auc,
    Accuracy,
    Sensitivity,
    Specificity,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Auc, Metric::Accuracy, Metric::Sensitivity, Metric::Specificity];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Auc => "auc",
            Metric::Accuracy => "accuracy",
            Metric::Sensitivity => "sensitivity",
            Metric::Specificity => "specificity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub multi_stage: ModelMetrics,
    pub ensemble1: ModelMetrics,
    pub ensemble2: ModelMetrics,
    pub guideline: ModelMetrics,
}

impl FoldMetrics {
    pub fn get(&self, model: ModelKind) -> &ModelMetrics {
        match model {
            ModelKind::MultiStage => &self.multi_stage,
            ModelKind::Ensemble1 => &self.ensemble1,
            ModelKind::Ensemble2 => &self.ensemble2,
            ModelKind::Guideline => &self.guideline,
        }
    }
}

/// How one stage was selected and tuned inside a fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSelection {
    pub selection: FeatureSubset,
    pub tuning: GridCell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_core_train: usize,
    pub n_test: usize,
    pub stage1: StageSelection,
    pub stage2: StageSelection,
    pub model: CascadeModel,
    pub threshold_tuning: ThresholdTuning,
    pub metrics: FoldMetrics,
    pub escalated: usize,
    pub escalation_fraction: f64,
    pub samples: Vec<TestSample>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailedFold {
    pub fold: usize,
    pub error: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    #[serde(with = "crate::serde_f64")]
    pub mean: f64,
    #[serde(with = "crate::serde_f64")]
    pub sd: f64,
}

impl MeanSd {
    pub fn of(values: &[f64]) -> Self {
        let (mean, sd) = mean_sd(values);
        MeanSd { mean, sd }
    }
}

/// Mean (sd) of the per-fold metrics of one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model: ModelKind,
    pub auc: Option<MeanSd>,
    pub accuracy: MeanSd,
    pub sensitivity: MeanSd,
    pub specificity: MeanSd,
}

impl ModelSummary {
    pub fn get(&self, metric: Metric) -> Option<MeanSd> {
        match metric {
            Metric::Auc => self.auc,
            Metric::Accuracy => Some(self.accuracy),
            Metric::Sensitivity => Some(self.sensitivity),
            Metric::Specificity => Some(self.specificity),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscalationSummary {
    pub escalated: usize,
    pub total: usize,
    pub overall: f64,
    pub per_fold: Vec<f64>,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

/// Pooled test-set AUC with a DeLong interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledAuc {
    pub model: ModelKind,
    pub auc: f64,
    pub interval: crate::stats::TestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub provenance: String,
    pub n_records: usize,
    pub folds: Vec<FoldResult>,
    pub failed: Vec<FailedFold>,
    pub performance: Vec<ModelSummary>,
    pub pooled: Vec<PooledAuc>,
    pub comparisons: Vec<Comparison>,
    pub escalation: EscalationSummary,
}

impl ExperimentReport {
    pub fn summary(&self, model: ModelKind) -> &ModelSummary {
        self.performance.iter().find(|s| s.model == model).expect("every model is summarized")
    }
}

/// Test-time hook: mutate the held-out records of a fold before scoring.
pub type TestHook<'a> = &'a (dyn Fn(usize, &mut [PatientRecord]) + Sync);

/// Bootstrap resampling of the core training rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resampling {
    pub fraction: f64,
    pub repeat: usize,
}

#[derive(Clone, Copy, Default)]
pub struct RunOptions<'a> {
    pub test_hook: Option<TestHook<'a>>,
    pub resampling: Option<Resampling>,
}

const MAX_REDRAWS: usize = 100;

fn labels_of(records: &[&PatientRecord]) -> Vec<u8> {
    records.iter().map(|r| r.label).collect()
}

fn resample<'a>(core: &[&'a PatientRecord], r: Resampling, seed: u64) -> Result<Vec<&'a PatientRecord>> {
    if !(r.fraction > 0.0 && r.fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("fraction {} not in (0,1]", r.fraction)));
    }
    let size = ((r.fraction * core.len() as f64) - 1e-9).ceil().max(1.0) as usize;
    let mut rng = seed::rng(seed);
    for _ in 0..MAX_REDRAWS {
        let drawn: Vec<&PatientRecord> = (0..size).map(|_| core[rng.random_range(0..core.len())]).collect();
        let pos = drawn.iter().filter(|r| r.label == 1).count();
        if pos >= 2 && size - pos >= 2 {
            return Ok(drawn);
        }
    }
    Err(Error::SingleClass(format!(
        "{MAX_REDRAWS} resamples of {size} training rows lacked two members per class"
    )))
}

fn stage_tag(stage: Stage) -> u64 {
    match stage {
        Stage::One => 1,
        Stage::Two => 2,
    }
}

fn fit_stage(
    core: &[&PatientRecord],
    names: &[String],
    config: &ExperimentConfig,
    fold: usize,
    stage: Stage,
) -> Result<(StageModel, StageSelection)> {
    let path = |p: u64| seed::derive(config.seed, &[fold as u64, stage_tag(stage), p]);
    let raw = matrix_from_records(core.iter().copied(), names)?;
    let y = labels_of(core);
    let scaler = fit_scaler(raw.view(), names)?;
    let selection = if config.feature_selection {
        let z = scaler.standardize(raw.view())?;
        let rfe = RfeConfig {
            base: config.base,
            inner_folds: config.inner_folds,
            candidate_sizes: None,
            seed: path(purpose::RFE),
        };
        rfe_select(z.view(), &y, names, &rfe)?
    } else {
        FeatureSubset::all(names)
    };
    let preprocessor = StagePreprocessor {
        scaler: scaler.restrict(&selection.features)?,
    };
    let cols: Vec<usize> = selection
        .features
        .iter()
        .map(|f| names.iter().position(|n| n == f).expect("selected from names"))
        .collect();
    let x = preprocessor.transform(raw.select(Axis(1), &cols).view())?;
    let inner = InnerCv {
        folds: config.inner_folds,
        seed: path(purpose::TUNE),
    };
    let tuning = tune_ensemble(x.view(), &y, &selection.features, &config.ensemble_grids, &config.base, &inner)?;
    let ensemble = fit_ensemble(x.view(), &y, &selection.features, &tuning.config(config.base, path(purpose::FIT)))?;
    Ok((
        StageModel { preprocessor, ensemble },
        StageSelection {
            selection,
            tuning: tuning.best,
        },
    ))
}

fn validation_scores(model: &CascadeModel, records: &[&PatientRecord]) -> Result<ValidationScores> {
    let p1 = records.iter().map(|r| model.stage1.predict_record(r)).collect::<Result<Vec<_>>>()?;
    let p2 = records.iter().map(|r| model.stage2.predict_record(r)).collect::<Result<Vec<_>>>()?;
    ValidationScores::new(labels_of(records), &p1, &p2)
}

/// Train and evaluate one outer fold.
pub fn run_fold(
    cohort: &Cohort,
    plan: &FoldPlan,
    fold: usize,
    config: &ExperimentConfig,
    options: &RunOptions<'_>,
) -> Result<FoldResult> {
    let train = plan.train_positions(fold);
    let train_records: Vec<&PatientRecord> = train.iter().map(|&i| &cohort.records[i]).collect();
    let slices = slice_validation_positions(
        &labels_of(&train_records),
        (config.validation_sizes[0], config.validation_sizes[1]),
        seed::derive(config.seed, &[fold as u64, purpose::VALIDATION]),
    )?;
    let pick = |pos: &[usize]| -> Vec<&PatientRecord> { pos.iter().map(|&p| train_records[p]).collect() };
    let mut core = pick(&slices.core_train);
    if let Some(r) = options.resampling {
        let s = seed::derive(
            config.seed,
            &[fold as u64, purpose::RESAMPLE, r.repeat as u64, (r.fraction * 1e6).round() as u64],
        );
        core = resample(&core, r, s)?;
    }
    let (val1, val2) = (pick(&slices.val1), pick(&slices.val2));

    let schema = &cohort.schema;
    let (stage1, sel1) = fit_stage(&core, &schema.model_inputs(Stage::One), config, fold, Stage::One)?;
    let (stage2, sel2) = fit_stage(&core, &schema.model_inputs(Stage::Two), config, fold, Stage::Two)?;
    let mut model = CascadeModel {
        stage1,
        stage2,
        thresholds: crate::cascade::CascadeThresholds {
            std_threshold: 0.0,
            midway_threshold: 0.0,
            scaling_weight: 1.0,
        },
    };
    let tuning = tune_thresholds(
        &validation_scores(&model, &val1)?,
        &validation_scores(&model, &val2)?,
        &config.threshold_grids,
    )?;
    model.thresholds = tuning.best.thresholds;

    let mut test: Vec<PatientRecord> = plan.test_positions(fold).iter().map(|&i| cohort.records[i].clone()).collect();
    if let Some(hook) = options.test_hook {
        hook(fold, &mut test);
    }
    let samples = test
        .iter()
        .map(|r| -> Result<TestSample> {
            let p1 = model.stage1.predict_record(r)?;
            let p2 = model.stage2.predict_record(r)?;
            let decision = route(&p1, &model.thresholds).resolve(p2.mean);
            let g = classify_guideline(r)?;
            Ok(TestSample {
                id: r.id.clone(),
                label: r.label,
                stage1_mean: p1.mean,
                stage1_std: p1.std,
                stage2_mean: p2.mean,
                stage2_std: p2.std,
                stage_used: decision.stage_used,
                reason: decision.reason,
                multi_stage: decision.final_probability,
                guideline: u8::from(g.class != Recommendation::None),
                guideline_class: g.class,
                guideline_trace: g.trace,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let t = config.classification_threshold;
    let metrics = FoldMetrics {
        multi_stage: ModelMetrics::evaluate(&samples, ModelKind::MultiStage, t)?,
        ensemble1: ModelMetrics::evaluate(&samples, ModelKind::Ensemble1, t)?,
        ensemble2: ModelMetrics::evaluate(&samples, ModelKind::Ensemble2, t)?,
        guideline: ModelMetrics::evaluate(&samples, ModelKind::Guideline, t)?,
    };
    let escalated = samples.iter().filter(|s| s.stage_used == 2).count();
    Ok(FoldResult {
        fold,
        n_core_train: core.len(),
        n_test: samples.len(),
        stage1: sel1,
        stage2: sel2,
        model,
        threshold_tuning: tuning,
        metrics,
        escalated,
        escalation_fraction: escalated as f64 / samples.len() as f64,
        samples,
    })
}

fn check_inputs(cohort: &Cohort, config: &ExperimentConfig) -> Result<()> {
    config.validate()?;
    if !cohort.schema.stage2_active() || !cohort.has_stage2() {
        return Err(Error::Schema("cross-validation needs stage-2 features for every record".into()));
    }
    Ok(())
}

pub fn fold_plan(cohort: &Cohort, config: &ExperimentConfig) -> Result<FoldPlan> {
    stratified_kfold(cohort, config.outer_folds, seed::derive(config.seed, &[purpose::OUTER_FOLDS]))
}

/// Run every outer fold; folds that fail are reported, not dropped.
pub fn run_folds(
    cohort: &Cohort,
    config: &ExperimentConfig,
    options: &RunOptions<'_>,
) -> Result<(Vec<FoldResult>, Vec<FailedFold>)> {
    check_inputs(cohort, config)?;
    let plan = fold_plan(cohort, config)?;
    let outcomes: Vec<Result<FoldResult>> = (0..config.outer_folds)
        .into_par_iter()
        .map(|f| run_fold(cohort, &plan, f, config, options))
        .collect();
    let mut folds = Vec::new();
    let mut failed = Vec::new();
    for (f, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(r) => folds.push(r),
            Err(e) => failed.push(FailedFold {
                fold: f,
                error: e.to_string(),
            }),
        }
    }
    Ok((folds, failed))
}

pub fn run_nested_cv(cohort: &Cohort, config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_nested_cv_with(cohort, config, &RunOptions::default())
}

pub fn run_nested_cv_with(cohort: &Cohort, config: &ExperimentConfig, options: &RunOptions<'_>) -> Result<ExperimentReport> {
    let (folds, failed) = run_folds(cohort, config, options)?;
    assemble_report(cohort, config, folds, failed)
}

fn summarize(folds: &[FoldResult]) -> Vec<ModelSummary> {
    ModelKind::ALL
        .iter()
        .map(|&model| {
            let values = |metric: Metric| -> Vec<f64> {
                folds.iter().filter_map(|f| f.metrics.get(model).value(metric)).collect()
            };
            ModelSummary {
                model,
                auc: model.has_score().then(|| MeanSd::of(&values(Metric::Auc))),
                accuracy: MeanSd::of(&values(Metric::Accuracy)),
                sensitivity: MeanSd::of(&values(Metric::Sensitivity)),
                specificity: MeanSd::of(&values(Metric::Specificity)),
            }
        })
        .collect()
}

fn escalation(folds: &[FoldResult]) -> EscalationSummary {
    let escalated: usize = folds.iter().map(|f| f.escalated).sum();
    let total: usize = folds.iter().map(|f| f.n_test).sum();
    let per_fold: Vec<f64> = folds.iter().map(|f| f.escalation_fraction).collect();
    EscalationSummary {
        escalated,
        total,
        overall: escalated as f64 / total as f64,
        q1: quantile(&per_fold, 0.25),
        median: quantile(&per_fold, 0.5),
        q3: quantile(&per_fold, 0.75),
        per_fold,
    }
}

fn assemble_report(
    cohort: &Cohort,
    config: &ExperimentConfig,
    folds: Vec<FoldResult>,
    failed: Vec<FailedFold>,
) -> Result<ExperimentReport> {
    if folds.is_empty() {
        let detail = failed.first().map(|f| format!("fold {}: {}", f.fold, f.error)).unwrap_or_default();
        return Err(Error::Pipeline(format!("every outer fold failed ({detail})")));
    }
    let (labels, outputs) = pooled_outputs(&folds, config.classification_threshold);
    let pooled = ModelKind::ALL
        .iter()
        .zip(&outputs)
        .filter_map(|(&model, o)| o.scores.as_ref().map(|s| (model, s)))
        .map(|(model, scores)| -> Result<PooledAuc> {
            let interval = crate::stats::delong_ci(&labels, scores, config.confidence_level)?;
            Ok(PooledAuc {
                model,
                auc: crate::stats::auc(&labels, scores)?,
                interval,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let comparisons = compare::compare_all(&labels, &outputs)?;
    Ok(ExperimentReport {
        config: config.clone(),
        provenance: cohort.provenance.clone(),
        n_records: cohort.len(),
        performance: summarize(&folds),
        escalation: escalation(&folds),
        pooled,
        comparisons,
        folds,
        failed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohort::{synthesize_cohort, SyntheticSpec};

    fn records(n: usize) -> Vec<PatientRecord> {
        synthesize_cohort(&SyntheticSpec::table1(), n, 1).unwrap().records
    }

    #[test]
    fn resample_sizes_and_classes() {
        let recs = records(60);
        let core: Vec<&PatientRecord> = recs.iter().collect();
        let r = resample(&core, Resampling { fraction: 0.25, repeat: 0 }, 3).unwrap();
        assert_eq!(r.len(), 15);
        let pos = r.iter().filter(|x| x.label == 1).count();
        assert!(pos >= 2 && r.len() - pos >= 2);
        assert_eq!(r, resample(&core, Resampling { fraction: 0.25, repeat: 0 }, 3).unwrap());
        assert!(resample(&core, Resampling { fraction: 1.5, repeat: 0 }, 3).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ExperimentConfig::default().validate().is_ok());
        let bad = ExperimentConfig {
            outer_folds: 1,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ExperimentConfig {
            classification_threshold: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"outer_folds": 5, "bogus": 1}"#).is_err());
        let c: ExperimentConfig = serde_json::from_str(r#"{"outer_folds": 5}"#).unwrap();
        assert_eq!(c.inner_folds, 5);
    }
}
