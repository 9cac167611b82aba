mod common;

use std::collections::BTreeSet;
use std::sync::OnceLock;

use cascade_uq::cohort::{Cohort, PatientRecord};
use cascade_uq::ensemble::EnsembleGrids;
use cascade_uq::glm::ElasticNetConfig;
use cascade_uq::pipeline::{
    compare_models, run_nested_cv, run_nested_cv_with, sample_size_simulation, ExperimentConfig, ExperimentReport,
    Metric, ModelKind, RunOptions, SimulationConfig,
};
use common::*;

fn cohort() -> &'static Cohort {
    static C: OnceLock<Cohort> = OnceLock::new();
    C.get_or_init(|| table1_cohort(150, 17))
}

fn report() -> &'static ExperimentReport {
    static R: OnceLock<ExperimentReport> = OnceLock::new();
    R.get_or_init(|| run_nested_cv(cohort(), &fast_config(3)).unwrap())
}

fn mean_and_sd(v: &[f64]) -> (f64, f64) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
    (m, var.sqrt())
}

fn interpolated_quantile(v: &[f64], q: f64) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let pos = q * (s.len() - 1) as f64;
    let (lo, frac) = (pos.floor() as usize, pos.fract());
    if lo + 1 < s.len() {
        s[lo] * (1.0 - frac) + s[lo + 1] * frac
    } else {
        s[lo]
    }
}

#[test]
fn test_samples_partition_the_cohort() {
    let r = report();
    assert_eq!(r.folds.len(), 5);
    assert!(r.failed.is_empty());
    let mut seen = BTreeSet::new();
    for f in &r.folds {
        for s in &f.samples {
            assert!(seen.insert(s.id.clone()), "{} scored twice", s.id);
        }
    }
    let all: BTreeSet<String> = cohort().ids().into_iter().collect();
    assert_eq!(seen, all);
}

#[test]
fn aggregates_recompute_from_folds() {
    let r = report();
    for model in ModelKind::ALL {
        for metric in [Metric::Auc, Metric::Accuracy, Metric::Sensitivity, Metric::Specificity] {
            let Some(summary) = r.summary(model).get(metric) else {
                assert!(metric == Metric::Auc && model == ModelKind::Guideline);
                continue;
            };
            let values: Vec<f64> = r.folds.iter().filter_map(|f| f.metrics.get(model).value(metric)).collect();
            let (m, sd) = mean_and_sd(&values);
            assert!((summary.mean - m).abs() < 1e-12 && (summary.sd - sd).abs() < 1e-12);
        }
    }
    for f in &r.folds {
        let labels: Vec<u8> = f.samples.iter().map(|s| s.label).collect();
        let scores: Vec<f64> = f.samples.iter().map(|s| s.multi_stage).collect();
        let auc = f.metrics.multi_stage.auc.unwrap();
        assert!((auc - brute_force_auc(&labels, &scores)).abs() < 1e-12);
        let correct = f.samples.iter().filter(|s| u8::from(s.stage2_mean >= 0.5) == s.label).count();
        assert!((f.metrics.ensemble2.accuracy - correct as f64 / f.n_test as f64).abs() < 1e-12);
    }
}

#[test]
fn escalation_accounting() {
    let r = report();
    let escalated: usize = r.folds.iter().flat_map(|f| &f.samples).filter(|s| s.stage_used == 2).count();
    assert_eq!(r.escalation.escalated, escalated);
    assert_eq!(r.escalation.total, cohort().len());
    assert_eq!(r.escalation.overall, escalated as f64 / cohort().len() as f64);
    let per_fold: Vec<f64> = r.folds.iter().map(|f| f.escalated as f64 / f.n_test as f64).collect();
    assert_eq!(r.escalation.per_fold, per_fold);
    for (q, v) in [(0.25, r.escalation.q1), (0.5, r.escalation.median), (0.75, r.escalation.q3)] {
        assert!((interpolated_quantile(&per_fold, q) - v).abs() < 1e-12);
    }
    for s in r.folds.iter().flat_map(|f| &f.samples) {
        let expected = if s.stage_used == 1 { s.stage1_mean } else { s.stage2_mean };
        assert_eq!(s.multi_stage.to_bits(), expected.to_bits());
    }
}

#[test]
fn pooled_comparisons_cover_every_pair() {
    let r = report();
    assert_eq!(r.comparisons.len(), 6);
    assert_eq!(r.comparisons, compare_models(r).unwrap());
    for c in &r.comparisons {
        let needs_delong = c.model_a != "guideline" && c.model_b != "guideline";
        assert_eq!(c.delong.is_some(), needs_delong);
    }
    assert_eq!(r.pooled.len(), 3);
}

#[test]
fn report_is_deterministic_and_round_trips() {
    let again = run_nested_cv(cohort(), &fast_config(3)).unwrap();
    let json = report().to_json().unwrap();
    assert_eq!(json, again.to_json().unwrap());
    assert_eq!(ExperimentReport::from_json(&json).unwrap().to_json().unwrap(), json);
    let other = run_nested_cv(cohort(), &fast_config(4)).unwrap();
    assert_ne!(json, other.to_json().unwrap());
}

#[test]
fn shifted_test_rows_leave_fitted_parameters_alone() {
    let shift = |_: usize, rows: &mut [PatientRecord]| rows.iter_mut().for_each(|r| r.shift_all(10.0));
    let options = RunOptions { test_hook: Some(&shift), resampling: None };
    let shifted = run_nested_cv_with(cohort(), &fast_config(3), &options).unwrap();
    let fitted = |r: &ExperimentReport| -> Vec<String> {
        r.folds
            .iter()
            .map(|f| serde_json::to_string(&(&f.model, &f.stage1, &f.stage2, &f.threshold_tuning)).unwrap())
            .collect()
    };
    assert_eq!(fitted(report()), fitted(&shifted));
    assert_ne!(report().folds[0].samples, shifted.folds[0].samples);
}

#[test]
fn uninformative_imaging_keeps_everyone_at_stage1() {
    let mut c = cohort().clone();
    for r in &mut c.records {
        r.stage2.as_mut().unwrap().values_mut().for_each(|v| *v = 1.0);
    }
    let config = ExperimentConfig {
        ensemble_grids: EnsembleGrids::point(5, 1.0, ElasticNetConfig::new(0.5, 0.05)),
        feature_selection: false,
        ..fast_config(8)
    };
    let r = run_nested_cv(&c, &config).unwrap();
    for f in &r.folds {
        let best = f.threshold_tuning.best;
        assert_eq!(best.val1_retained, 1.0);
        assert_eq!(best.thresholds.midway_threshold, 0.0);
        assert_eq!(f.escalated, 0);
    }
}

#[test]
fn identity_simulation_reproduces_the_cross_validation() {
    let sim = SimulationConfig { fractions: vec![1.0], repeats: 1, resample: false };
    let s = sample_size_simulation(cohort(), &fast_config(3), &sim).unwrap();
    assert_eq!(s.runs.len(), 5);
    for run in &s.runs {
        let fold = &report().folds[run.fold];
        assert_eq!(run.metrics.as_ref().unwrap(), &fold.metrics);
        assert_eq!(run.escalation_fraction, Some(fold.escalation_fraction));
    }
}

#[test]
fn simulation_bookkeeping() {
    let config = ExperimentConfig { outer_folds: 3, ..fast_config(5) };
    let sim = SimulationConfig { fractions: vec![0.5, 1.0], repeats: 2, resample: true };
    let s = sample_size_simulation(cohort(), &config, &sim).unwrap();
    assert_eq!(s.runs.len(), 2 * 2 * 3);
    for fraction in [0.5, 1.0] {
        for repeat in 0..2 {
            let n = s.runs.iter().filter(|r| r.fraction == fraction && r.repeat == repeat).count();
            assert_eq!(n, 3);
        }
        let summary = s.get(fraction, ModelKind::MultiStage, "auc").unwrap();
        let values: Vec<f64> =
            s.runs.iter().filter(|r| r.fraction == fraction).filter_map(|r| r.value(ModelKind::MultiStage, "auc")).collect();
        assert_eq!(summary.n, values.len());
        assert!((summary.value.mean - mean_and_sd(&values).0).abs() < 1e-12);
    }
    let half = s.runs.iter().find(|r| r.fraction == 0.5).unwrap().n_core_train.unwrap();
    let full = s.runs.iter().find(|r| r.fraction == 1.0 && r.fold == 0).unwrap().n_core_train.unwrap();
    assert!(half < full);
    let mut csv = Vec::new();
    s.write_runs_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("fraction,repeat,fold,model,metric,value"));
}

#[test]
fn cohorts_without_imaging_are_rejected() {
    let mut c = cohort().clone();
    c.records[0].stage2 = None;
    assert!(run_nested_cv(&c, &fast_config(1)).is_err());
    let bad = ExperimentConfig { outer_folds: 1, ..fast_config(1) };
    assert!(run_nested_cv(cohort(), &bad).is_err());
}
