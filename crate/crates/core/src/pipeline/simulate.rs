//! Sample-size simulation: rerun every outer fold on bootstrap-resampled
//! training rows of decreasing size, keeping the test folds fixed.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_inputs, fold_plan, run_fold, FoldMetrics, MeanSd, Metric, ModelKind, Resampling, RunOptions};
use crate::cohort::Cohort;
use crate::error::{Error, Result};
use crate::pipeline::ExperimentConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub fractions: Vec<f64>,
    pub repeats: usize,
    /// When false the training rows are used as they are (identity run).
    pub resample: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            fractions: (1..=10).map(|i| f64::from(i) / 10.0).collect(),
            repeats: 3,
            resample: true,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.fractions.is_empty() {
            return Err(Error::InvalidArgument("no sample fractions".into()));
        }
        if let Some(f) = self.fractions.iter().find(|&&f| !(f > 0.0 && f <= 1.0)) {
            return Err(Error::InvalidArgument(format!("sample fraction {f} not in (0,1]")));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidArgument("repeats must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRun {
    pub fraction: f64,
    pub repeat: usize,
    pub fold: usize,
    pub n_core_train: Option<usize>,
    pub metrics: Option<FoldMetrics>,
    pub escalation_fraction: Option<f64>,
    /// Set when the run was skipped.
    pub error: Option<String>,
}

impl SimulationRun {
    pub fn value(&self, model: ModelKind, metric: &str) -> Option<f64> {
        if metric == "escalation" {
            return (model == ModelKind::MultiStage).then_some(self.escalation_fraction).flatten();
        }
        let m = Metric::ALL.into_iter().find(|m| m.name() == metric)?;
        self.metrics.as_ref()?.get(model).value(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub fraction: f64,
    pub model: ModelKind,
    pub metric: String,
    pub value: MeanSd,
    /// Number of (repeat, fold) samples behind the value.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub experiment: ExperimentConfig,
    pub simulation: SimulationConfig,
    pub runs: Vec<SimulationRun>,
    pub summary: Vec<SimulationSummary>,
}

const MODELS: [ModelKind; 3] = [ModelKind::MultiStage, ModelKind::Ensemble1, ModelKind::Ensemble2];

fn metric_names(model: ModelKind) -> Vec<&'static str> {
    let mut names: Vec<&str> = Metric::ALL.iter().map(Metric::name).collect();
    if model == ModelKind::MultiStage {
        names.push("escalation");
    }
    names
}

impl SimulationReport {
    pub fn get(&self, fraction: f64, model: ModelKind, metric: &str) -> Option<&SimulationSummary> {
        self.summary
            .iter()
            .find(|s| s.fraction == fraction && s.model == model && s.metric == metric)
    }

    /// `fraction,model,metric,mean,sd,n`
    pub fn write_summary_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["fraction", "model", "metric", "mean", "sd", "n"])?;
        for s in &self.summary {
            w.write_record([
                s.fraction.to_string(),
                s.model.name().to_string(),
                s.metric.clone(),
                s.value.mean.to_string(),
                s.value.sd.to_string(),
                s.n.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// `fraction,repeat,fold,model,metric,value`; skipped runs appear with metric `error`.
    pub fn write_runs_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["fraction", "repeat", "fold", "model", "metric", "value"])?;
        for r in &self.runs {
            let key = [r.fraction.to_string(), (r.repeat + 1).to_string(), r.fold.to_string()];
            if let Some(e) = &r.error {
                w.write_record([&key[0], &key[1], &key[2], "", "error", e])?;
                continue;
            }
            for model in MODELS {
                for metric in metric_names(model) {
                    if let Some(v) = r.value(model, metric) {
                        w.write_record([&key[0], &key[1], &key[2], model.name(), metric, &v.to_string()])?;
                    }
                }
            }
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

pub fn sample_size_simulation(
    cohort: &Cohort,
    config: &ExperimentConfig,
    simulation: &SimulationConfig,
) -> Result<SimulationReport> {
    simulation.validate()?;
    check_inputs(cohort, config)?;
    let plan = fold_plan(cohort, config)?;
    let cells: Vec<(f64, usize, usize)> = simulation
        .fractions
        .iter()
        .flat_map(|&f| (0..simulation.repeats).flat_map(move |r| (0..config.outer_folds).map(move |k| (f, r, k))))
        .collect();
    let runs: Vec<SimulationRun> = cells
        .par_iter()
        .map(|&(fraction, repeat, fold)| {
            let options = RunOptions {
                test_hook: None,
                resampling: simulation.resample.then_some(Resampling { fraction, repeat }),
            };
            match run_fold(cohort, &plan, fold, config, &options) {
                Ok(r) => SimulationRun {
                    fraction,
                    repeat,
                    fold,
                    n_core_train: Some(r.n_core_train),
                    metrics: Some(r.metrics),
                    escalation_fraction: Some(r.escalation_fraction),
                    error: None,
                },
                Err(e) => SimulationRun {
                    fraction,
                    repeat,
                    fold,
                    n_core_train: None,
                    metrics: None,
                    escalation_fraction: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let mut summary = Vec::new();
    for &fraction in &simulation.fractions {
        let at: Vec<&SimulationRun> = runs.iter().filter(|r| r.fraction == fraction).collect();
        for model in MODELS {
            for metric in metric_names(model) {
                let values: Vec<f64> = at.iter().filter_map(|r| r.value(model, metric)).collect();
                summary.push(SimulationSummary {
                    fraction,
                    model,
                    metric: metric.to_string(),
                    value: MeanSd::of(&values),
                    n: values.len(),
                });
            }
        }
    }
    Ok(SimulationReport {
        experiment: config.clone(),
        simulation: simulation.clone(),
        runs,
        summary,
    })
}
