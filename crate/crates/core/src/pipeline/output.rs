//! Report files: full JSON plus CSV tables and ROC point files.

use std::io::Write;
use std::path::{Path, PathBuf};

use super::{ExperimentReport, Metric, ModelKind, SimulationReport};
use crate::error::{Error, Result};
use crate::files::{write_atomic, write_with};
use crate::stats::{roc_points, RocPoint, TestResult};
use crate::svg::{Chart, Series};

/// Paths written by [`write_report_files`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportFiles {
    pub report: PathBuf,
    pub performance: PathBuf,
    pub hyperparameters: PathBuf,
    pub comparisons: PathBuf,
    pub predictions: PathBuf,
    pub roc: Vec<PathBuf>,
    pub svg: Vec<PathBuf>,
}

impl ReportFiles {
    pub fn all(&self) -> Vec<&Path> {
        let mut v: Vec<&Path> = vec![
            &self.report,
            &self.performance,
            &self.hyperparameters,
            &self.comparisons,
            &self.predictions,
        ];
        v.extend(self.roc.iter().map(PathBuf::as_path));
        v.extend(self.svg.iter().map(PathBuf::as_path));
        v
    }
}

fn flush<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush().map_err(|e| Error::io("<csv>", e))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// `model,metric,mean,sd` (mean and sd over folds).
    pub fn write_performance_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["model", "metric", "mean", "sd"])?;
        for s in &self.performance {
            for m in Metric::ALL {
                if let Some(v) = s.get(m) {
                    w.write_record([s.model.name(), m.name(), &v.mean.to_string(), &v.sd.to_string()])?;
                }
            }
        }
        flush(w)
    }

    /// Per-fold thresholds, ensemble settings and feature counts.
    pub fn write_hyperparameters_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "fold",
            "std_threshold",
            "midway_threshold",
            "scaling_weight",
            "stage1_n_models",
            "stage1_sample_fraction",
            "stage1_alpha",
            "stage1_lambda",
            "stage1_n_features",
            "stage2_n_models",
            "stage2_sample_fraction",
            "stage2_alpha",
            "stage2_lambda",
            "stage2_n_features",
            "escalation_fraction",
        ])?;
        for f in &self.folds {
            let t = f.model.thresholds;
            let mut row = vec![
                f.fold.to_string(),
                t.std_threshold.to_string(),
                t.midway_threshold.to_string(),
                t.scaling_weight.to_string(),
            ];
            for s in [&f.model.stage1, &f.model.stage2] {
                let c = s.ensemble.config;
                row.extend([
                    c.n_models.to_string(),
                    c.sample_fraction.to_string(),
                    c.base.alpha.to_string(),
                    c.base.lambda.to_string(),
                    s.features().len().to_string(),
                ]);
            }
            row.push(f.escalation_fraction.to_string());
            w.write_record(&row)?;
        }
        flush(w)
    }

    /// `model_a,model_b,test,statistic,p_value`.
    pub fn write_comparisons_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["model_a", "model_b", "test", "statistic", "p_value"])?;
        for c in &self.comparisons {
            let rows: [(&str, Option<&TestResult>); 3] = [
                ("delong_auc", c.delong.as_ref()),
                ("mcnemar_sensitivity", Some(&c.mcnemar_sensitivity)),
                ("mcnemar_specificity", Some(&c.mcnemar_specificity)),
            ];
            for (name, r) in rows {
                let (stat, p) = match r {
                    Some(r) => (r.statistic.to_string(), r.p_value.to_string()),
                    None => ("NA".to_string(), "NA".to_string()),
                };
                w.write_record([c.model_a.as_str(), c.model_b.as_str(), name, &stat, &p])?;
            }
        }
        flush(w)
    }

    /// One row per test record with both stage outputs and the routing.
    pub fn write_predictions_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "fold",
            "id",
            "label",
            "stage1_mean",
            "stage1_std",
            "stage2_mean",
            "stage2_std",
            "stage_used",
            "reason",
            "multi_stage",
            "guideline",
            "guideline_trace",
        ])?;
        for f in &self.folds {
            for s in &f.samples {
                let reason = serde_json::to_value(s.reason)?;
                w.write_record([
                    f.fold.to_string(),
                    s.id.clone(),
                    s.label.to_string(),
                    s.stage1_mean.to_string(),
                    s.stage1_std.to_string(),
                    s.stage2_mean.to_string(),
                    s.stage2_std.to_string(),
                    s.stage_used.to_string(),
                    reason.as_str().unwrap_or_default().to_string(),
                    s.multi_stage.to_string(),
                    s.guideline.to_string(),
                    s.guideline_trace.clone(),
                ])?;
            }
        }
        flush(w)
    }

    /// ROC points per scored model: `None` pools all folds.
    pub fn roc(&self, model: ModelKind, fold: Option<usize>) -> Result<Vec<RocPoint>> {
        let samples: Vec<_> = self
            .folds
            .iter()
            .filter(|f| fold.is_none_or(|k| f.fold == k))
            .flat_map(|f| &f.samples)
            .collect();
        let labels: Vec<u8> = samples.iter().map(|s| s.label).collect();
        let scores: Option<Vec<f64>> = samples.iter().map(|s| s.score(model)).collect();
        let scores = scores.ok_or_else(|| Error::InvalidArgument(format!("{} has no scores", model.name())))?;
        roc_points(&labels, &scores)
    }
}

pub fn write_roc_csv<W: Write>(points: &[RocPoint], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["fpr", "tpr"])?;
    for p in points {
        w.write_record([p.fpr.to_string(), p.tpr.to_string()])?;
    }
    flush(w)
}

fn roc_chart(report: &ExperimentReport) -> Result<Chart> {
    let series = ModelKind::ALL
        .iter()
        .filter(|m| m.has_score())
        .map(|&m| -> Result<Series> {
            let pooled = report.pooled.iter().find(|p| p.model == m).map(|p| p.auc);
            Ok(Series {
                name: format!("{} (AUC {})", m.name(), opt(pooled.map(|a| (a * 1000.0).round() / 1000.0))),
                points: report.roc(m, None)?.iter().map(|p| (p.fpr, p.tpr)).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Chart {
        title: "Pooled test-fold ROC".into(),
        x_label: "False positive rate".into(),
        y_label: "True positive rate".into(),
        x_range: (0.0, 1.0),
        y_range: (0.0, 1.0),
        diagonal: true,
        series,
    })
}

/// Write the JSON report, CSV tables and ROC files under `dir`.
pub fn write_report_files(report: &ExperimentReport, dir: &Path, svg: bool) -> Result<ReportFiles> {
    let mut files = ReportFiles {
        report: dir.join("report.json"),
        performance: dir.join("performance.csv"),
        hyperparameters: dir.join("hyperparameters.csv"),
        comparisons: dir.join("comparisons.csv"),
        predictions: dir.join("predictions.csv"),
        ..Default::default()
    };
    write_atomic(&files.report, report.to_json()?.as_bytes())?;
    write_with(&files.performance, |b| report.write_performance_csv(b))?;
    write_with(&files.hyperparameters, |b| report.write_hyperparameters_csv(b))?;
    write_with(&files.comparisons, |b| report.write_comparisons_csv(b))?;
    write_with(&files.predictions, |b| report.write_predictions_csv(b))?;
    let roc_dir = dir.join("roc");
    for m in ModelKind::ALL.iter().filter(|m| m.has_score()) {
        let mut targets = vec![(roc_dir.join(format!("pooled_{}.csv", m.name())), None)];
        for f in &report.folds {
            targets.push((roc_dir.join(format!("fold{}_{}.csv", f.fold, m.name())), Some(f.fold)));
        }
        for (path, fold) in targets {
            let points = report.roc(*m, fold)?;
            write_with(&path, |b| write_roc_csv(&points, b))?;
            files.roc.push(path);
        }
    }
    if svg {
        let path = roc_dir.join("pooled_roc.svg");
        write_atomic(&path, roc_chart(report)?.render().as_bytes())?;
        files.svg.push(path);
    }
    Ok(files)
}

impl SimulationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Mean AUC against training fraction per model.
    pub fn chart(&self, metric: &str) -> Chart {
        let series = [ModelKind::MultiStage, ModelKind::Ensemble1, ModelKind::Ensemble2]
            .iter()
            .map(|&m| Series {
                name: m.name().to_string(),
                points: self
                    .summary
                    .iter()
                    .filter(|s| s.model == m && s.metric == metric && s.value.mean.is_finite())
                    .map(|s| (s.fraction, s.value.mean))
                    .collect(),
            })
            .collect();
        Chart {
            title: format!("Sample-size simulation: {metric}"),
            x_label: "Fraction of training fold".into(),
            y_label: format!("Mean {metric}"),
            x_range: (0.0, 1.0),
            y_range: (0.0, 1.0),
            diagonal: false,
            series,
        }
    }
}
