//! Command-line front end.
//!
//! Settings come from flags, then from the command's section of an optional
//! TOML config file, then from defaults. Every output file is written
//! atomically.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::cascade::ThresholdGrids;
use crate::cohort::{cohort_summary, load_cohort, synthesize_cohort, write_cohort_csv, Cohort, Schema, Stage, SyntheticSpec};
use crate::ensemble::EnsembleGrids;
use crate::error::{Error, Result};
use crate::files::{write_atomic, write_with};
use crate::importance::{coefficient_importance, permutation_importance, ImportanceMethod, InputBlock, PermutationTask, ProbabilityModel};
use crate::pipeline::{
    run_nested_cv, sample_size_simulation, write_report_files, ExperimentConfig, ExperimentReport, ModelKind,
    SimulationConfig,
};

#[derive(Debug, Parser)]
#[command(name = "cascade-uq", version, about = "Uncertainty-gated two-stage classification")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "CASCADE_UQ_JOBS")]
    pub jobs: Option<usize>,

    /// TOML file with one section per command.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic cohort CSV.
    Gen(GenArgs),
    /// Run nested cross-validation and write the report files.
    Cv(CvArgs),
    /// Run the sample-size simulation.
    Simulate(SimulateArgs),
    /// Feature importance from a saved report.
    Importance(ImportanceArgs),
    /// Per-class descriptive table of a cohort.
    Summary(SummaryArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Synthetic spec (TOML); the built-in clinical spec when omitted.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub outer_folds: Option<usize>,
    /// Also render SVG charts.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub outer_folds: Option<usize>,
    /// Comma-separated training fractions.
    #[arg(long, value_delimiter = ',')]
    pub fractions: Option<Vec<f64>>,
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Use the training rows as they are instead of resampling.
    #[arg(long)]
    pub no_resample: bool,
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct ImportanceArgs {
    /// `report.json` written by `cv`.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Cohort CSV; needed for the permutation method.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// coefficient or permutation.
    #[arg(long)]
    pub method: Option<String>,
    /// multi_stage, ensemble1 or ensemble2.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SummaryArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    gen: GenSection,
    #[serde(default)]
    cv: ExperimentSection,
    #[serde(default)]
    simulate: ExperimentSection,
    #[serde(default)]
    importance: ImportanceSection,
    #[serde(default)]
    summary: SummarySection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenSection {
    spec: Option<PathBuf>,
    n: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    data: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    svg: Option<bool>,
    outer_folds: Option<usize>,
    inner_folds: Option<usize>,
    validation_sizes: Option<[usize; 2]>,
    feature_selection: Option<bool>,
    classification_threshold: Option<f64>,
    confidence_level: Option<f64>,
    alpha: Option<f64>,
    lambda: Option<f64>,
    tolerance: Option<f64>,
    max_iterations: Option<usize>,
    n_models: Option<Vec<usize>>,
    sample_fractions: Option<Vec<f64>>,
    alphas: Option<Vec<f64>>,
    lambdas: Option<Vec<f64>>,
    std_thresholds: Option<Vec<f64>>,
    midway_thresholds: Option<Vec<f64>>,
    scaling_weights: Option<Vec<f64>>,
    // simulate only
    fractions: Option<Vec<f64>>,
    repeats: Option<usize>,
    resample: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ImportanceSection {
    report: Option<PathBuf>,
    data: Option<PathBuf>,
    method: Option<String>,
    model: Option<String>,
    repeats: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SummarySection {
    data: Option<PathBuf>,
    out: Option<PathBuf>,
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("missing required setting `{flag}`")))
}

impl ExperimentSection {
    fn experiment(&self, seed: Option<u64>, outer_folds: Option<usize>) -> ExperimentConfig {
        let d = ExperimentConfig::default();
        let grids = EnsembleGrids::default();
        let thresholds = ThresholdGrids::default();
        let mut base = d.base;
        base.alpha = self.alpha.unwrap_or(base.alpha);
        base.lambda = self.lambda.unwrap_or(base.lambda);
        base.tolerance = self.tolerance.unwrap_or(base.tolerance);
        base.max_iterations = self.max_iterations.unwrap_or(base.max_iterations);
        ExperimentConfig {
            outer_folds: outer_folds.or(self.outer_folds).unwrap_or(d.outer_folds),
            validation_sizes: self.validation_sizes.unwrap_or(d.validation_sizes),
            inner_folds: self.inner_folds.unwrap_or(d.inner_folds),
            ensemble_grids: EnsembleGrids {
                n_models: self.n_models.clone().unwrap_or(grids.n_models),
                sample_fractions: self.sample_fractions.clone().unwrap_or(grids.sample_fractions),
                alphas: self.alphas.clone().unwrap_or(grids.alphas),
                lambdas: self.lambdas.clone().unwrap_or(grids.lambdas),
            },
            threshold_grids: ThresholdGrids {
                std_thresholds: self.std_thresholds.clone().unwrap_or(thresholds.std_thresholds),
                midway_thresholds: self.midway_thresholds.clone().unwrap_or(thresholds.midway_thresholds),
                scaling_weights: self.scaling_weights.clone().unwrap_or(thresholds.scaling_weights),
            },
            base,
            feature_selection: self.feature_selection.unwrap_or(d.feature_selection),
            seed: seed.or(self.seed).unwrap_or(d.seed),
            classification_threshold: self.classification_threshold.unwrap_or(d.classification_threshold),
            confidence_level: self.confidence_level.unwrap_or(d.confidence_level),
        }
    }

    fn reject_simulation_keys(&self) -> Result<()> {
        for (key, set) in [
            ("fractions", self.fractions.is_some()),
            ("repeats", self.repeats.is_some()),
            ("resample", self.resample.is_some()),
        ] {
            if set {
                return Err(Error::Config(format!("`{key}` is not a [cv] setting")));
            }
        }
        Ok(())
    }
}

fn load_data(path: &Path) -> Result<Cohort> {
    let load = load_cohort(path, &Schema::crt())?;
    if !load.exclusions.is_empty() {
        eprintln!(
            "excluded {} record(s) with missing values from {}",
            load.exclusions.len(),
            path.display()
        );
    }
    Ok(load.cohort)
}

fn cmd_gen(args: GenArgs, file: GenSection) -> Result<()> {
    let spec = match args.spec.or(file.spec) {
        Some(p) => SyntheticSpec::from_path(p)?,
        None => SyntheticSpec::table1(),
    };
    let n = required(args.n.or(file.n), "n")?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let out = required(args.out.or(file.out), "out")?;
    let cohort = synthesize_cohort(&spec, n, seed)?;
    write_with(&out, |buf| write_cohort_csv(&cohort, buf))?;
    println!(
        "wrote {} records (prevalence {:.3}) to {}",
        cohort.len(),
        cohort.positives() as f64 / cohort.len() as f64,
        out.display()
    );
    Ok(())
}

fn cmd_cv(args: CvArgs, file: ExperimentSection) -> Result<()> {
    file.reject_simulation_keys()?;
    let config = file.experiment(args.seed, args.outer_folds);
    config.validate()?;
    let data = required(args.data.or(file.data.clone()), "data")?;
    let out = required(args.out.or(file.out.clone()), "out")?;
    let cohort = load_data(&data)?;
    let report = run_nested_cv(&cohort, &config)?;
    for f in &report.failed {
        eprintln!("fold {} failed: {}", f.fold, f.error);
    }
    let files = write_report_files(&report, &out, args.svg || file.svg.unwrap_or(false))?;
    let ms = report.summary(ModelKind::MultiStage);
    println!(
        "{} folds, multi-stage AUC {:.3}, escalation {:.3}; {} files in {}",
        report.folds.len(),
        ms.auc.map_or(f64::NAN, |a| a.mean),
        report.escalation.overall,
        files.all().len(),
        out.display()
    );
    Ok(())
}

fn cmd_simulate(args: SimulateArgs, file: ExperimentSection) -> Result<()> {
    let config = file.experiment(args.seed, args.outer_folds);
    config.validate()?;
    let d = SimulationConfig::default();
    let simulation = SimulationConfig {
        fractions: args.fractions.or(file.fractions.clone()).unwrap_or(d.fractions),
        repeats: args.repeats.or(file.repeats).unwrap_or(d.repeats),
        resample: if args.no_resample { false } else { file.resample.unwrap_or(d.resample) },
    };
    simulation.validate()?;
    let data = required(args.data.or(file.data.clone()), "data")?;
    let out = required(args.out.or(file.out.clone()), "out")?;
    let cohort = load_data(&data)?;
    let report = sample_size_simulation(&cohort, &config, &simulation)?;
    write_atomic(out.join("simulation.json"), report.to_json()?.as_bytes())?;
    write_with(out.join("sample_size_summary.csv"), |b| report.write_summary_csv(b))?;
    write_with(out.join("sample_size_runs.csv"), |b| report.write_runs_csv(b))?;
    if args.svg || file.svg.unwrap_or(false) {
        write_atomic(out.join("sample_size_auc.svg"), report.chart("auc").render().as_bytes())?;
    }
    let skipped = report.runs.iter().filter(|r| r.error.is_some()).count();
    println!(
        "{} runs ({} skipped) over {} fractions; results in {}",
        report.runs.len(),
        skipped,
        simulation.fractions.len(),
        out.display()
    );
    Ok(())
}

fn parse_model(name: &str) -> Result<ModelKind> {
    ModelKind::ALL
        .into_iter()
        .filter(ModelKind::has_score)
        .find(|m| m.name() == name)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown model `{name}` (multi_stage, ensemble1, ensemble2)")))
}

fn cmd_importance(args: ImportanceArgs, file: ImportanceSection) -> Result<()> {
    let method: ImportanceMethod = required(args.method.or(file.method), "method")?.parse()?;
    let model = parse_model(&args.model.or(file.model).unwrap_or_else(|| "ensemble2".into()))?;
    let report_path = required(args.report.or(file.report), "report")?;
    let out = required(args.out.or(file.out), "out")?;
    let text = std::fs::read_to_string(&report_path).map_err(|e| Error::io(&report_path, e))?;
    let report = ExperimentReport::from_json(&text)?;
    let schema = Schema::crt();
    let universe = schema.model_inputs(if model == ModelKind::Ensemble1 { Stage::One } else { Stage::Two });

    let result = match method {
        ImportanceMethod::Coefficient => {
            if model == ModelKind::MultiStage {
                return Err(Error::InvalidArgument(
                    "coefficient importance is defined per ensemble (ensemble1 or ensemble2)".into(),
                ));
            }
            let ensembles: Vec<_> = report
                .folds
                .iter()
                .map(|f| match model {
                    ModelKind::Ensemble1 => &f.model.stage1.ensemble,
                    _ => &f.model.stage2.ensemble,
                })
                .collect();
            coefficient_importance(&ensembles, &universe)?
        }
        ImportanceMethod::Permutation => {
            let data = required(args.data.or(file.data), "data")?;
            let cohort = load_data(&data)?;
            let by_id: BTreeMap<&str, _> = cohort.records.iter().map(|r| (r.id.as_str(), r)).collect();
            let mut tasks = Vec::new();
            for f in &report.folds {
                let records = f
                    .samples
                    .iter()
                    .map(|s| {
                        by_id
                            .get(s.id.as_str())
                            .copied()
                            .ok_or_else(|| Error::InvalidArgument(format!("record `{}` is not in {}", s.id, data.display())))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let block = |stage: &crate::cascade::StageModel| -> Result<InputBlock> {
                    Ok(InputBlock {
                        names: stage.features().to_vec(),
                        data: stage.preprocessor.transform_records(records.iter().copied())?,
                    })
                };
                let (m, blocks): (&dyn ProbabilityModel, Vec<InputBlock>) = match model {
                    ModelKind::Ensemble1 => (&f.model.stage1.ensemble, vec![block(&f.model.stage1)?]),
                    ModelKind::Ensemble2 => (&f.model.stage2.ensemble, vec![block(&f.model.stage2)?]),
                    _ => (&f.model, vec![block(&f.model.stage1)?, block(&f.model.stage2)?]),
                };
                tasks.push(PermutationTask {
                    model: m,
                    blocks,
                    labels: records.iter().map(|r| r.label).collect(),
                });
            }
            let repeats = args.repeats.or(file.repeats).unwrap_or(5);
            permutation_importance(&tasks, &universe, repeats, args.seed.or(file.seed).unwrap_or(0))?
        }
    };
    write_with(&out, |b| result.write_csv(b))?;
    let top: Vec<String> = result.by_rank().iter().take(5).map(|f| f.feature.clone()).collect();
    println!("{} importance for {}: top {}", method.as_str(), model.name(), top.join(", "));
    Ok(())
}

fn cmd_summary(args: SummaryArgs, file: SummarySection) -> Result<()> {
    let data = required(args.data.or(file.data), "data")?;
    let out = required(args.out.or(file.out), "out")?;
    let cohort = load_data(&data)?;
    let summary = cohort_summary(&cohort)?;
    write_with(&out, |b| summary.write_csv(b))?;
    println!(
        "{} records, {} responders; {} variables in {}",
        summary.n,
        summary.responders,
        summary.rows.len(),
        out.display()
    );
    Ok(())
}

/// Execute a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    let file = load_config(cli.config.as_deref())?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(Error::InvalidArgument("--jobs must be >= 1".into()));
        }
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Gen(a) => cmd_gen(a, file.gen),
        Command::Cv(a) => cmd_cv(a, file.cv),
        Command::Simulate(a) => cmd_simulate(a, file.simulate),
        Command::Importance(a) => cmd_importance(a, file.importance),
        Command::Summary(a) => cmd_summary(a, file.summary),
    })
}

/// Exit status for an outcome: 0 success, 1 runtime failure, 2 usage or validation error.
pub fn exit_code(result: &Result<()>) -> i32 {
    match result {
        Ok(()) => 0,
        Err(e) if e.is_validation() => 2,
        Err(_) => 1,
    }
}
