//! How test AUC grows with the amount of training data.
//!
//! `cargo run --release --example sample_size -- [chart.svg]`

use cascade_uq::cohort::{synthesize_cohort, SyntheticSpec};
use cascade_uq::ensemble::EnsembleGrids;
use cascade_uq::files::write_atomic;
use cascade_uq::pipeline::{sample_size_simulation, ExperimentConfig, ModelKind, SimulationConfig};

fn main() -> cascade_uq::Result<()> {
    let svg = std::env::args().nth(1);
    let cohort = synthesize_cohort(&SyntheticSpec::table1(), 218, 7)?;
    let config = ExperimentConfig {
        ensemble_grids: EnsembleGrids {
            n_models: vec![10],
            sample_fractions: vec![0.9],
            alphas: vec![0.5],
            lambdas: vec![0.05],
        },
        seed: 7,
        ..Default::default()
    };
    let simulation = SimulationConfig {
        fractions: vec![0.1, 0.2, 0.4, 0.6, 0.8, 1.0],
        repeats: 2,
        resample: true,
    };
    let report = sample_size_simulation(&cohort, &config, &simulation)?;

    println!("{:>8} {:>14} {:>14} {:>14} {:>10}", "fraction", "multi_stage", "ensemble1", "ensemble2", "escalated");
    for &f in &simulation.fractions {
        let cell = |m: ModelKind, metric: &str| {
            report.get(f, m, metric).map_or("-".to_string(), |s| format!("{:.3} ({:.3})", s.value.mean, s.value.sd))
        };
        println!(
            "{f:>8} {:>14} {:>14} {:>14} {:>10}",
            cell(ModelKind::MultiStage, "auc"),
            cell(ModelKind::Ensemble1, "auc"),
            cell(ModelKind::Ensemble2, "auc"),
            report.get(f, ModelKind::MultiStage, "escalation").map_or("-".into(), |s| format!("{:.2}", s.value.mean)),
        );
    }
    if let Some(path) = svg {
        write_atomic(&path, report.chart("auc").render().as_bytes())?;
        println!("chart written to {path}");
    }
    Ok(())
}
