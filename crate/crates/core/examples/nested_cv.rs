//! Full nested cross-validation on a synthetic cohort: the Table 2 analog.
//!
//! `cargo run --release --example nested_cv -- [n] [seed]`

use std::time::Instant;

use cascade_uq::cohort::{synthesize_cohort, SyntheticSpec};
use cascade_uq::pipeline::{run_nested_cv, ExperimentConfig, Metric, ModelKind};

fn main() -> cascade_uq::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(218);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(7);

    let cohort = synthesize_cohort(&SyntheticSpec::table1(), n, seed)?;
    let config = ExperimentConfig {
        seed,
        ..Default::default()
    };
    let start = Instant::now();
    let report = run_nested_cv(&cohort, &config)?;
    println!("{} folds in {:.1?} ({} failed)", report.folds.len(), start.elapsed(), report.failed.len());

    println!("{:<12} {:>14} {:>14} {:>14} {:>14}", "model", "auc", "accuracy", "sensitivity", "specificity");
    for model in ModelKind::ALL {
        let s = report.summary(model);
        let cell = |m: Metric| {
            s.get(m)
                .map(|v| format!("{:.2} ({:.2})", v.mean, v.sd))
                .unwrap_or_else(|| "n/a".into())
        };
        println!(
            "{:<12} {:>14} {:>14} {:>14} {:>14}",
            model.name(),
            cell(Metric::Auc),
            cell(Metric::Accuracy),
            cell(Metric::Sensitivity),
            cell(Metric::Specificity)
        );
    }
    let e = &report.escalation;
    println!(
        "escalated {}/{} = {:.3} (quartiles {:.3} / {:.3} / {:.3})",
        e.escalated, e.total, e.overall, e.q1, e.median, e.q3
    );
    for f in &report.folds {
        let t = f.model.thresholds;
        println!(
            "fold {}: sigma {:.2} tau {:.2} s {:<3} | E1 {} ({:.2}) {} feats | E2 {} ({:.2}) {} feats",
            f.fold,
            t.std_threshold,
            t.midway_threshold,
            t.scaling_weight,
            f.model.stage1.ensemble.config.n_models,
            f.model.stage1.ensemble.config.sample_fraction,
            f.model.stage1.features().len(),
            f.model.stage2.ensemble.config.n_models,
            f.model.stage2.ensemble.config.sample_fraction,
            f.model.stage2.features().len(),
        );
    }
    Ok(())
}
