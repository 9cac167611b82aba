//! Train one outer fold, inspect the tuned gate and route held-out patients.
//!
//! `cargo run --release --example cascade_routing`

use cascade_uq::cascade::predict_cascade;
use cascade_uq::cohort::{synthesize_cohort, SyntheticSpec};
use cascade_uq::ensemble::EnsembleGrids;
use cascade_uq::pipeline::{fold_plan, run_fold, ExperimentConfig, RunOptions};

fn main() -> cascade_uq::Result<()> {
    let cohort = synthesize_cohort(&SyntheticSpec::table1(), 218, 11)?;
    let config = ExperimentConfig {
        ensemble_grids: EnsembleGrids {
            n_models: vec![10, 25],
            sample_fractions: vec![0.8, 0.9],
            alphas: vec![0.5],
            lambdas: vec![0.1, 0.01],
        },
        seed: 11,
        ..Default::default()
    };
    let plan = fold_plan(&cohort, &config)?;
    let fold = run_fold(&cohort, &plan, 0, &config, &RunOptions::default())?;

    println!("{:>4} {:>6} {:>6} {:>8} {:>8}", "s", "sigma", "tau", "retained", "val2 AUC");
    for c in &fold.threshold_tuning.candidates {
        let t = c.thresholds;
        println!(
            "{:>4} {:>6.2} {:>6.2} {:>8.2} {:>8.3}",
            t.scaling_weight, t.std_threshold, t.midway_threshold, c.val1_retained, c.val2_auc
        );
    }
    let t = fold.model.thresholds;
    println!("chosen: s {} sigma {:.2} tau {:.2}\n", t.scaling_weight, t.std_threshold, t.midway_threshold);

    for &i in plan.test_positions(0).iter().take(10) {
        let record = &cohort.records[i];
        let d = predict_cascade(&fold.model, record)?;
        println!(
            "{:<6} label {} stage-1 {:.3} +/- {:.3} -> stage {} ({:?}) p = {:.3}",
            record.id, record.label, d.stage1_mean, d.stage1_std, d.stage_used, d.reason, d.final_probability
        );
    }

    let mut without_imaging = cohort.records[plan.test_positions(0)[0]].clone();
    without_imaging.stage2 = None;
    match predict_cascade(&fold.model, &without_imaging) {
        Ok(d) => println!("\nno imaging needed: p = {:.3}", d.final_probability),
        Err(e) => println!("\nwithout imaging: {e}"),
    }
    println!("fold escalation {}/{}", fold.escalated, fold.n_test);
    Ok(())
}
