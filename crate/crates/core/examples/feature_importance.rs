//! Coefficient and permutation importance over the folds of a nested CV run.
//!
//! `cargo run --release --example feature_importance`

use cascade_uq::cohort::{synthesize_cohort, Stage, SyntheticSpec};
use cascade_uq::ensemble::EnsembleGrids;
use cascade_uq::importance::{coefficient_importance, permutation_importance, InputBlock, PermutationTask};
use cascade_uq::pipeline::{fold_plan, run_nested_cv, ExperimentConfig};

fn main() -> cascade_uq::Result<()> {
    let cohort = synthesize_cohort(&SyntheticSpec::table1(), 218, 6)?;
    let config = ExperimentConfig {
        outer_folds: 5,
        ensemble_grids: EnsembleGrids {
            n_models: vec![10, 20],
            sample_fractions: vec![0.9],
            alphas: vec![0.5],
            lambdas: vec![0.1, 0.01],
        },
        seed: 6,
        ..Default::default()
    };
    let report = run_nested_cv(&cohort, &config)?;
    let universe = cohort.schema.model_inputs(Stage::Two);

    let ensembles: Vec<_> = report.folds.iter().map(|f| &f.model.stage2.ensemble).collect();
    let coef = coefficient_importance(&ensembles, &universe)?;
    println!("ensemble 2, mean |coefficient|:");
    for f in coef.by_rank().iter().take(8) {
        println!("  {:>2}. {:<14} {:.3}", f.rank, f.feature, f.overall);
    }

    let plan = fold_plan(&cohort, &config)?;
    let tasks = report
        .folds
        .iter()
        .map(|f| {
            let test: Vec<_> = plan.test_positions(f.fold).iter().map(|&i| &cohort.records[i]).collect();
            let block = |stage: &cascade_uq::cascade::StageModel| -> cascade_uq::Result<InputBlock> {
                Ok(InputBlock {
                    names: stage.features().to_vec(),
                    data: stage.preprocessor.transform_records(test.iter().copied())?,
                })
            };
            Ok(PermutationTask {
                model: &f.model,
                blocks: vec![block(&f.model.stage1)?, block(&f.model.stage2)?],
                labels: test.iter().map(|r| r.label).collect(),
            })
        })
        .collect::<cascade_uq::Result<Vec<_>>>()?;
    let perm = permutation_importance(&tasks, &universe, 5, 1)?;
    println!("\nmulti-stage model, mean AUC drop when shuffled:");
    for f in perm.by_rank().iter().take(8) {
        println!("  {:>2}. {:<14} {:+.3}", f.rank, f.feature, f.overall);
    }
    Ok(())
}
