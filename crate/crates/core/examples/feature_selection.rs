//! Recursive feature elimination on the imaging-stage inputs.
//!
//! `cargo run --release --example feature_selection`

use cascade_uq::cohort::{synthesize_cohort, Stage, SyntheticSpec};
use cascade_uq::preprocess::{fit_scaler, matrix_from_records, rfe_select, RfeConfig};

fn main() -> cascade_uq::Result<()> {
    let cohort = synthesize_cohort(&SyntheticSpec::table1(), 218, 4)?;
    let names = cohort.schema.model_inputs(Stage::Two);
    let raw = matrix_from_records(&cohort.records, &names)?;
    let z = fit_scaler(raw.view(), &names)?.standardize(raw.view())?;
    let subset = rfe_select(z.view(), &cohort.labels(), &names, &RfeConfig::default())?;

    println!("{} of {} features kept:", subset.features.len(), names.len());
    println!("  {}", subset.features.join(", "));
    println!("\nsize  inner AUC");
    for (size, score) in subset.size_scores.iter().filter(|(s, _)| s % 5 == 0 || *s <= 5) {
        println!("{size:>4}  {score:.3}");
    }
    println!("\nfirst removals:");
    for step in subset.trace.iter().take(8) {
        println!("  -{:<14} -> {} left, AUC {:.3}", step.removed, step.size, step.score);
    }
    Ok(())
}
