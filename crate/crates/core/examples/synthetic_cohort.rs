//! Generate a cohort from the built-in clinical parameters, describe it and split it.
//!
//! `cargo run --example synthetic_cohort -- [n] [seed]`

use cascade_uq::cohort::{
    cohort_summary, slice_validation_positions, stratified_kfold, synthesize_cohort, write_cohort_csv, SyntheticSpec,
};

fn main() -> cascade_uq::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(218);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(7);

    let cohort = synthesize_cohort(&SyntheticSpec::table1(), n, seed)?;
    println!("{} records, {} responders", cohort.len(), cohort.positives());

    let summary = cohort_summary(&cohort)?;
    println!("\n{:<14} {:>18} {:>18} {:>8}", "feature", "responders", "non-responders", "p");
    for row in summary.rows.iter().filter(|r| r.p_value.is_some_and(|p| p < 0.05)) {
        println!(
            "{:<14} {:>18} {:>18} {:>8.4}",
            row.feature,
            row.responders,
            row.non_responders,
            row.p_value.unwrap()
        );
    }

    let plan = stratified_kfold(&cohort, 10, seed)?;
    println!("\nfold sizes {:?}", plan.fold_sizes());
    let train = plan.train_positions(0);
    let labels: Vec<u8> = train.iter().map(|&i| cohort.records[i].label).collect();
    let slices = slice_validation_positions(&labels, (20, 20), seed)?;
    println!(
        "fold 0: {} train -> {} core / {} val1 / {} val2",
        train.len(),
        slices.core_train.len(),
        slices.val1.len(),
        slices.val2.len()
    );

    let mut csv = Vec::new();
    write_cohort_csv(&cohort, &mut csv)?;
    let text = String::from_utf8_lossy(&csv);
    println!("\nfirst CSV lines:");
    for line in text.lines().take(3) {
        println!("{}", &line[..line.len().min(110)]);
    }
    Ok(())
}
