//! AUC confidence intervals and paired comparisons of two classifiers.
//!
//! `cargo run --example model_comparison`

use cascade_uq::stats::{
    chi_square_independence, classification_metrics, delong_ci, delong_paired_test, mcnemar, two_sample_t,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> cascade_uq::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let labels: Vec<u8> = (0..218).map(|_| u8::from(rng.random::<f64>() < 0.555)).collect();
    let signal: Vec<f64> = labels.iter().map(|&l| f64::from(l) + rng.sample::<f64, _>(StandardNormal)).collect();
    let logistic = |z: f64| 1.0 / (1.0 + (-z).exp());
    let strong: Vec<f64> = signal.iter().map(|&z| logistic(1.6 * z - 0.8)).collect();
    let weak: Vec<f64> = signal
        .iter()
        .map(|&z| logistic(0.6 * z + 0.9 * rng.sample::<f64, _>(StandardNormal) - 0.3))
        .collect();

    for (name, scores) in [("strong", &strong), ("weak", &weak)] {
        let ci = delong_ci(&labels, scores, 0.95)?;
        let bounds = ci.ci.unwrap();
        let m = classification_metrics(&labels, scores, 0.5)?;
        println!(
            "{name:<7} AUC {:.3} [{:.3}, {:.3}]  acc {:.3} sens {:.3} spec {:.3}",
            ci.estimate.unwrap(),
            bounds.lower,
            bounds.upper,
            m.accuracy,
            m.sensitivity,
            m.specificity
        );
    }

    let d = delong_paired_test(&labels, &strong, &weak)?;
    println!("\npaired DeLong z = {:.3}, p = {:.4}", d.statistic, d.p_value);
    let correct = |s: &[f64]| -> Vec<bool> { s.iter().zip(&labels).map(|(&p, &l)| u8::from(p >= 0.5) == l).collect() };
    let mc = mcnemar(&correct(&strong), &correct(&weak))?;
    println!("McNemar ({}) discordant {:?}, p = {:.4}", mc.method, mc.discordant.unwrap(), mc.p_value);

    let (pos, neg): (Vec<f64>, Vec<f64>) = {
        let p = signal.iter().zip(&labels).filter(|(_, &l)| l == 1).map(|(&s, _)| s).collect();
        let n = signal.iter().zip(&labels).filter(|(_, &l)| l == 0).map(|(&s, _)| s).collect();
        (p, n)
    };
    let t = two_sample_t(&pos, &neg)?;
    println!("Welch t = {:.3}, p = {:.2e}", t.statistic, t.p_value);
    let chi = chi_square_independence([[30, 10], [15, 25]])?;
    println!("chi-square [[30,10],[15,25]] = {:.4}, p = {:.4}", chi.statistic, chi.p_value);
    Ok(())
}
