//! Pseudo-bootstrapped ensembles: tuned size and sample fraction, and per-sample
//! mean and standard deviation of the member probabilities.
//!
//! `cargo run --example ensemble_uncertainty`

use cascade_uq::ensemble::{fit_ensemble, predict_uncertain_batch, tune_ensemble, EnsembleGrids, InnerCv};
use cascade_uq::glm::ElasticNetConfig;
use ndarray::{s, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> cascade_uq::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (n, p) = (180, 5);
    let x = Array2::from_shape_fn((n, p), |_| rng.sample::<f64, _>(StandardNormal));
    let y: Vec<u8> = x
        .rows()
        .into_iter()
        .map(|r| u8::from(r[0] - 0.7 * r[1] + 0.8 * rng.sample::<f64, _>(StandardNormal) > 0.0))
        .collect();
    let names: Vec<String> = (0..p).map(|j| format!("x{j}")).collect();
    let (train, test) = (x.slice(s![..140, ..]), x.slice(s![140.., ..]));

    let grids = EnsembleGrids {
        n_models: vec![5, 15, 25],
        sample_fractions: vec![0.6, 0.8, 0.95],
        alphas: vec![0.5],
        lambdas: vec![0.1, 0.01],
    };
    let base = ElasticNetConfig::default();
    let tuning = tune_ensemble(train, &y[..140], &names, &grids, &base, &InnerCv { folds: 5, seed: 1 })?;
    let b = tuning.best;
    println!(
        "best: M={} phi={} alpha={} lambda={} inner AUC {:.3} ({} cells)",
        b.n_models,
        b.sample_fraction,
        b.alpha,
        b.lambda,
        b.score,
        tuning.cells.len()
    );

    let ensemble = fit_ensemble(train, &y[..140], &names, &tuning.config(base, 2))?;
    let preds = predict_uncertain_batch(&ensemble, test)?;
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| preds[b].std.total_cmp(&preds[a].std));
    println!("\nmost and least certain test samples:");
    for &i in order.iter().take(4).chain(order.iter().rev().take(4)) {
        println!("  sample {i:>2} label {} mean {:.3} std {:.3}", y[140 + i], preds[i].mean, preds[i].std);
    }
    Ok(())
}
