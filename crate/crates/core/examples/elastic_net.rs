//! Elastic-net logistic regression along a warm-started penalty path.
//!
//! `cargo run --example elastic_net`

use cascade_uq::glm::{fit_elastic_net_from, penalized_objective, predict_proba, ElasticNetConfig};
use cascade_uq::stats::auc;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> cascade_uq::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (n, p) = (300, 8);
    let truth = [1.5, -1.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0];
    let x = Array2::from_shape_fn((n, p), |_| rng.sample::<f64, _>(StandardNormal));
    let y: Vec<u8> = x
        .rows()
        .into_iter()
        .map(|row| {
            let eta: f64 = row.iter().zip(&truth).map(|(a, b)| a * b).sum();
            u8::from(rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp()))
        })
        .collect();

    println!("{:>8} {:>6} {:>10} {:>7}  coefficients", "lambda", "nnz", "objective", "auc");
    let mut warm: Option<(f64, Vec<f64>)> = None;
    for lambda in [0.3, 0.1, 0.03, 0.01, 0.003, 0.001] {
        let cfg = ElasticNetConfig::new(0.9, lambda);
        let start = warm.as_ref().map(|(b0, b)| (*b0, b.as_slice()));
        let model = fit_elastic_net_from(x.view(), &y, &cfg, start, None)?;
        let probs = x.rows().into_iter().map(|r| predict_proba(&model, r.as_slice().unwrap())).collect::<Result<Vec<_>, _>>()?;
        let coefs: Vec<String> = model.coefficients.iter().map(|b| format!("{b:+.2}")).collect();
        println!(
            "{lambda:>8} {:>6} {:>10.5} {:>7.3}  {}",
            model.coefficients.iter().filter(|&&b| b != 0.0).count(),
            penalized_objective(&model, x.view(), &y, &cfg)?,
            auc(&y, &probs)?,
            coefs.join(" ")
        );
        warm = Some((model.intercept, model.coefficients));
    }
    Ok(())
}
