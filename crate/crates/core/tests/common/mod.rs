//! Independent reference implementations and fixtures shared by the integration tests.
#![allow(dead_code)]

use cascade_uq::cascade::ThresholdGrids;
use cascade_uq::cohort::{synthesize_cohort, Cohort, SyntheticSpec};
use cascade_uq::ensemble::EnsembleGrids;
use cascade_uq::pipeline::ExperimentConfig;
use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Pairwise count of positive-over-negative wins, ties counted one half.
pub fn brute_force_auc(labels: &[u8], scores: &[f64]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &li) in labels.iter().enumerate() {
        if li != 1 {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj != 0 {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// Unpenalized logistic regression by Newton-Raphson; returns (intercept, coefficients).
pub fn irls_oracle(x: ArrayView2<f64>, y: &[u8]) -> (f64, Vec<f64>) {
    let (n, p) = x.dim();
    let mut theta = vec![0.0; p + 1];
    for _ in 0..100 {
        let mut grad = vec![0.0; p + 1];
        let mut hess = vec![vec![0.0; p + 1]; p + 1];
        for i in 0..n {
            let mut row = vec![1.0];
            row.extend(x.row(i).iter());
            let eta: f64 = row.iter().zip(&theta).map(|(a, b)| a * b).sum();
            let mu = 1.0 / (1.0 + (-eta).exp());
            let w = mu * (1.0 - mu);
            for a in 0..=p {
                grad[a] += (f64::from(y[i]) - mu) * row[a];
                for b in 0..=p {
                    hess[a][b] += w * row[a] * row[b];
                }
            }
        }
        let step = solve(hess, grad);
        let change = step.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        theta.iter_mut().zip(&step).for_each(|(t, s)| *t += s);
        if change < 1e-13 {
            break;
        }
    }
    (theta[0], theta[1..].to_vec())
}

/// Variance of the AUC over bootstrap resamples stratified by class.
pub fn bootstrap_auc_variance(labels: &[u8], scores: &[f64], reps: usize, seed: u64) -> f64 {
    let pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == 1).collect();
    let neg: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == 0).collect();
    let mut r = rng(seed);
    let mut aucs = Vec::with_capacity(reps);
    for _ in 0..reps {
        let mut l = Vec::with_capacity(labels.len());
        let mut s = Vec::with_capacity(labels.len());
        for group in [&pos, &neg] {
            for _ in 0..group.len() {
                let i = group[r.random_range(0..group.len())];
                l.push(labels[i]);
                s.push(scores[i]);
            }
        }
        aucs.push(brute_force_auc(&l, &s));
    }
    let m = aucs.iter().sum::<f64>() / reps as f64;
    aucs.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (reps - 1) as f64
}

/// Exact two-sided sign-test p-value from Pascal's triangle.
pub fn binomial_two_sided(b: u64, c: u64) -> f64 {
    let n = (b + c) as usize;
    let mut row: Vec<u128> = vec![1];
    for _ in 0..n {
        let mut next = vec![1u128; row.len() + 1];
        for k in 1..row.len() {
            next[k] = row[k - 1] + row[k];
        }
        row = next;
    }
    let tail: u128 = row[..=(b.min(c) as usize)].iter().sum();
    (2.0 * tail as f64 / 2f64.powi(n as i32)).min(1.0)
}

pub fn standard_normal_matrix(n: usize, p: usize, seed: u64) -> Array2<f64> {
    let mut r = rng(seed);
    Array2::from_shape_fn((n, p), |_| r.sample::<f64, _>(rand_distr::StandardNormal))
}

pub fn table1_cohort(n: usize, seed: u64) -> Cohort {
    synthesize_cohort(&SyntheticSpec::table1(), n, seed).expect("built-in spec is valid")
}

/// Small grids so full pipelines run in about a second.
pub fn fast_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        outer_folds: 5,
        inner_folds: 3,
        ensemble_grids: EnsembleGrids {
            n_models: vec![5, 8],
            sample_fractions: vec![0.8, 0.9],
            alphas: vec![0.5],
            lambdas: vec![0.1, 0.01],
        },
        threshold_grids: ThresholdGrids::default(),
        seed,
        ..Default::default()
    }
}

/// erf by its Maclaurin series; accurate to ~1e-15 for |x| < 3.
pub fn erf_series(x: f64) -> f64 {
    let mut term = x;
    let mut sum = x;
    for n in 1..200 {
        term *= -x * x / n as f64;
        let add = term / (2 * n + 1) as f64;
        sum += add;
        if add.abs() < 1e-18 {
            break;
        }
    }
    sum * 2.0 / std::f64::consts::PI.sqrt()
}

/// Upper tail of the chi-square distribution with one degree of freedom.
pub fn chi_square_df1_tail(x: f64) -> f64 {
    1.0 - erf_series((x / 2.0).sqrt())
}

/// Random labels with both classes present and scores drawn from a small set so ties occur.
pub fn random_tied_instance(r: &mut ChaCha8Rng, max_n: usize) -> (Vec<u8>, Vec<f64>) {
    loop {
        let n = r.random_range(2..=max_n);
        let levels = r.random_range(1..=n.max(2));
        let labels: Vec<u8> = (0..n).map(|_| r.random_range(0..2u8)).collect();
        if labels.iter().all(|&l| l == labels[0]) {
            continue;
        }
        let scores = (0..n).map(|_| r.random_range(0..levels) as f64 / levels as f64).collect();
        return (labels, scores);
    }
}

/// Random logistic problem with moderate signal so the unpenalized MLE exists.
pub fn logistic_problem(r: &mut ChaCha8Rng, n: usize, p: usize) -> (Array2<f64>, Vec<u8>) {
    loop {
        let scale: Vec<f64> = (0..p).map(|_| r.random_range(0.5..3.0)).collect();
        let x = Array2::from_shape_fn((n, p), |(_, j)| r.sample::<f64, _>(rand_distr::StandardNormal) * scale[j]);
        let beta: Vec<f64> = (0..p).map(|j| r.random_range(-0.6..0.6) / scale[j]).collect();
        let b0 = r.random_range(-0.5..0.5);
        let y: Vec<u8> = x
            .rows()
            .into_iter()
            .map(|row| {
                let eta = b0 + row.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>();
                u8::from(r.random::<f64>() < 1.0 / (1.0 + (-eta).exp()))
            })
            .collect();
        let pos = y.iter().filter(|&&v| v == 1).count();
        if pos >= 5 && n - pos >= 5 {
            return (x, y);
        }
    }
}

/// Largest violation of the elastic-net optimality conditions, computed from scratch.
pub fn kkt_residual(x: ArrayView2<f64>, y: &[u8], b0: f64, beta: &[f64], alpha: f64, lambda: f64) -> f64 {
    let (n, p) = x.dim();
    let mut g = vec![0.0; p + 1];
    for i in 0..n {
        let eta = b0 + (0..p).map(|j| x[[i, j]] * beta[j]).sum::<f64>();
        let r = 1.0 / (1.0 + (-eta).exp()) - f64::from(y[i]);
        g[0] += r / n as f64;
        for j in 0..p {
            g[j + 1] += r * x[[i, j]] / n as f64;
        }
    }
    let mut worst = g[0].abs();
    for j in 0..p {
        let smooth = g[j + 1] + lambda * (1.0 - alpha) * beta[j];
        let v = if beta[j] != 0.0 {
            (smooth + lambda * alpha * beta[j].signum()).abs()
        } else {
            (smooth.abs() - lambda * alpha).max(0.0)
        };
        worst = worst.max(v);
    }
    worst
}
