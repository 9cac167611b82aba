//! Elastic-net penalized logistic regression.
//!
//! Minimizes
//!
//! ```text
//! (1/n) Σ log(1 + exp(η_i)) − y_i η_i  +  λ (α ‖β‖₁ + (1 − α)/2 ‖β‖₂²),   η_i = β₀ + x_i·β
//! ```
//!
//! with an unpenalized intercept. Each outer iteration forms the weighted
//! quadratic (IRLS) approximation at the current point and minimizes it by
//! cyclic coordinate descent with soft-thresholding; a backtracking step keeps
//! the true objective non-increasing.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PROBABILITY_FLOOR: f64 = 1e-12;
const WEIGHT_FLOOR: f64 = 1e-5;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ElasticNetConfig {
    /// L1/L2 mixing in [0,1]; 1 is lasso.
    pub alpha: f64,
    /// Penalty strength ≥ 0.
    pub lambda: f64,
    /// Cap on coordinate sweeps, summed over all outer iterations.
    pub max_iterations: usize,
    /// Convergence threshold on the max coefficient change.
    pub tolerance: f64,
}

impl Default for ElasticNetConfig {
    fn default() -> Self {
        ElasticNetConfig {
            alpha: 0.5,
            lambda: 0.01,
            max_iterations: 100_000,
            tolerance: 1e-7,
        }
    }
}

impl ElasticNetConfig {
    pub fn new(alpha: f64, lambda: f64) -> Self {
        ElasticNetConfig {
            alpha,
            lambda,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidArgument(format!("alpha {} not in [0,1]", self.alpha)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda {} must be finite and >= 0", self.lambda)));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidArgument("tolerance must be > 0".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be >= 1".into()));
        }
        Ok(())
    }

    fn l1(&self) -> f64 {
        self.lambda * self.alpha
    }

    fn l2(&self) -> f64 {
        self.lambda * (1.0 - self.alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub feature_names: Vec<String>,
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub config: ElasticNetConfig,
    pub converged: bool,
    /// Outer (IRLS) iterations taken.
    pub iterations: usize,
    /// Coordinate sweeps taken.
    pub sweeps: usize,
}

impl LogisticModel {
    /// All-zero coefficients and zero intercept.
    pub fn zero(n_features: usize, config: ElasticNetConfig) -> Self {
        LogisticModel {
            feature_names: Vec::new(),
            intercept: 0.0,
            coefficients: vec![0.0; n_features],
            config,
            converged: true,
            iterations: 0,
            sweeps: 0,
        }
    }

    pub fn n_features(&self) -> usize {
        self.coefficients.len()
    }

    pub fn linear_predictor(&self, x: &[f64]) -> f64 {
        self.intercept + dot(&self.coefficients, x)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^η) − yη, evaluated without overflow.
fn logistic_loss(eta: f64, y: f64) -> f64 {
    eta.max(0.0) + (-eta.abs()).exp().ln_1p() - y * eta
}

pub fn predict_proba(model: &LogisticModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.n_features() {
        return Err(Error::DimensionMismatch {
            expected: model.n_features(),
            actual: x.len(),
        });
    }
    Ok(sigmoid(model.linear_predictor(x)).clamp(PROBABILITY_FLOOR, 1.0 - PROBABILITY_FLOOR))
}

/// Column-major copy of the design matrix.
struct Design {
    n: usize,
    p: usize,
    cols: Vec<f64>,
}

impl Design {
    fn new(x: ArrayView2<f64>) -> Self {
        let (n, p) = x.dim();
        let mut cols = Vec::with_capacity(n * p);
        for j in 0..p {
            cols.extend(x.column(j).iter());
        }
        Design { n, p, cols }
    }

    fn col(&self, j: usize) -> &[f64] {
        &self.cols[j * self.n..(j + 1) * self.n]
    }

    fn linear_predictors(&self, b0: f64, beta: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|e| *e = b0);
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                for (e, &x) in out.iter_mut().zip(self.col(j)) {
                    *e += b * x;
                }
            }
        }
    }
}

fn objective(design: &Design, y: &[f64], b0: f64, beta: &[f64], config: &ElasticNetConfig, eta: &mut [f64]) -> f64 {
    design.linear_predictors(b0, beta, eta);
    let loss: f64 = eta.iter().zip(y).map(|(&e, &yi)| logistic_loss(e, yi)).sum::<f64>() / design.n as f64;
    let l1: f64 = beta.iter().map(|b| b.abs()).sum();
    let l2: f64 = beta.iter().map(|b| b * b).sum();
    loss + config.l1() * l1 + config.l2() / 2.0 * l2
}

fn check_inputs(x: ArrayView2<f64>, y: &[u8]) -> Result<()> {
    let (n, _) = x.dim();
    if n != y.len() {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: y.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("design matrix".into()));
    }
    if y.iter().any(|&v| v > 1) {
        return Err(Error::InvalidArgument("labels must be 0/1".into()));
    }
    let pos = y.iter().filter(|&&v| v == 1).count();
    if pos == 0 || pos == n {
        return Err(Error::SingleClass("training labels".into()));
    }
    Ok(())
}

/// Exact penalized objective of `model` on `(x, y)`.
pub fn penalized_objective(model: &LogisticModel, x: ArrayView2<f64>, y: &[u8], config: &ElasticNetConfig) -> Result<f64> {
    let (n, p) = x.dim();
    if p != model.n_features() {
        return Err(Error::DimensionMismatch {
            expected: model.n_features(),
            actual: p,
        });
    }
    if n != y.len() {
        return Err(Error::DimensionMismatch { expected: n, actual: y.len() });
    }
    let design = Design::new(x);
    let yf: Vec<f64> = y.iter().map(|&v| f64::from(v)).collect();
    let mut eta = vec![0.0; n];
    Ok(objective(&design, &yf, model.intercept, &model.coefficients, config, &mut eta))
}

/// Objective value after every accepted outer iteration (index 0 = start point).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitTrace {
    pub objectives: Vec<f64>,
}

pub fn fit_elastic_net(x: ArrayView2<f64>, y: &[u8], config: &ElasticNetConfig) -> Result<LogisticModel> {
    fit_elastic_net_from(x, y, config, None, None)
}

pub fn fit_elastic_net_with_trace(
    x: ArrayView2<f64>,
    y: &[u8],
    config: &ElasticNetConfig,
) -> Result<(LogisticModel, FitTrace)> {
    let mut trace = FitTrace::default();
    let model = fit_elastic_net_from(x, y, config, None, Some(&mut trace))?;
    Ok((model, trace))
}

/// Fit starting from `warm` (intercept, coefficients) when given.
pub fn fit_elastic_net_from(
    x: ArrayView2<f64>,
    y: &[u8],
    config: &ElasticNetConfig,
    warm: Option<(f64, &[f64])>,
    mut trace: Option<&mut FitTrace>,
) -> Result<LogisticModel> {
    config.validate()?;
    check_inputs(x, y)?;
    let design = Design::new(x);
    let (n, p) = (design.n, design.p);
    let nf = n as f64;
    let yf: Vec<f64> = y.iter().map(|&v| f64::from(v)).collect();
    let ybar = yf.iter().sum::<f64>() / nf;

    let (mut b0, mut beta) = match warm {
        Some((b, w)) if w.len() == p => (b, w.to_vec()),
        Some((_, w)) => {
            return Err(Error::DimensionMismatch {
                expected: p,
                actual: w.len(),
            })
        }
        None => ((ybar / (1.0 - ybar)).ln(), vec![0.0; p]),
    };
    let (l1, l2) = (config.l1(), config.l2());

    let mut eta = vec![0.0; n];
    let mut obj = objective(&design, &yf, b0, &beta, config, &mut eta);
    if let Some(t) = trace.as_deref_mut() {
        t.objectives.push(obj);
    }

    let mut w = vec![0.0; n];
    let mut r = vec![0.0; n];
    let mut wx2 = vec![0.0; p];
    let mut sweeps = 0usize;
    let mut iterations = 0usize;
    let mut converged = false;

    while sweeps < config.max_iterations {
        iterations += 1;
        design.linear_predictors(b0, &beta, &mut eta);
        for i in 0..n {
            let pi = sigmoid(eta[i]);
            w[i] = (pi * (1.0 - pi)).max(WEIGHT_FLOOR);
            r[i] = (yf[i] - pi) / w[i];
        }
        let w_sum: f64 = w.iter().sum();
        for (j, s) in wx2.iter_mut().enumerate() {
            *s = design.col(j).iter().zip(&w).map(|(x, wi)| wi * x * x).sum::<f64>() / nf;
        }

        let (old_b0, old_beta) = (b0, beta.clone());
        let (mut nb0, mut nbeta) = (b0, beta.clone());
        // Coordinate descent on the quadratic model; r holds the working residual.
        loop {
            sweeps += 1;
            let db0 = w.iter().zip(&r).map(|(wi, ri)| wi * ri).sum::<f64>() / w_sum;
            nb0 += db0;
            r.iter_mut().for_each(|ri| *ri -= db0);
            let mut max_change = db0.abs();
            for j in 0..p {
                let col = design.col(j);
                let denom = wx2[j] + l2;
                if denom == 0.0 {
                    continue;
                }
                let g = col.iter().zip(&w).zip(&r).map(|((x, wi), ri)| wi * x * ri).sum::<f64>() / nf;
                let z = g + wx2[j] * nbeta[j];
                let new = soft_threshold(z, l1) / denom;
                let d = new - nbeta[j];
                if d != 0.0 {
                    for (ri, &xv) in r.iter_mut().zip(col) {
                        *ri -= d * xv;
                    }
                    nbeta[j] = new;
                    max_change = max_change.max(d.abs());
                }
            }
            if max_change < config.tolerance || sweeps >= config.max_iterations {
                break;
            }
        }

        // Backtrack along the proximal-Newton direction until the objective does not rise.
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let cb0 = old_b0 + step * (nb0 - old_b0);
            let cbeta: Vec<f64> = old_beta
                .iter()
                .zip(&nbeta)
                .map(|(o, nw)| o + step * (nw - o))
                .collect();
            let cand = objective(&design, &yf, cb0, &cbeta, config, &mut eta);
            if cand <= obj {
                b0 = cb0;
                beta = cbeta;
                obj = cand;
                accepted = true;
                break;
            }
            step /= 2.0;
        }
        if let Some(t) = trace.as_deref_mut() {
            t.objectives.push(obj);
        }
        let change = beta
            .iter()
            .zip(&old_beta)
            .map(|(a, b)| (a - b).abs())
            .fold((b0 - old_b0).abs(), f64::max);
        if !accepted || change < config.tolerance {
            converged = true;
            break;
        }
    }

    if !b0.is_finite() || beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::NonFinite("fitted coefficients".into()));
    }
    Ok(LogisticModel {
        feature_names: Vec::new(),
        intercept: b0,
        coefficients: beta,
        config: *config,
        converged,
        iterations,
        sweeps,
    })
}

pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// Gradient of the mean logistic loss: intercept first, then coefficients.
pub fn smooth_gradient(model: &LogisticModel, x: ArrayView2<f64>, y: &[u8]) -> Vec<f64> {
    let (n, p) = x.dim();
    let mut g = vec![0.0; p + 1];
    for (i, row) in x.rows().into_iter().enumerate() {
        let eta = model.intercept + row.iter().zip(&model.coefficients).map(|(a, b)| a * b).sum::<f64>();
        let resid = sigmoid(eta) - f64::from(y[i]);
        g[0] += resid;
        for (gj, xv) in g[1..].iter_mut().zip(row.iter()) {
            *gj += resid * xv;
        }
    }
    g.iter_mut().for_each(|v| *v /= n as f64);
    g
}
