//! Pseudo-bootstrapped ensembles of elastic-net logistic models.
//!
//! Each member is fitted on a random subsample (without replacement) of the
//! training rows. The spread of member probabilities is the uncertainty signal.

use std::cmp::Ordering;

use ndarray::{ArrayView2, Axis};
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cohort::stratified_kfold_labels;
use crate::error::{Error, Result};
use crate::glm::{fit_elastic_net_from, predict_proba, ElasticNetConfig, LogisticModel};
use crate::seed;
use crate::stats::auc;

const MAX_REDRAWS: usize = 100;
const MIN_SUBSAMPLE: f64 = 10.0;
const SCORE_TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n_models: usize,
    /// Fraction of training rows drawn for every member.
    pub sample_fraction: f64,
    pub base: ElasticNetConfig,
    pub seed: u64,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_models == 0 {
            return Err(Error::InvalidArgument("ensemble needs at least one model".into()));
        }
        if !(self.sample_fraction > 0.0 && self.sample_fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "sample fraction {} not in (0,1]",
                self.sample_fraction
            )));
        }
        self.base.validate()
    }

    pub fn subsample_size(&self, n: usize) -> usize {
        ((self.sample_fraction * n as f64) - 1e-9).ceil().max(1.0) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub config: EnsembleConfig,
    pub features: Vec<String>,
    pub models: Vec<LogisticModel>,
    /// Sorted training-row indices used by each member.
    pub subsamples: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertainPrediction {
    pub mean: f64,
    /// Sample standard deviation of member probabilities (0 for a single member).
    pub std: f64,
    pub probabilities: Vec<f64>,
}

impl UncertainPrediction {
    pub fn from_probabilities(probabilities: Vec<f64>) -> Self {
        let m = probabilities.len();
        let mean = probabilities.iter().sum::<f64>() / m as f64;
        let std = if m < 2 {
            0.0
        } else {
            (probabilities.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (m - 1) as f64).sqrt()
        };
        UncertainPrediction {
            mean,
            std,
            probabilities,
        }
    }
}

fn check_training(x: ArrayView2<f64>, y: &[u8], features: &[String]) -> Result<()> {
    if x.ncols() != features.len() {
        return Err(Error::DimensionMismatch {
            expected: features.len(),
            actual: x.ncols(),
        });
    }
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            actual: y.len(),
        });
    }
    let pos = y.iter().filter(|&&v| v == 1).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::SingleClass("ensemble training labels".into()));
    }
    Ok(())
}

/// Row indices for member `m`, redrawn until both classes appear.
fn draw_subsample(y: &[u8], size: usize, seed: u64, m: usize) -> Result<Vec<usize>> {
    let mut rng = seed::rng_for(seed, &[seed::purpose::MODEL, m as u64]);
    for _ in 0..MAX_REDRAWS {
        let mut idx = sample(&mut rng, y.len(), size).into_vec();
        idx.sort_unstable();
        let pos = idx.iter().filter(|&&i| y[i] == 1).count();
        if pos > 0 && pos < idx.len() {
            return Ok(idx);
        }
    }
    Err(Error::SingleClass(format!(
        "model {m}: {MAX_REDRAWS} subsamples of size {size} were all single-class"
    )))
}

fn fit_member(
    x: ArrayView2<f64>,
    y: &[u8],
    rows: &[usize],
    base: &ElasticNetConfig,
    warm: Option<&LogisticModel>,
) -> Result<LogisticModel> {
    let xs = x.select(Axis(0), rows);
    let ys: Vec<u8> = rows.iter().map(|&i| y[i]).collect();
    fit_elastic_net_from(
        xs.view(),
        &ys,
        base,
        warm.map(|w| (w.intercept, w.coefficients.as_slice())),
        None,
    )
}

/// Fit `config.n_models` members; columns of `x` correspond to `features`.
pub fn fit_ensemble(x: ArrayView2<f64>, y: &[u8], features: &[String], config: &EnsembleConfig) -> Result<Ensemble> {
    config.validate()?;
    check_training(x, y, features)?;
    let n = y.len();
    if config.sample_fraction * (n as f64) < MIN_SUBSAMPLE {
        return Err(Error::InvalidArgument(format!(
            "subsample of {:.1} rows is below {MIN_SUBSAMPLE}",
            config.sample_fraction * n as f64
        )));
    }
    let size = config.subsample_size(n);
    let fitted: Vec<(Vec<usize>, LogisticModel)> = (0..config.n_models)
        .into_par_iter()
        .map(|m| {
            let wrap = |e: Error| Error::BaseModel {
                index: m,
                source: Box::new(e),
            };
            let rows = draw_subsample(y, size, config.seed, m).map_err(wrap)?;
            let mut model = fit_member(x, y, &rows, &config.base, None).map_err(wrap)?;
            model.feature_names = features.to_vec();
            Ok((rows, model))
        })
        .collect::<Result<_>>()?;
    let (subsamples, models) = fitted.into_iter().unzip();
    Ok(Ensemble {
        config: *config,
        features: features.to_vec(),
        models,
        subsamples,
    })
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }
}

pub fn predict_uncertain(ensemble: &Ensemble, x: &[f64]) -> Result<UncertainPrediction> {
    if x.len() != ensemble.features.len() {
        return Err(Error::DimensionMismatch {
            expected: ensemble.features.len(),
            actual: x.len(),
        });
    }
    let probs = ensemble
        .models
        .iter()
        .map(|m| predict_proba(m, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(UncertainPrediction::from_probabilities(probs))
}

/// Row-wise [`predict_uncertain`].
pub fn predict_uncertain_batch(ensemble: &Ensemble, x: ArrayView2<f64>) -> Result<Vec<UncertainPrediction>> {
    x.rows()
        .into_iter()
        .map(|r| match r.as_slice() {
            Some(s) => predict_uncertain(ensemble, s),
            None => predict_uncertain(ensemble, &r.to_vec()),
        })
        .collect()
}

/// Candidate values searched by [`tune_ensemble`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleGrids {
    pub n_models: Vec<usize>,
    pub sample_fractions: Vec<f64>,
    pub alphas: Vec<f64>,
    pub lambdas: Vec<f64>,
}

impl Default for EnsembleGrids {
    fn default() -> Self {
        EnsembleGrids {
            n_models: (25..=49).step_by(3).collect(),
            sample_fractions: vec![0.70, 0.75, 0.80, 0.85, 0.90, 0.95],
            alphas: vec![0.1, 0.5, 0.9],
            lambdas: vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0],
        }
    }
}

impl EnsembleGrids {
    /// A single-point grid.
    pub fn point(n_models: usize, sample_fraction: f64, base: ElasticNetConfig) -> Self {
        EnsembleGrids {
            n_models: vec![n_models],
            sample_fractions: vec![sample_fraction],
            alphas: vec![base.alpha],
            lambdas: vec![base.lambda],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("ensemble grid `{what}` is empty")));
        if self.n_models.is_empty() {
            return bad("n_models");
        }
        if self.sample_fractions.is_empty() {
            return bad("sample_fractions");
        }
        if self.alphas.is_empty() {
            return bad("alphas");
        }
        if self.lambdas.is_empty() {
            return bad("lambdas");
        }
        for &m in &self.n_models {
            if m == 0 {
                return Err(Error::InvalidArgument("n_models entries must be >= 1".into()));
            }
        }
        for &f in &self.sample_fractions {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::InvalidArgument(format!("sample fraction {f} not in (0,1]")));
            }
        }
        for &a in &self.alphas {
            ElasticNetConfig::new(a, 0.0).validate()?;
        }
        for &l in &self.lambdas {
            ElasticNetConfig::new(0.5, l).validate()?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n_models.len() * self.sample_fractions.len() * self.alphas.len() * self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerCv {
    pub folds: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub n_models: usize,
    pub sample_fraction: f64,
    pub alpha: f64,
    pub lambda: f64,
    /// Mean inner-CV AUC of the aggregated probability.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleTuning {
    pub best: GridCell,
    pub cells: Vec<GridCell>,
}

impl EnsembleTuning {
    /// The winning configuration with the supplied fit seed.
    pub fn config(&self, base: ElasticNetConfig, seed: u64) -> EnsembleConfig {
        EnsembleConfig {
            n_models: self.best.n_models,
            sample_fraction: self.best.sample_fraction,
            base: ElasticNetConfig {
                alpha: self.best.alpha,
                lambda: self.best.lambda,
                ..base
            },
            seed,
        }
    }
}

/// `a` beats `b`: higher score, then smaller M, larger φ, larger λ, larger α.
fn better(a: &GridCell, b: &GridCell) -> bool {
    if (a.score - b.score).abs() > SCORE_TIE {
        return a.score > b.score;
    }
    let order = b
        .n_models
        .cmp(&a.n_models)
        .then(a.sample_fraction.total_cmp(&b.sample_fraction))
        .then(a.lambda.total_cmp(&b.lambda))
        .then(a.alpha.total_cmp(&b.alpha));
    order == Ordering::Greater
}

fn pick(cells: &[GridCell]) -> GridCell {
    let mut best = cells[0];
    for c in &cells[1..] {
        if better(c, &best) {
            best = *c;
        }
    }
    best
}

/// Grid search over (M, φ, α, λ) by inner-CV AUC of the aggregated probability.
///
/// Members are seeded by index, so the ensemble of size M is a prefix of the
/// largest one and every M is scored from a single set of fits. λ runs from
/// large to small with warm starts per member.
pub fn tune_ensemble(
    x: ArrayView2<f64>,
    y: &[u8],
    features: &[String],
    grids: &EnsembleGrids,
    base: &ElasticNetConfig,
    inner: &InnerCv,
) -> Result<EnsembleTuning> {
    grids.validate()?;
    check_training(x, y, features)?;
    let pos = y.iter().filter(|&&v| v == 1).count();
    let k = inner.folds.min(pos).min(y.len() - pos);
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "inner CV infeasible: {} folds requested, smallest class has {}",
            inner.folds,
            pos.min(y.len() - pos)
        )));
    }
    let fold_of = stratified_kfold_labels(y, k, inner.seed)?;
    let folds: Vec<(Vec<usize>, Vec<usize>)> = (0..k)
        .map(|f| (0..y.len()).partition(|&i| fold_of[i] != f))
        .collect();
    let max_m = *grids.n_models.iter().max().expect("validated");
    let mut lambdas = grids.lambdas.clone();
    lambdas.sort_by(|a, b| b.total_cmp(a));

    // Fractions whose subsample would fall below the minimum are skipped.
    let smallest_train = folds.iter().map(|(t, _)| t.len()).min().expect("k >= 2");
    let fractions: Vec<usize> = (0..grids.sample_fractions.len())
        .filter(|&p| grids.sample_fractions[p] * smallest_train as f64 >= MIN_SUBSAMPLE)
        .collect();
    if fractions.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "inner CV infeasible: no sample fraction yields {MIN_SUBSAMPLE} of {smallest_train} rows"
        )));
    }

    // One job per (fold, φ, α): member probabilities on the held-out rows for every λ.
    let jobs: Vec<(usize, usize, usize)> = (0..k)
        .flat_map(|f| {
            fractions
                .iter()
                .flat_map(move |&p| (0..grids.alphas.len()).map(move |a| (f, p, a)))
        })
        .collect();
    type Probs = Vec<Vec<Vec<f64>>>; // [λ][member][test row]
    let results: Vec<Probs> = jobs
        .par_iter()
        .map(|&(f, p, a)| -> Result<Probs> {
            let (train, test) = &folds[f];
            let xtr = x.select(Axis(0), train);
            let ytr: Vec<u8> = train.iter().map(|&i| y[i]).collect();
            let xte = x.select(Axis(0), test);
            let phi = grids.sample_fractions[p];
            let size = ((phi * train.len() as f64) - 1e-9).ceil() as usize;
            let member_seed = seed::derive(inner.seed, &[seed::purpose::TUNE, f as u64, p as u64]);
            let mut out = vec![Vec::with_capacity(max_m); lambdas.len()];
            for m in 0..max_m {
                let rows = draw_subsample(&ytr, size, member_seed, m)?;
                let mut warm: Option<LogisticModel> = None;
                for (li, &lambda) in lambdas.iter().enumerate() {
                    let cfg = ElasticNetConfig {
                        alpha: grids.alphas[a],
                        lambda,
                        ..*base
                    };
                    let model = fit_member(xtr.view(), &ytr, &rows, &cfg, warm.as_ref())?;
                    let probs = xte
                        .rows()
                        .into_iter()
                        .map(|r| predict_proba(&model, &r.to_vec()))
                        .collect::<Result<Vec<_>>>()?;
                    out[li].push(probs);
                    warm = Some(model);
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::with_capacity(grids.len());
    for &m in &grids.n_models {
        for &p in &fractions {
            let phi = grids.sample_fractions[p];
            for (a, &alpha) in grids.alphas.iter().enumerate() {
                for (li, &lambda) in lambdas.iter().enumerate() {
                    let mut total = 0.0;
                    for (f, (_, test)) in folds.iter().enumerate() {
                        let job = jobs.iter().position(|&j| j == (f, p, a)).expect("job exists");
                        let members = &results[job][li][..m];
                        let mean: Vec<f64> = (0..test.len())
                            .map(|t| members.iter().map(|pr| pr[t]).sum::<f64>() / m as f64)
                            .collect();
                        let yte: Vec<u8> = test.iter().map(|&i| y[i]).collect();
                        total += auc(&yte, &mean)?;
                    }
                    cells.push(GridCell {
                        n_models: m,
                        sample_fraction: phi,
                        alpha,
                        lambda,
                        score: total / k as f64,
                    });
                }
            }
        }
    }
    let best = pick(&cells);
    Ok(EnsembleTuning { best, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn names(p: usize) -> Vec<String> {
        (0..p).map(|j| format!("f{j}")).collect()
    }

    fn data(n: usize, p: usize, signal: f64, seed: u64) -> (Array2<f64>, Vec<u8>) {
        let mut rng = seed::rng(seed);
        let x = Array2::from_shape_fn((n, p), |_| rng.sample::<f64, _>(StandardNormal));
        let y = (0..n)
            .map(|i| u8::from(signal * x[[i, 0]] + rng.sample::<f64, _>(StandardNormal) > 0.0))
            .collect();
        (x, y)
    }

    fn config(m: usize, phi: f64) -> EnsembleConfig {
        EnsembleConfig {
            n_models: m,
            sample_fraction: phi,
            base: ElasticNetConfig::new(0.5, 0.01),
            seed: 3,
        }
    }

    #[test]
    fn arithmetic() {
        let p = UncertainPrediction::from_probabilities(vec![0.2, 0.4, 0.6]);
        assert!((p.mean - 0.4).abs() < 1e-15);
        assert!((p.std - 0.2).abs() < 1e-15);
        assert_eq!(UncertainPrediction::from_probabilities(vec![0.7]).std, 0.0);
    }

    #[test]
    fn full_fraction_members_are_identical() {
        let (x, y) = data(80, 3, 1.0, 1);
        let e = fit_ensemble(x.view(), &y, &names(3), &config(5, 1.0)).unwrap();
        for m in &e.models[1..] {
            assert_eq!(m.coefficients, e.models[0].coefficients);
        }
        let p = predict_uncertain(&e, &[0.3, -0.1, 0.5]).unwrap();
        assert_eq!(p.std, 0.0);
    }

    #[test]
    fn single_member_matches_base_fit() {
        let (x, y) = data(60, 2, 1.0, 2);
        let e = fit_ensemble(x.view(), &y, &names(2), &config(1, 1.0)).unwrap();
        let direct = crate::glm::fit_elastic_net(x.view(), &y, &config(1, 1.0).base).unwrap();
        assert_eq!(e.models[0].coefficients, direct.coefficients);
    }

    #[test]
    fn subsample_sizes_are_recorded() {
        let (x, y) = data(101, 2, 1.0, 3);
        let e = fit_ensemble(x.view(), &y, &names(2), &config(25, 0.95)).unwrap();
        assert_eq!(e.len(), 25);
        assert!(e.subsamples.iter().all(|s| s.len() == 96));
        assert!(e.subsamples.iter().all(|s| s.windows(2).all(|w| w[0] < w[1])));
    }

    #[test]
    fn too_small_subsample_is_rejected() {
        let (x, y) = data(12, 2, 1.0, 4);
        assert!(fit_ensemble(x.view(), &y, &names(2), &config(3, 0.7)).is_err());
    }

    #[test]
    fn deterministic_and_json_round_trip() {
        let (x, y) = data(70, 3, 1.0, 5);
        let a = fit_ensemble(x.view(), &y, &names(3), &config(4, 0.8)).unwrap();
        let b = fit_ensemble(x.view(), &y, &names(3), &config(4, 0.8)).unwrap();
        assert_eq!(a, b);
        let back: Ensemble = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn dimension_mismatch() {
        let (x, y) = data(40, 2, 1.0, 6);
        let e = fit_ensemble(x.view(), &y, &names(2), &config(2, 1.0)).unwrap();
        assert!(matches!(
            predict_uncertain(&e, &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn single_point_grid() {
        let (x, y) = data(80, 2, 1.0, 7);
        let base = ElasticNetConfig::new(0.9, 0.01);
        let t = tune_ensemble(
            x.view(),
            &y,
            &names(2),
            &EnsembleGrids::point(3, 0.8, base),
            &base,
            &InnerCv { folds: 5, seed: 1 },
        )
        .unwrap();
        assert_eq!(t.cells.len(), 1);
        assert_eq!((t.best.n_models, t.best.sample_fraction, t.best.alpha, t.best.lambda), (3, 0.8, 0.9, 0.01));
    }

    #[test]
    fn tie_prefers_fewer_models() {
        // φ = 1 makes every member identical, so M cannot change the score.
        let (x, y) = data(80, 2, 1.0, 8);
        let base = ElasticNetConfig::new(0.5, 0.01);
        let grids = EnsembleGrids {
            n_models: vec![49, 25],
            sample_fractions: vec![1.0],
            alphas: vec![0.5],
            lambdas: vec![0.01],
        };
        let t = tune_ensemble(x.view(), &y, &names(2), &grids, &base, &InnerCv { folds: 4, seed: 2 }).unwrap();
        assert_eq!(t.cells[0].score, t.cells[1].score);
        assert_eq!(t.best.n_models, 25);
    }

    #[test]
    fn separable_data_scores_high() {
        let (x, y) = data(150, 3, 6.0, 9);
        let base = ElasticNetConfig::default();
        let grids = EnsembleGrids {
            n_models: vec![5, 8],
            sample_fractions: vec![0.7, 0.9],
            alphas: vec![0.5],
            lambdas: vec![0.1, 0.01],
        };
        let t = tune_ensemble(x.view(), &y, &names(3), &grids, &base, &InnerCv { folds: 5, seed: 3 }).unwrap();
        assert_eq!(t.cells.len(), 8);
        assert!(t.best.score > 0.9, "{}", t.best.score);
    }

    #[test]
    fn infeasible_inner_folds() {
        let (x, _) = data(30, 2, 1.0, 10);
        let mut y = vec![0u8; 30];
        y[0] = 1;
        let base = ElasticNetConfig::default();
        let r = tune_ensemble(x.view(), &y, &names(2), &EnsembleGrids::point(2, 0.9, base), &base, &InnerCv { folds: 5, seed: 0 });
        assert!(r.is_err());
    }
}
