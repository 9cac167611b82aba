//! Feature importance from ensemble coefficients and from column permutation.

use std::io::Write;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cascade::{gate, CascadeModel, RoutingReason};
use crate::ensemble::{predict_uncertain_batch, Ensemble};
use crate::error::{Error, Result};
use crate::seed;
use crate::stats::auc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportanceMethod {
    Coefficient,
    Permutation,
}

impl ImportanceMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            ImportanceMethod::Coefficient => "coefficient",
            ImportanceMethod::Permutation => "permutation",
        }
    }
}

impl std::str::FromStr for ImportanceMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coefficient" => Ok(ImportanceMethod::Coefficient),
            "permutation" => Ok(ImportanceMethod::Permutation),
            other => Err(Error::InvalidArgument(format!(
                "unknown importance method `{other}` (expected coefficient or permutation)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature: String,
    pub per_fold: Vec<f64>,
    pub overall: f64,
    /// 1 = most important.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub method: ImportanceMethod,
    pub features: Vec<FeatureImportance>,
}

impl ImportanceReport {
    /// Rows in `universe` order with ranks by descending `overall`.
    fn ranked(method: ImportanceMethod, universe: &[String], per_fold: Vec<Vec<f64>>, overall: Vec<f64>) -> Self {
        let mut order: Vec<usize> = (0..universe.len()).collect();
        order.sort_by(|&a, &b| overall[b].total_cmp(&overall[a]));
        let mut rank = vec![0; universe.len()];
        for (r, &j) in order.iter().enumerate() {
            rank[j] = r + 1;
        }
        let features = universe
            .iter()
            .zip(per_fold)
            .enumerate()
            .map(|(j, (name, folds))| FeatureImportance {
                feature: name.clone(),
                per_fold: folds,
                overall: overall[j],
                rank: rank[j],
            })
            .collect();
        ImportanceReport { method, features }
    }

    pub fn get(&self, feature: &str) -> Option<&FeatureImportance> {
        self.features.iter().find(|f| f.feature == feature)
    }

    /// Rows sorted by rank.
    pub fn by_rank(&self) -> Vec<&FeatureImportance> {
        let mut rows: Vec<_> = self.features.iter().collect();
        rows.sort_by_key(|f| f.rank);
        rows
    }

    /// `feature,method,fold_1..fold_k,overall,rank`, sorted by rank.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let folds = self.features.first().map_or(0, |f| f.per_fold.len());
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["feature".to_string(), "method".to_string()];
        header.extend((1..=folds).map(|k| format!("fold_{k}")));
        header.extend(["overall".to_string(), "rank".to_string()]);
        w.write_record(&header)?;
        for f in self.by_rank() {
            let mut row = vec![f.feature.clone(), self.method.as_str().to_string()];
            row.extend(f.per_fold.iter().map(|v| v.to_string()));
            row.extend([f.overall.to_string(), f.rank.to_string()]);
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Per fold: mean coefficient across members; overall: mean of the absolute
/// per-fold values. Features a fold did not use count as 0.
pub fn coefficient_importance(ensembles: &[&Ensemble], universe: &[String]) -> Result<ImportanceReport> {
    if ensembles.is_empty() {
        return Err(Error::Empty("no ensembles for coefficient importance".into()));
    }
    let mut per_fold = vec![Vec::with_capacity(ensembles.len()); universe.len()];
    for e in ensembles {
        if e.is_empty() {
            return Err(Error::Empty("ensemble has no members".into()));
        }
        for (j, name) in universe.iter().enumerate() {
            let v = match e.features.iter().position(|f| f == name) {
                Some(c) => e.models.iter().map(|m| m.coefficients[c]).sum::<f64>() / e.len() as f64,
                None => 0.0,
            };
            per_fold[j].push(v);
        }
    }
    let overall = per_fold
        .iter()
        .map(|v| v.iter().map(|x| x.abs()).sum::<f64>() / v.len() as f64)
        .collect();
    Ok(ImportanceReport::ranked(ImportanceMethod::Coefficient, universe, per_fold, overall))
}

/// Preprocessed input blocks with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct InputBlock {
    pub names: Vec<String>,
    pub data: Array2<f64>,
}

/// Anything that maps preprocessed input blocks to probabilities.
pub trait ProbabilityModel: Sync {
    fn predict_blocks(&self, blocks: &[InputBlock]) -> Result<Vec<f64>>;
}

impl ProbabilityModel for Ensemble {
    fn predict_blocks(&self, blocks: &[InputBlock]) -> Result<Vec<f64>> {
        let block = blocks.first().ok_or_else(|| Error::Empty("no input block".into()))?;
        Ok(predict_uncertain_batch(self, block.data.view())?.into_iter().map(|p| p.mean).collect())
    }
}

/// Blocks are (stage-1 inputs, stage-2 inputs); stage 2 is used where the gate fires.
impl ProbabilityModel for CascadeModel {
    fn predict_blocks(&self, blocks: &[InputBlock]) -> Result<Vec<f64>> {
        let [b1, b2] = blocks else {
            return Err(Error::InvalidArgument("cascade expects two input blocks".into()));
        };
        let first = predict_uncertain_batch(&self.stage1.ensemble, b1.data.view())?;
        let second = predict_uncertain_batch(&self.stage2.ensemble, b2.data.view())?;
        Ok(first
            .iter()
            .zip(&second)
            .map(|(p1, p2)| match gate(p1.mean, p1.std, &self.thresholds) {
                RoutingReason::LowUncertainty => p1.mean,
                _ => p2.mean,
            })
            .collect())
    }
}

/// One evaluation set for [`permutation_importance`].
pub struct PermutationTask<'a> {
    pub model: &'a dyn ProbabilityModel,
    pub blocks: Vec<InputBlock>,
    pub labels: Vec<u8>,
}

/// Mean AUC drop from shuffling each feature, per task and averaged over tasks.
///
/// A feature is shuffled with one row permutation applied to every block
/// that contains it. Features no block contains score exactly 0.
pub fn permutation_importance(
    tasks: &[PermutationTask<'_>],
    universe: &[String],
    repeats: usize,
    seed: u64,
) -> Result<ImportanceReport> {
    if tasks.is_empty() {
        return Err(Error::Empty("no permutation tasks".into()));
    }
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be >= 1".into()));
    }
    let mut per_fold = vec![Vec::with_capacity(tasks.len()); universe.len()];
    for (t, task) in tasks.iter().enumerate() {
        let n = task.labels.len();
        if task.blocks.iter().any(|b| b.data.nrows() != n || b.data.ncols() != b.names.len()) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: task.blocks.iter().map(|b| b.data.nrows()).find(|&r| r != n).unwrap_or(n),
            });
        }
        let baseline = auc(&task.labels, &task.model.predict_blocks(&task.blocks)?)?;
        let drops: Vec<f64> = universe
            .par_iter()
            .enumerate()
            .map(|(j, name)| -> Result<f64> {
                let present = task.blocks.iter().any(|b| b.names.contains(name));
                if !present {
                    return Ok(0.0);
                }
                let mut total = 0.0;
                for r in 0..repeats {
                    let mut perm: Vec<usize> = (0..n).collect();
                    perm.shuffle(&mut seed::rng_for(seed, &[seed::purpose::PERMUTE, t as u64, j as u64, r as u64]));
                    let blocks: Vec<InputBlock> = task
                        .blocks
                        .iter()
                        .map(|b| {
                            let mut data = b.data.clone();
                            if let Some(c) = b.names.iter().position(|m| m == name) {
                                for (i, &src) in perm.iter().enumerate() {
                                    data[[i, c]] = b.data[[src, c]];
                                }
                            }
                            InputBlock {
                                names: b.names.clone(),
                                data,
                            }
                        })
                        .collect();
                    total += baseline - auc(&task.labels, &task.model.predict_blocks(&blocks)?)?;
                }
                Ok(total / repeats as f64)
            })
            .collect::<Result<_>>()?;
        for (j, d) in drops.into_iter().enumerate() {
            per_fold[j].push(d);
        }
    }
    let overall = per_fold.iter().map(|v| v.iter().sum::<f64>() / v.len() as f64).collect();
    Ok(ImportanceReport::ranked(ImportanceMethod::Permutation, universe, per_fold, overall))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::EnsembleConfig;
    use crate::glm::{ElasticNetConfig, LogisticModel};

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    fn ensemble(features: &[&str], coefs: &[&[f64]]) -> Ensemble {
        let base = ElasticNetConfig::default();
        Ensemble {
            config: EnsembleConfig {
                n_models: coefs.len(),
                sample_fraction: 1.0,
                base,
                seed: 0,
            },
            features: names(features),
            models: coefs
                .iter()
                .map(|c| LogisticModel {
                    coefficients: c.to_vec(),
                    ..LogisticModel::zero(c.len(), base)
                })
                .collect(),
            subsamples: vec![vec![]; coefs.len()],
        }
    }

    #[test]
    fn absolute_value_and_ranks() {
        let e = ensemble(&["a", "b"], &[&[2.0, -3.0]]);
        let r = coefficient_importance(&[&e], &names(&["a", "b"])).unwrap();
        assert_eq!(r.get("a").unwrap().overall, 2.0);
        assert_eq!(r.get("b").unwrap().overall, 3.0);
        assert_eq!((r.get("a").unwrap().rank, r.get("b").unwrap().rank), (2, 1));
    }

    #[test]
    fn abs_then_mean_and_missing_is_zero() {
        let f1 = ensemble(&["a"], &[&[0.5], &[1.5]]);
        let f2 = ensemble(&["a"], &[&[-1.0]]);
        let r = coefficient_importance(&[&f1, &f2], &names(&["a", "gone"])).unwrap();
        assert_eq!(r.get("a").unwrap().overall, 1.0);
        assert_eq!(r.get("a").unwrap().per_fold, vec![1.0, -1.0]);
        let gone = r.get("gone").unwrap();
        assert_eq!((gone.overall, gone.rank), (0.0, 2));
        assert!(coefficient_importance(&[], &names(&["a"])).is_err());
    }

    fn block(names_: &[&str], rows: usize, f: impl Fn(usize, usize) -> f64) -> InputBlock {
        InputBlock {
            names: names(names_),
            data: Array2::from_shape_fn((rows, names_.len()), |(i, j)| f(i, j)),
        }
    }

    #[test]
    fn permutation_zero_coefficient_and_outside_features() {
        let e = ensemble(&["a", "b"], &[&[3.0, 0.0]]);
        let labels: Vec<u8> = (0..40).map(|i| (i % 2) as u8).collect();
        let b = block(&["a", "b"], 40, |i, j| if j == 0 { (i % 2) as f64 - 0.5 } else { (i * 7 % 11) as f64 });
        let tasks = [PermutationTask {
            model: &e,
            blocks: vec![b],
            labels,
        }];
        let r = permutation_importance(&tasks, &names(&["a", "b", "c"]), 3, 9).unwrap();
        assert_eq!(r.get("b").unwrap().overall, 0.0);
        assert_eq!(r.get("c").unwrap().overall, 0.0);
        assert!(r.get("a").unwrap().overall > 0.3);
        assert_eq!(r.get("a").unwrap().rank, 1);
        let again = permutation_importance(&tasks, &names(&["a", "b", "c"]), 3, 9).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn csv_and_json() {
        let e = ensemble(&["a", "b"], &[&[2.0, -3.0]]);
        let r = coefficient_importance(&[&e], &names(&["a", "b"])).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "feature,method,fold_1,overall,rank");
        assert!(text.lines().nth(1).unwrap().starts_with("b,coefficient,-3,3,1"));
        let back: ImportanceReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn method_parsing() {
        assert_eq!("permutation".parse::<ImportanceMethod>().unwrap(), ImportanceMethod::Permutation);
        assert!("shap".parse::<ImportanceMethod>().is_err());
    }
}
