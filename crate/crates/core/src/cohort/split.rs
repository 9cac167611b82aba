//! Deterministic stratified splitting.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Cohort;
use crate::error::{Error, Result};
use crate::seed;

/// Assignment of every record to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub assignments: BTreeMap<String, usize>,
    /// Fold index per record, aligned with the cohort's record order.
    pub fold_of: Vec<usize>,
}

impl FoldPlan {
    /// Positions (into the cohort) of the records held out in `fold`.
    pub fn test_positions(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] == fold).collect()
    }

    pub fn train_positions(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] != fold).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        self.fold_of.iter().for_each(|&f| sizes[f] += 1);
        sizes
    }
}

fn class_positions(labels: &[u8]) -> [Vec<usize>; 2] {
    let mut out = [Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        out[usize::from(l == 1)].push(i);
    }
    out
}

/// Fold index per position. Each class is shuffled and dealt round-robin; the
/// second class continues where the first stopped, so totals stay within ±1.
pub fn stratified_kfold_labels(labels: &[u8], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k = {k} < 2")));
    }
    let mut classes = class_positions(labels);
    for (c, members) in classes.iter().enumerate() {
        if members.len() < k {
            return Err(Error::InvalidArgument(format!(
                "class {c} has {} members, fewer than k = {k}",
                members.len()
            )));
        }
    }
    let mut rng = seed::rng(seed);
    let mut fold_of = vec![0; labels.len()];
    let mut next = 0;
    for members in classes.iter_mut() {
        members.shuffle(&mut rng);
        for &pos in members.iter() {
            fold_of[pos] = next;
            next = (next + 1) % k;
        }
    }
    Ok(fold_of)
}

pub fn stratified_kfold(cohort: &Cohort, k: usize, seed: u64) -> Result<FoldPlan> {
    let fold_of = stratified_kfold_labels(&cohort.labels(), k, seed)?;
    let assignments = cohort
        .records
        .iter()
        .zip(&fold_of)
        .map(|(r, &f)| (r.id.clone(), f))
        .collect();
    Ok(FoldPlan {
        k,
        seed,
        assignments,
        fold_of,
    })
}

/// Positions into the training list, split three ways.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationSlices {
    pub core_train: Vec<usize>,
    pub val1: Vec<usize>,
    pub val2: Vec<usize>,
}

fn per_class_quota(size: usize, available: [usize; 2]) -> [usize; 2] {
    if size == 0 {
        return [0, 0];
    }
    let total = (available[0] + available[1]) as f64;
    let mut pos = ((size as f64) * available[1] as f64 / total).round() as usize;
    if size >= 2 {
        pos = pos.clamp(1, size - 1);
    }
    pos = pos.min(available[1]);
    let mut neg = size - pos;
    if neg > available[0] {
        neg = available[0];
        pos = size - neg;
    }
    [neg, pos]
}

/// Stratified validation slices as positions into `labels`; remainder is `core_train`.
pub fn slice_validation_positions(labels: &[u8], sizes: (usize, usize), seed: u64) -> Result<ValidationSlices> {
    let (n1, n2) = sizes;
    if n1 + n2 >= labels.len() {
        return Err(Error::InvalidArgument(format!(
            "validation sizes {n1}+{n2} leave no training rows out of {}",
            labels.len()
        )));
    }
    let mut classes = class_positions(labels);
    if classes.iter().any(Vec::is_empty) {
        return Err(Error::SingleClass("training ids for validation slicing".into()));
    }
    let mut rng = seed::rng(seed);
    classes.iter_mut().for_each(|c| c.shuffle(&mut rng));

    let mut remaining = [classes[0].len(), classes[1].len()];
    let q1 = per_class_quota(n1, remaining);
    remaining = [remaining[0] - q1[0], remaining[1] - q1[1]];
    let q2 = per_class_quota(n2, remaining);
    for c in 0..2 {
        if q1[c] + q2[c] >= classes[c].len() && n1 + n2 > 0 {
            return Err(Error::InvalidArgument(format!(
                "validation sizes ({n1},{n2}) exhaust class {c}"
            )));
        }
    }
    let mut val1 = Vec::with_capacity(n1);
    let mut val2 = Vec::with_capacity(n2);
    let mut core = Vec::new();
    for (c, members) in classes.iter().enumerate() {
        val1.extend_from_slice(&members[..q1[c]]);
        val2.extend_from_slice(&members[q1[c]..q1[c] + q2[c]]);
        core.extend_from_slice(&members[q1[c] + q2[c]..]);
    }
    val1.sort_unstable();
    val2.sort_unstable();
    core.sort_unstable();
    Ok(ValidationSlices {
        core_train: core,
        val1,
        val2,
    })
}

/// Id-level wrapper around [`slice_validation_positions`].
pub fn slice_validation(
    train_ids: &[String],
    sizes: (usize, usize),
    seed: u64,
    labels: &[u8],
) -> Result<(Vec<String>, Vec<String>, Vec<String>)> {
    if train_ids.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: train_ids.len(),
            actual: labels.len(),
        });
    }
    let s = slice_validation_positions(labels, sizes, seed)?;
    let pick = |p: &[usize]| p.iter().map(|&i| train_ids[i].clone()).collect();
    Ok((pick(&s.core_train), pick(&s.val1), pick(&s.val2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(n_pos: usize, n_neg: usize) -> Vec<u8> {
        let mut v = vec![1; n_pos];
        v.extend(vec![0; n_neg]);
        v
    }

    #[test]
    fn ten_folds_of_218() {
        let l = labels(121, 97);
        let f = stratified_kfold_labels(&l, 10, 7).unwrap();
        let mut sizes = vec![0; 10];
        f.iter().for_each(|&i| sizes[i] += 1);
        sizes.sort_unstable();
        assert_eq!(sizes, vec![21, 21, 22, 22, 22, 22, 22, 22, 22, 22]);
    }

    #[test]
    fn two_by_two() {
        let l = labels(2, 2);
        let f = stratified_kfold_labels(&l, 2, 1).unwrap();
        for fold in 0..2 {
            let pos = (0..4).filter(|&i| f[i] == fold && l[i] == 1).count();
            let neg = (0..4).filter(|&i| f[i] == fold && l[i] == 0).count();
            assert_eq!((pos, neg), (1, 1));
        }
    }

    #[test]
    fn small_class_is_error() {
        assert!(stratified_kfold_labels(&labels(3, 20), 5, 1).is_err());
    }

    #[test]
    fn validation_slices_196() {
        let l = labels(109, 87);
        let s = slice_validation_positions(&l, (20, 20), 3).unwrap();
        assert_eq!((s.core_train.len(), s.val1.len(), s.val2.len()), (156, 20, 20));
        for v in [&s.val1, &s.val2] {
            assert!(v.iter().any(|&i| l[i] == 1) && v.iter().any(|&i| l[i] == 0));
        }
        let mut all: Vec<usize> = s.core_train.iter().chain(&s.val1).chain(&s.val2).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..196).collect::<Vec<_>>());
    }

    #[test]
    fn zero_sized_slices_are_identity() {
        let ids: Vec<String> = (0..10).map(|i| format!("p{i}")).collect();
        let l = labels(5, 5);
        let (core, v1, v2) = slice_validation(&ids, (0, 0), 9, &l).unwrap();
        assert_eq!(core, ids);
        assert!(v1.is_empty() && v2.is_empty());
    }

    #[test]
    fn oversized_slices_are_error() {
        assert!(slice_validation_positions(&labels(100, 96), (100, 100), 1).is_err());
    }

    proptest! {
        #[test]
        fn kfold_is_stratified_partition(n_pos in 3usize..60, n_neg in 3usize..60, k in 2usize..4, seed in any::<u64>()) {
            let l = labels(n_pos, n_neg);
            let f = stratified_kfold_labels(&l, k, seed).unwrap();
            prop_assert_eq!(&f, &stratified_kfold_labels(&l, k, seed).unwrap());
            let count = |pred: &dyn Fn(usize) -> bool| -> Vec<usize> {
                (0..k).map(|fold| (0..l.len()).filter(|&i| f[i] == fold && pred(i)).count()).collect()
            };
            for c in [count(&|_| true), count(&|i| l[i] == 1), count(&|i| l[i] == 0)] {
                let (lo, hi) = (c.iter().min().unwrap(), c.iter().max().unwrap());
                prop_assert!(hi - lo <= 1);
            }
            prop_assert_eq!(count(&|_| true).iter().sum::<usize>(), l.len());
        }
    }
}
