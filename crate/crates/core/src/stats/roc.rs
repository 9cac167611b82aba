use serde::{Deserialize, Serialize};

use super::{midranks, split_by_label};
use crate::error::Result;

/// Probability that a random positive outscores a random negative, ties ½,
/// via the rank-sum identity.
pub fn auc(labels: &[u8], scores: &[f64]) -> Result<f64> {
    let (pos, neg) = split_by_label(labels, scores)?;
    let ranks = midranks(scores);
    let rank_sum: f64 = labels
        .iter()
        .zip(&ranks)
        .filter(|(&l, _)| l == 1)
        .map(|(_, &r)| r)
        .sum();
    let m = pos.len() as f64;
    let n = neg.len() as f64;
    let u = rank_sum - m * (m + 1.0) / 2.0;
    Ok(u / (m * n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
}

/// ROC staircase at every distinct threshold, from (0,0) to (1,1).
pub fn roc_points(labels: &[u8], scores: &[f64]) -> Result<Vec<RocPoint>> {
    let (pos, neg) = split_by_label(labels, scores)?;
    let (p, n) = (pos.len() as f64, neg.len() as f64);
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![RocPoint { fpr: 0.0, tpr: 0.0 }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        while i < order.len() && scores[order[i]] == threshold {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / n,
            tpr: tp as f64 / p,
        });
    }
    Ok(points)
}

pub fn trapezoid_area(points: &[RocPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) / 2.0)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(labels: &[u8], scores: &[f64]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for i in 0..labels.len() {
            for j in 0..labels.len() {
                if labels[i] == 1 && labels[j] == 0 {
                    pairs += 1.0;
                    if scores[i] > scores[j] {
                        wins += 1.0;
                    } else if scores[i] == scores[j] {
                        wins += 0.5;
                    }
                }
            }
        }
        wins / pairs
    }

    #[test]
    fn four_point_example() {
        let labels = [1, 1, 0, 0];
        let scores = [0.35, 0.8, 0.1, 0.4];
        assert_eq!(brute_force(&labels, &scores), 0.75);
        assert_eq!(auc(&labels, &scores).unwrap(), 0.75);
    }

    #[test]
    fn separated_and_tied() {
        assert_eq!(auc(&[0, 0, 1, 1], &[0.1, 0.2, 0.8, 0.9]).unwrap(), 1.0);
        assert_eq!(auc(&[0, 1, 0, 1], &[0.5; 4]).unwrap(), 0.5);
        assert!(auc(&[1, 1], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn roc_edge_cases() {
        let pts = roc_points(&[0, 0, 1, 1], &[0.1, 0.2, 0.8, 0.9]).unwrap();
        assert!(pts.contains(&RocPoint { fpr: 0.0, tpr: 1.0 }));
        let pts = roc_points(&[0, 1, 0, 1], &[0.3; 4]).unwrap();
        assert_eq!(
            pts,
            vec![RocPoint { fpr: 0.0, tpr: 0.0 }, RocPoint { fpr: 1.0, tpr: 1.0 }]
        );
    }

    fn instance() -> impl Strategy<Value = (Vec<u8>, Vec<f64>)> {
        (2usize..30).prop_flat_map(|n| {
            (
                proptest::collection::vec(0u8..2, n),
                proptest::collection::vec(0u8..6, n),
            )
                .prop_map(|(mut l, s)| {
                    l[0] = 0;
                    l[1] = 1;
                    (l, s.into_iter().map(|v| f64::from(v) / 5.0).collect())
                })
        })
    }

    proptest! {
        #[test]
        fn rank_auc_equals_pairwise((labels, scores) in instance()) {
            prop_assert_eq!(auc(&labels, &scores).unwrap(), brute_force(&labels, &scores));
        }

        #[test]
        fn trapezoid_matches_auc((labels, scores) in instance()) {
            let pts = roc_points(&labels, &scores).unwrap();
            prop_assert!((trapezoid_area(&pts) - auc(&labels, &scores).unwrap()).abs() < 1e-12);
            prop_assert_eq!(pts.first().copied(), Some(RocPoint { fpr: 0.0, tpr: 0.0 }));
            prop_assert_eq!(pts.last().copied(), Some(RocPoint { fpr: 1.0, tpr: 1.0 }));
        }

        #[test]
        fn auc_is_rank_invariant((labels, scores) in instance()) {
            let transformed: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() + 1.0).collect();
            prop_assert_eq!(auc(&labels, &scores).unwrap(), auc(&labels, &transformed).unwrap());
        }

        #[test]
        fn negation_complements(labels in proptest::collection::vec(0u8..2, 2..30), seed in any::<u64>()) {
            let mut labels = labels;
            labels[0] = 0;
            labels[1] = 1;
            // Distinct scores guarantee no ties.
            let scores: Vec<f64> = (0..labels.len()).map(|i| ((i as u64).wrapping_mul(seed | 1) % 1_000_003) as f64 + i as f64 * 1e-3).collect();
            let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
            let total = auc(&labels, &scores).unwrap() + auc(&labels, &neg).unwrap();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
