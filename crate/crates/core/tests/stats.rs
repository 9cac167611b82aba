mod common;

use cascade_uq::stats::{
    auc, chi_square_independence, delong_auc_variance, delong_ci, delong_paired_test, mcnemar, roc_points,
    trapezoid_area, two_sample_t,
};
use common::*;
use rand::Rng;

fn indicators(b: usize, c: usize, both: usize) -> (Vec<bool>, Vec<bool>) {
    let mut a = vec![true; b];
    let mut x = vec![false; b];
    a.extend(vec![false; c]);
    x.extend(vec![true; c]);
    a.extend(vec![true; both]);
    x.extend(vec![true; both]);
    (a, x)
}

#[test]
fn auc_equals_pairwise_counting_with_ties() {
    let mut r = rng(11);
    for _ in 0..500 {
        let (labels, scores) = random_tied_instance(&mut r, 40);
        assert_eq!(auc(&labels, &scores).unwrap(), brute_force_auc(&labels, &scores));
    }
}

#[test]
fn roc_trapezoid_matches_rank_auc() {
    let mut r = rng(12);
    for _ in 0..200 {
        let (labels, scores) = random_tied_instance(&mut r, 30);
        let area = trapezoid_area(&roc_points(&labels, &scores).unwrap());
        assert!((area - brute_force_auc(&labels, &scores)).abs() < 1e-12);
    }
}

#[test]
fn delong_variance_tracks_bootstrap() {
    let mut r = rng(13);
    let labels: Vec<u8> = (0..300).map(|i| u8::from(i % 3 != 0)).collect();
    let scores: Vec<f64> = labels.iter().map(|&l| f64::from(l) * 0.8 + r.random::<f64>() * 1.5).collect();
    let delong = delong_auc_variance(&labels, &scores).unwrap();
    let boot = bootstrap_auc_variance(&labels, &scores, 3000, 5);
    assert!((delong.variance - boot).abs() / boot < 0.15, "{} vs {boot}", delong.variance);
    assert!((delong.auc - brute_force_auc(&labels, &scores)).abs() < 1e-12);
}

#[test]
fn delong_interval_contains_estimate() {
    let labels: Vec<u8> = (0..40).map(|i| u8::from(i % 2 == 0)).collect();
    let scores: Vec<f64> = (0..40).map(|i| (i * 7 % 13) as f64 + f64::from(labels[i]) * 4.0).collect();
    let ci = delong_ci(&labels, &scores, 0.95).unwrap();
    let (lo, hi) = (ci.ci.unwrap().lower, ci.ci.unwrap().upper);
    let est = ci.estimate.unwrap();
    assert!(lo <= est && est <= hi && lo >= 0.0 && hi <= 1.0);
}

#[test]
fn paired_delong_identical_and_swapped() {
    let mut r = rng(14);
    let labels: Vec<u8> = (0..80).map(|i| u8::from(i % 2 == 0)).collect();
    let a: Vec<f64> = labels.iter().map(|&l| f64::from(l) + r.random::<f64>() * 2.0).collect();
    let b: Vec<f64> = labels.iter().map(|&l| f64::from(l) * 0.3 + r.random::<f64>() * 2.0).collect();
    assert_eq!(delong_paired_test(&labels, &a, &a).unwrap().p_value, 1.0);
    let ab = delong_paired_test(&labels, &a, &b).unwrap();
    let ba = delong_paired_test(&labels, &b, &a).unwrap();
    assert!((ab.p_value - ba.p_value).abs() < 1e-12);
    assert!((ab.statistic + ba.statistic).abs() < 1e-12);
}

#[test]
fn mcnemar_exact_branch_matches_binomial_sums() {
    for b in 0..20usize {
        for c in 0..(25 - b) {
            let (x, y) = indicators(b, c, 3);
            let p = mcnemar(&x, &y).unwrap().p_value;
            let expected = if b + c == 0 { 1.0 } else { binomial_two_sided(b as u64, c as u64) };
            assert!((p - expected).abs() < 1e-12, "b={b} c={c}: {p} vs {expected}");
        }
    }
    let (x, y) = indicators(10, 0, 0);
    assert!((mcnemar(&x, &y).unwrap().p_value - 0.001953125).abs() < 1e-12);
}

#[test]
fn mcnemar_asymptotic_branch_matches_hand_expansion() {
    for (b, c) in [(40usize, 20usize), (13, 30), (50, 50)] {
        let (x, y) = indicators(b, c, 5);
        let res = mcnemar(&x, &y).unwrap();
        let stat = ((b as f64 - c as f64).abs() - 1.0).powi(2) / (b + c) as f64;
        assert!((res.statistic - stat).abs() < 1e-12);
        assert!((res.p_value - chi_square_df1_tail(stat)).abs() < 1e-6);
        assert_eq!(res.discordant, Some((b as u64, c as u64)));
    }
}

#[test]
fn chi_square_matches_expected_count_formula() {
    let table = [[30u64, 10], [15, 25]];
    let n = 80.0;
    let rows = [40.0, 40.0];
    let cols = [45.0, 35.0];
    let mut stat = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let e = rows[i] * cols[j] / n;
            stat += (table[i][j] as f64 - e).powi(2) / e;
        }
    }
    let res = chi_square_independence(table).unwrap();
    assert!((res.statistic - stat).abs() < 1e-9);
    assert!((res.p_value - chi_square_df1_tail(stat)).abs() < 1e-6);
}

#[test]
fn welch_statistic_by_hand() {
    let a = [5.1, 4.9, 6.2, 5.8, 6.0];
    let b = [4.1, 3.9, 4.6, 5.0];
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let var = |v: &[f64]| {
        let m = mean(v);
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
    };
    let se = (var(&a) / 5.0 + var(&b) / 4.0).sqrt();
    let t = (mean(&a) - mean(&b)) / se;
    let res = two_sample_t(&a, &b).unwrap();
    assert!((res.statistic - t).abs() < 1e-12);
    assert!(res.p_value > 0.0 && res.p_value < 0.05);
}

#[test]
fn single_class_inputs_are_rejected() {
    assert!(auc(&[1, 1, 1], &[0.1, 0.2, 0.3]).is_err());
    assert!(delong_auc_variance(&[0, 0], &[0.1, 0.2]).is_err());
}
