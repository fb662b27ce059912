mod common;

use common::*;
use privnids::dataset::{FeatureMatrix, LabelVector};
use privnids::distortion::{distort, fit_lsm_to, transform, DistortionModel};
use privnids::evaluation::{confusion, metrics};
use privnids::feature_selection::{correlation_matrix, pearson, rank_features};
use privnids::privacy_metrics::{
    rank_elements, rank_maintenance, rank_position, rank_position_total,
};
use rand::Rng;

#[test]
fn pearson_small_example_matches_exact_moments() {
    let got = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 5.0]).unwrap();
    let want = exact_pearson(&[1, 2, 3, 4], &[1, 3, 2, 5]);
    assert!((got - want).abs() <= 1e-12);
    assert!((want - 22.0 / 700f64.sqrt()).abs() <= 1e-15);
}

#[test]
fn correlation_matrix_matches_pairwise() {
    let mut r = rng(31);
    let x = uniform_matrix(&mut r, 12, 3, -1.0, 1.0);
    let c = correlation_matrix(&x).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { 1.0 } else { pearson(&x.column(i), &x.column(j)).unwrap() };
            assert!((c.get(i, j).unwrap() - want).abs() <= 1e-12);
        }
    }
}

#[test]
fn ranking_scores_are_mean_abs_correlations() {
    let mut r = rng(32);
    let x = uniform_matrix(&mut r, 30, 3, -1.0, 1.0);
    let c = correlation_matrix(&x).unwrap();
    let ranking = rank_features(&c);
    for s in &ranking {
        let i = x.column_index(&s.name).unwrap();
        let others: Vec<f64> = (0..3).filter(|&j| j != i).map(|j| c.get(i, j).unwrap().abs()).collect();
        let want = others.iter().sum::<f64>() / 2.0;
        assert!((s.score.unwrap() - want).abs() <= 1e-15);
    }
    assert!(ranking.windows(2).all(|w| w[0].score >= w[1].score));
}

#[test]
fn fit_example_matches_normal_equations() {
    let x = FeatureMatrix::from_rows(&[[1.0], [2.0], [3.0]], &["a"]).unwrap();
    let y = [1.0, 2.0, 2.0];
    let m = fit_lsm_to(&x, &y).unwrap();
    let (coef, mse) = normal_equations(&x, &y);
    assert!((m.beta[0] - 0.5).abs() <= 1e-12);
    assert!((m.intercept - 2.0 / 3.0).abs() <= 1e-12);
    assert!((m.intercept - coef[0]).abs() <= 1e-9);
    assert!((m.beta[0] - coef[1]).abs() <= 1e-9);
    assert!((m.residual - mse).abs() <= 1e-9);
    assert!((m.residual - 1.0 / 18.0).abs() <= 1e-12);
}

/// Recomputes the whole distortion with explicit matrix arithmetic.
#[test]
fn distortion_matches_explicit_oracle() {
    let mut r = rng(33);
    let x = uniform_matrix(&mut r, 100, 5, 0.0, 10.0);
    let y = LabelVector::new((0..100).map(|_| r.gen_range(0..=1)).collect()).unwrap();
    let d = distort(&x, &y).unwrap();
    let (coef, mse) = normal_equations(&x, &y.as_f64());
    let shift = coef[0] + mse;
    for i in 0..100 {
        for j in 0..5 {
            let want = coef[j + 1] * x.get(i, j) + shift;
            let got = d.matrix.matrix().get(i, j);
            assert!((got - want).abs() <= 1e-8 * want.abs().max(1e-300), "({i},{j}) {got} vs {want}");
        }
    }
}

#[test]
fn fit_beats_perturbed_coefficients() {
    let mut r = rng(34);
    let x = uniform_matrix(&mut r, 60, 4, -2.0, 2.0);
    let y: Vec<f64> = (0..60).map(|i| x.row(i)[0] - 0.5 * x.row(i)[2] + gaussian(&mut r)).collect();
    let m = fit_lsm_to(&x, &y).unwrap();
    let sse = |c: f64, beta: &[f64]| -> f64 {
        (0..60)
            .map(|i| {
                let p = c + x.row(i).iter().zip(beta).map(|(a, b)| a * b).sum::<f64>();
                (y[i] - p).powi(2)
            })
            .sum::<f64>()
            / 60.0
    };
    assert!((sse(m.intercept, &m.beta) - m.residual).abs() <= 1e-12);
    for _ in 0..100 {
        let scale = r.gen_range(1e-4..1.0);
        let beta: Vec<f64> = m.beta.iter().map(|b| b + scale * gaussian(&mut r)).collect();
        let c = m.intercept + scale * gaussian(&mut r);
        assert!(sse(c, &beta) >= m.residual);
    }
}

#[test]
fn ranks_match_counting_oracle() {
    let mut r = rng(35);
    let x = uniform_matrix(&mut r, 50, 3, -1.0, 1.0);
    let ranks = rank_elements(&x);
    for j in 0..3 {
        assert_eq!(ranks.column(j), brute_ranks(&x.column(j)).as_slice());
    }
}

#[test]
fn rank_examples() {
    let ranks = |v: &[f64]| privnids::privacy_metrics::ordinal_ranks(v);
    assert_eq!(ranks(&[10.0, 5.0, 7.0]), vec![3, 1, 2]);
    assert_eq!(ranks(&[5.0, 5.0, 1.0]), vec![2, 3, 1]);
}

#[test]
fn negated_column_displacement_follows_reversal_formula() {
    let mut r = rng(36);
    for n in [1usize, 2, 7, 8, 51] {
        let col = distinct_column(&mut r, n);
        let x = FeatureMatrix::from_columns(std::slice::from_ref(&col), names(1)).unwrap();
        let tx = FeatureMatrix::from_columns(&[col.iter().map(|v| -v).collect()], names(1)).unwrap();
        let reversal: u64 = (1..=n as i64).map(|k| (2 * k - n as i64 - 1).unsigned_abs()).sum();
        let brute: u64 = brute_ranks(&col)
            .iter()
            .zip(brute_ranks(&tx.column(0)))
            .map(|(a, b)| a.abs_diff(b) as u64)
            .sum();
        assert_eq!(rank_position_total(&x, &tx).unwrap(), reversal);
        assert_eq!(reversal, brute);
    }
}

#[test]
fn rp_hand_example() {
    let x = FeatureMatrix::from_rows(&[[1.0], [2.0], [3.0]], &["a"]).unwrap();
    let tx = FeatureMatrix::from_rows(&[[30.0], [10.0], [20.0]], &["a"]).unwrap();
    assert!((rank_position(&x, &tx).unwrap() - 4.0 / 3.0).abs() <= 1e-15);
}

#[test]
fn rk_matches_elementwise_oracle() {
    let mut r = rng(37);
    let x = uniform_matrix(&mut r, 40, 4, 0.0, 1.0);
    let tx = uniform_matrix(&mut r, 40, 4, 0.0, 1.0);
    let same: usize = (0..4)
        .map(|j| {
            let (a, b) = (brute_ranks(&x.column(j)), brute_ranks(&tx.column(j)));
            a.iter().zip(&b).filter(|(p, q)| p == q).count()
        })
        .sum();
    assert_eq!(rank_maintenance(&x, &tx).unwrap(), same as f64 / 160.0);
}

#[test]
fn mixed_signs_give_constructed_rk() {
    let mut r = rng(38);
    let n = 11;
    let cols: Vec<Vec<f64>> = (0..4).map(|_| distinct_column(&mut r, n)).collect();
    let x = FeatureMatrix::from_columns(&cols, names(4)).unwrap();
    let model = DistortionModel {
        beta: vec![1.5, -0.5, 2.0, -3.0],
        intercept: 0.1,
        residual: 0.2,
        fitted_on: names(4),
    };
    let tx = transform(&x, &model).unwrap().into_matrix();
    // Two columns keep every rank; each reversed odd-length column keeps its median.
    assert_eq!(rank_maintenance(&x, &tx).unwrap(), (2 * n + 2) as f64 / (4 * n) as f64);
}

#[test]
fn confusion_matches_loop_oracle() {
    let mut r = rng(39);
    let t: Vec<u8> = (0..1000).map(|_| r.gen_range(0..=1)).collect();
    let p: Vec<u8> = (0..1000).map(|_| r.gen_range(0..=1)).collect();
    let (mut tp, mut fn_, mut fp, mut tn) = (0, 0, 0, 0);
    for (&a, &b) in t.iter().zip(&p) {
        match (a, b) {
            (1, 1) => tp += 1,
            (1, 0) => fn_ += 1,
            (0, 1) => fp += 1,
            _ => tn += 1,
        }
    }
    let c = confusion(&LabelVector::new(t).unwrap(), &LabelVector::new(p).unwrap()).unwrap();
    assert_eq!((c.tp, c.fn_, c.fp, c.tn), (tp, fn_, fp, tn));
    let m = metrics(&c);
    assert_eq!(m.recall, Some(tp as f64 / (tp + fn_) as f64));
    assert_eq!(m.precision, Some(tp as f64 / (tp + fp) as f64));
    assert_eq!(m.accuracy, Some((tp + tn) as f64 / 1000.0));
}
