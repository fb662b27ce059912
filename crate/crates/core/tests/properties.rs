mod common;

use common::{brute_ranks, names};
use privnids::dataset::{
    prepare, stratified_indices, Categorical, FeatureMatrix, LabelVector, PrepareOptions,
    RawRecordTable,
};
use privnids::distortion::{fit_lsm, fit_lsm_to, inverse_transform, transform, DistortionModel};
use privnids::evaluation::{confusion, metrics, ConfusionCounts};
use privnids::feature_selection::{
    apply_selection, correlation_matrix, pearson, select_by_threshold,
};
use privnids::privacy_metrics::{
    ordinal_ranks, privacy_report, rank_maintenance, rank_position, value_difference,
};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    -1e3..1e3f64
}

fn non_constant(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(finite(), n).prop_filter("constant", |v| v.iter().any(|&x| x != v[0]))
}

fn pair(n: std::ops::Range<usize>) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    n.prop_flat_map(|n| (non_constant(n..n + 1), non_constant(n..n + 1)))
}

fn matrix(rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> impl Strategy<Value = FeatureMatrix> {
    (rows, cols).prop_flat_map(|(n, m)| {
        prop::collection::vec(finite(), n * m)
            .prop_map(move |v| FeatureMatrix::new(v, n, names(m)).unwrap())
    })
}

fn matrix_pair(
    rows: std::ops::Range<usize>,
    cols: std::ops::Range<usize>,
) -> impl Strategy<Value = (FeatureMatrix, FeatureMatrix)> {
    (rows, cols).prop_flat_map(|(n, m)| {
        let one = move || {
            prop::collection::vec(finite(), n * m)
                .prop_map(move |v| FeatureMatrix::new(v, n, names(m)).unwrap())
        };
        (one(), one())
    })
}

fn labels(n: std::ops::Range<usize>) -> impl Strategy<Value = LabelVector> {
    prop::collection::vec(0u8..=1, n).prop_map(|v| LabelVector::new(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn pearson_self_is_one(f in non_constant(2..60)) {
        prop_assert!((pearson(&f, &f).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn pearson_is_symmetric_and_bounded((a, b) in pair(2..50)) {
        let r = pearson(&a, &b).unwrap();
        prop_assert!((-1.0..=1.0).contains(&r));
        prop_assert!((r - pearson(&b, &a).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn pearson_affine_invariance((a, b) in pair(3..50), scale in 0.01..100.0f64, shift in -100.0..100.0f64, flip in any::<bool>()) {
        let s = if flip { -scale } else { scale };
        let g: Vec<f64> = a.iter().map(|v| s * v + shift).collect();
        let want = s.signum() * pearson(&a, &b).unwrap();
        prop_assert!((pearson(&g, &b).unwrap() - want).abs() <= 1e-9);
    }

    #[test]
    fn correlation_matrix_symmetric(x in matrix(3..30, 2..7)) {
        let c = correlation_matrix(&x).unwrap();
        for i in 0..c.dim() {
            for j in 0..c.dim() {
                match (c.get(i, j), c.get(j, i)) {
                    (Some(u), Some(v)) => prop_assert!((u - v).abs() <= 1e-12),
                    (None, None) => {}
                    _ => prop_assert!(false, "definedness differs at {i},{j}"),
                }
            }
        }
    }

    #[test]
    fn kept_pairs_respect_threshold(x in matrix(4..40, 2..8), t in 0.05..1.0f64) {
        let c = correlation_matrix(&x).unwrap();
        let report = select_by_threshold(&c, t).unwrap();
        prop_assert_eq!(report.kept.len() + report.dropped.len(), x.n_cols());
        for d in &report.dropped {
            if let privnids::feature_selection::DropReason::Correlated { coefficient, .. } = d.reason {
                prop_assert!(coefficient.abs() > t);
            }
        }
        if let Ok(reduced) = apply_selection(&x, &report) {
            let rc = correlation_matrix(&reduced).unwrap();
            for i in 0..rc.dim() {
                for j in 0..rc.dim() {
                    if i != j {
                        if let Some(r) = rc.get(i, j) {
                            prop_assert!(r.abs() <= t);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn threshold_above_max_drops_nothing(x in matrix(4..30, 2..6)) {
        let c = correlation_matrix(&x).unwrap();
        if let Some(max) = c.max_abs_off_diagonal() {
            if max < 1.0 {
                let t = (max + 1.0) / 2.0;
                prop_assert!(select_by_threshold(&c, t).unwrap().dropped.is_empty());
            }
        }
    }

    #[test]
    fn split_fractions_are_complementary(y in labels(6..120), f in 0.05..0.95f64, seed in any::<u64>()) {
        prop_assume!(y.class_counts().iter().all(|&c| c >= 2));
        let a = stratified_indices(&y, f, seed).unwrap();
        let b = stratified_indices(&y, 1.0 - f, seed).unwrap();
        prop_assert_eq!(&a.train, &b.test);
        prop_assert_eq!(&a.test, &b.train);
        let mut all: Vec<usize> = a.train.iter().chain(&a.test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..y.len()).collect::<Vec<_>>());
        for class in 0..2u8 {
            let total = y.as_slice().iter().filter(|&&v| v == class).count() as f64;
            let in_test = a.test.iter().filter(|&&i| y.as_slice()[i] == class).count() as f64;
            prop_assert!((in_test - f * total).abs() <= 1.0, "class {class}: {in_test} of {total}");
        }
    }

    #[test]
    fn encoding_round_trips(words in prop::collection::vec("[a-z]{1,4}", 2..40), seed in any::<u64>()) {
        let rows: Vec<Vec<String>> = words
            .iter()
            .enumerate()
            .map(|(i, w)| vec![w.clone(), (i as u64 ^ seed).to_string(), (i % 2).to_string()])
            .collect();
        let table = RawRecordTable {
            header: vec!["proto".into(), "n".into(), "label".into()],
            rows,
            source_path: "mem".into(),
        };
        let opts = PrepareOptions {
            drop_columns: vec![],
            label_column: "label".into(),
            category_column: None,
            categorical: Categorical::Named(vec!["proto".into()]),
        };
        let p = prepare(&table, &opts).unwrap();
        let again = prepare(&table, &opts).unwrap();
        prop_assert_eq!(&p, &again);
        let j = p.features.column_index("proto").unwrap();
        for (i, w) in words.iter().enumerate() {
            prop_assert_eq!(p.encoding.decode("proto", p.features.get(i, j)), Some(w.as_str()));
        }
    }

    #[test]
    fn ranks_match_brute_force(v in prop::collection::vec(-20i32..20, 1..60)) {
        let v: Vec<f64> = v.into_iter().map(f64::from).collect();
        prop_assert_eq!(ordinal_ranks(&v), brute_ranks(&v));
    }

    #[test]
    fn vd_scales_linearly((x, tx) in matrix_pair(2..20, 1..5), c in -10.0..10.0f64) {
        prop_assume!(x.values().iter().any(|&v| v != 0.0));
        let vd = value_difference(&x, &tx).unwrap();
        let values: Vec<f64> = x.values().iter().zip(tx.values()).map(|(a, b)| a + c * (b - a)).collect();
        let y = FeatureMatrix::new(values, x.n_rows(), x.column_names().to_vec()).unwrap();
        let got = value_difference(&x, &y).unwrap();
        prop_assert!((got - c.abs() * vd).abs() <= 1e-9 * (1.0 + vd * c.abs()));
    }

    #[test]
    fn rank_measures_ignore_shared_monotone_maps((x, tx) in matrix_pair(2..30, 1..5)) {
        let warp = |m: &FeatureMatrix| {
            let v = m.values().iter().map(|&a| a.powi(3) + 2.0 * a).collect();
            FeatureMatrix::new(v, m.n_rows(), m.column_names().to_vec()).unwrap()
        };
        prop_assert_eq!(rank_position(&x, &tx).unwrap(), rank_position(&warp(&x), &warp(&tx)).unwrap());
        prop_assert_eq!(rank_maintenance(&x, &tx).unwrap(), rank_maintenance(&warp(&x), &warp(&tx)).unwrap());
    }

    #[test]
    fn keeping_implies_no_displacement((x, tx) in matrix_pair(2..20, 2..5)) {
        prop_assume!(x.values().iter().any(|&v| v != 0.0));
        let r = privacy_report(&x, &tx, 0.0).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.rk) && (0.0..=1.0).contains(&r.ck));
        if r.rk == 1.0 { prop_assert_eq!(r.rp, 0.0); }
        if r.ck == 1.0 { prop_assert_eq!(r.cp, 0.0); }
    }

    #[test]
    fn transform_sign_law(n in 2usize..40, signs in prop::collection::vec(any::<bool>(), 1..6), seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let m = signs.len();
        let cols: Vec<Vec<f64>> = (0..m).map(|_| common::distinct_column(&mut rng, n)).collect();
        let x = FeatureMatrix::from_columns(&cols, names(m)).unwrap();
        let model = DistortionModel {
            beta: signs.iter().map(|&p| if p { 0.7 } else { -1.3 }).collect(),
            intercept: 0.4,
            residual: 0.1,
            fitted_on: names(m),
        };
        let tx = transform(&x, &model).unwrap().into_matrix();
        for (j, &positive) in signs.iter().enumerate() {
            let a = ordinal_ranks(&x.column(j));
            let b = ordinal_ranks(&tx.column(j));
            for i in 0..n {
                let want = if positive { a[i] } else { n + 1 - a[i] };
                prop_assert_eq!(b[i], want);
            }
        }
    }

    #[test]
    fn residual_ignores_row_order(x in matrix(8..30, 1..4), seed in any::<u64>()) {
        let n = x.n_rows();
        let y: Vec<f64> = (0..n).map(|i| ((i as u64).wrapping_mul(seed | 1) % 2) as f64).collect();
        let Ok(a) = fit_lsm_to(&x, &y) else { return Ok(()) };
        let mut perm: Vec<usize> = (0..n).collect();
        use rand::seq::SliceRandom;
        perm.shuffle(&mut common::rng(seed));
        let yp: Vec<f64> = perm.iter().map(|&i| y[i]).collect();
        let b = fit_lsm_to(&x.select_rows(&perm), &yp).unwrap();
        prop_assert!((a.residual - b.residual).abs() <= 1e-9 * (1.0 + a.residual));
    }

    #[test]
    fn inverse_recovers_input(x in matrix(3..30, 1..5), betas in prop::collection::vec(prop_oneof![0.1..5.0f64, -5.0..-0.1f64], 5), c in -3.0..3.0f64) {
        let m = x.n_cols();
        let model = DistortionModel {
            beta: betas[..m].to_vec(),
            intercept: c,
            residual: 0.2,
            fitted_on: x.column_names().to_vec(),
        };
        let tx = transform(&x, &model).unwrap().into_matrix();
        let back = inverse_transform(&tx, &model).unwrap();
        for (a, b) in x.values().iter().zip(back.values()) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn metrics_swap_under_label_swap(truth in labels(1..200), pred_bits in prop::collection::vec(0u8..=1, 200)) {
        let pred = LabelVector::new(pred_bits[..truth.len()].to_vec()).unwrap();
        let c = confusion(&truth, &pred).unwrap();
        let s = confusion(&truth.complement(), &pred.complement()).unwrap();
        prop_assert_eq!(s, c.swapped());
        let (a, b) = (metrics(&c), metrics(&s));
        prop_assert_eq!(a.recall, b.specificity);
        prop_assert_eq!(a.specificity, b.recall);
        prop_assert_eq!(a.accuracy, b.accuracy);
    }

    #[test]
    fn accuracy_identity(tp in 0u64..500, fn_ in 0u64..500, fp in 0u64..500, tn in 0u64..500) {
        let c = ConfusionCounts { tp, fn_, fp, tn };
        let m = metrics(&c);
        if let (Some(acc), Some(r), Some(s)) = (m.accuracy, m.recall, m.specificity) {
            let (p, n) = ((tp + fn_) as f64, (tn + fp) as f64);
            prop_assert!((acc - (r * p + s * n) / (p + n)).abs() <= 1e-12);
        }
        for v in [m.recall, m.precision, m.specificity, m.f_score, m.accuracy].into_iter().flatten() {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn perfect_prediction(y in labels(2..100)) {
        prop_assume!(y.class_counts().iter().all(|&c| c > 0));
        let c = confusion(&y, &y).unwrap();
        prop_assert_eq!((c.fn_, c.fp), (0, 0));
        prop_assert_eq!(metrics(&c).accuracy, Some(1.0));
    }
}

#[test]
fn fit_lsm_accepts_labels() {
    let x = FeatureMatrix::from_rows(&[[0.0], [1.0], [2.0], [3.0]], &["a"]).unwrap();
    let y = LabelVector::new(vec![0, 0, 1, 1]).unwrap();
    let m = fit_lsm(&x, &y).unwrap();
    let (coef, mse) = common::normal_equations(&x, &y.as_f64());
    assert!((m.intercept - coef[0]).abs() < 1e-12);
    assert!((m.beta[0] - coef[1]).abs() < 1e-12);
    assert!((m.residual - mse).abs() < 1e-12);
}
