//! Independent oracles and data generators shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use privnids::dataset::{FeatureMatrix, LabelVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn names(m: usize) -> Vec<String> {
    (0..m).map(|j| format!("x{j}")).collect()
}

pub fn uniform_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize, lo: f64, hi: f64) -> FeatureMatrix {
    let values = (0..n * m).map(|_| rng.gen_range(lo..hi)).collect();
    FeatureMatrix::new(values, n, names(m)).unwrap()
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Solves the normal equations `(A^T A) b = A^T y` for the design
/// `A = [1 | X]` by Gauss-Jordan elimination with partial pivoting.
/// Returns `([intercept, beta...], mean squared residual)`.
pub fn normal_equations(x: &FeatureMatrix, y: &[f64]) -> (Vec<f64>, f64) {
    let n = x.n_rows();
    let p = x.n_cols() + 1;
    let design = |i: usize, j: usize| if j == 0 { 1.0 } else { x.get(i, j - 1) };
    let mut a = vec![vec![0.0; p + 1]; p];
    for r in 0..p {
        for c in 0..p {
            a[r][c] = (0..n).map(|i| design(i, r) * design(i, c)).sum();
        }
        a[r][p] = (0..n).map(|i| design(i, r) * y[i]).sum();
    }
    for col in 0..p {
        let pivot = (col..p)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        let d = a[col][col];
        for c in col..=p {
            a[col][c] /= d;
        }
        for r in 0..p {
            if r != col {
                let f = a[r][col];
                for c in col..=p {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let coef: Vec<f64> = (0..p).map(|r| a[r][p]).collect();
    let sse: f64 = (0..n)
        .map(|i| {
            let pred: f64 = (0..p).map(|j| coef[j] * design(i, j)).sum();
            (y[i] - pred).powi(2)
        })
        .sum();
    (coef, sse / n as f64)
}

/// Pearson coefficient of integer samples from exact integer moments:
/// `(n Sxy - Sx Sy) / sqrt((n Sxx - Sx^2)(n Syy - Sy^2))`. Only the final
/// division and square root round.
pub fn exact_pearson(a: &[i64], b: &[i64]) -> f64 {
    let n = a.len() as i128;
    let sx: i128 = a.iter().map(|&v| v as i128).sum();
    let sy: i128 = b.iter().map(|&v| v as i128).sum();
    let sxx: i128 = a.iter().map(|&v| (v as i128) * (v as i128)).sum();
    let syy: i128 = b.iter().map(|&v| (v as i128) * (v as i128)).sum();
    let sxy: i128 = a.iter().zip(b).map(|(&u, &v)| (u as i128) * (v as i128)).sum();
    let num = n * sxy - sx * sy;
    let dx = n * sxx - sx * sx;
    let dy = n * syy - sy * sy;
    num as f64 / ((dx as f64) * (dy as f64)).sqrt()
}

/// O(n^2) ordinal rank: one plus the number of entries that sort before
/// `v[i]`, with equal values ordered by index.
pub fn brute_ranks(v: &[f64]) -> Vec<usize> {
    (0..v.len())
        .map(|i| 1 + (0..v.len()).filter(|&k| v[k] < v[i] || (v[k] == v[i] && k < i)).count())
        .collect()
}

/// Points in `[-10, 10]^2` labelled by the side of a fixed line, keeping
/// only points at distance at least 1 from it.
pub fn separable(seed: u64, n: usize) -> (FeatureMatrix, LabelVector) {
    let mut r = rng(seed);
    let (w, b): ([f64; 2], f64) = ([0.8, -0.6], 0.5);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    while rows.len() < n {
        let p: [f64; 2] = [r.gen_range(-10.0..10.0), r.gen_range(-10.0..10.0)];
        let s = w[0] * p[0] + w[1] * p[1] + b;
        if s.abs() >= 1.0 {
            rows.push(p);
            labels.push(u8::from(s > 0.0));
        }
    }
    (
        FeatureMatrix::from_rows(&rows, &["a", "b"]).unwrap(),
        LabelVector::new(labels).unwrap(),
    )
}

/// Two unit-variance Gaussian blobs centred at `(-5, -5)` and `(5, 5)`,
/// alternating labels.
pub fn blobs(seed: u64, n: usize) -> (FeatureMatrix, LabelVector) {
    let mut r = rng(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let y = (i % 2) as u8;
        let mu = if y == 1 { 5.0 } else { -5.0 };
        rows.push([mu + gaussian(&mut r), mu + gaussian(&mut r)]);
        labels.push(y);
    }
    (
        FeatureMatrix::from_rows(&rows, &["a", "b"]).unwrap(),
        LabelVector::new(labels).unwrap(),
    )
}

/// A column of `n` distinct values in random order.
pub fn distinct_column(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    use rand::seq::SliceRandom;
    let mut v: Vec<f64> = (0..n).map(|i| i as f64 * 1.5 - 7.0).collect();
    v.shuffle(rng);
    v
}

pub fn accuracy(pred: &[u8], truth: &[u8]) -> f64 {
    pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}
