//! Linear SVM trained by stochastic subgradient descent on the
//! L2-regularized hinge loss.
//!
//! Objective: `lambda/2 ||w||^2 + mean_i max(0, 1 - y_i (w . z_i + b))`,
//! with `z` the training-standardized features and `y_i` in {-1, +1}.
//! The bias is not regularized. Step size at update `t` is
//! `1 / (lambda * t + 1)`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{FeatureMatrix, LabelVector};
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmParams {
    pub epochs: usize,
    pub lambda: f64,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            epochs: 20,
            lambda: 1e-4,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub means: Vec<f64>,
    /// Training standard deviations; zero-variance columns store 1.
    pub scales: Vec<f64>,
}

pub fn fit(params: &SvmParams, x: &FeatureMatrix, y: &LabelVector) -> SvmModel {
    let n = x.n_rows();
    let m = x.n_cols();
    let means: Vec<f64> = (0..m)
        .map(|j| (0..n).map(|i| x.get(i, j)).sum::<f64>() / n as f64)
        .collect();
    let scales: Vec<f64> = (0..m)
        .map(|j| {
            let var = (0..n).map(|i| (x.get(i, j) - means[j]).powi(2)).sum::<f64>() / n as f64;
            let sd = var.sqrt();
            if sd > 0.0 {
                sd
            } else {
                1.0
            }
        })
        .collect();
    let z: Vec<f64> = (0..n)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| (x.get(i, j) - means[j]) / scales[j])
        .collect();
    let target: Vec<f64> = y
        .as_slice()
        .iter()
        .map(|&v| if v == 1 { 1.0 } else { -1.0 })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut w = vec![0.0; m];
    let mut b = 0.0;
    let mut t = 0u64;
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (params.lambda * t as f64 + 1.0);
            let zi = &z[i * m..(i + 1) * m];
            let margin = target[i] * (dot(&w, zi) + b);
            let decay = 1.0 - eta * params.lambda;
            w.iter_mut().for_each(|wj| *wj *= decay);
            if margin < 1.0 {
                for (wj, zj) in w.iter_mut().zip(zi) {
                    *wj += eta * target[i] * zj;
                }
                b += eta * target[i];
            }
        }
    }
    SvmModel {
        weights: w,
        bias: b,
        means,
        scales,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl SvmModel {
    pub fn decision(&self, row: &[f64]) -> f64 {
        row.iter()
            .zip(&self.means)
            .zip(&self.scales)
            .zip(&self.weights)
            .map(|(((x, mu), s), w)| w * (x - mu) / s)
            .sum::<f64>()
            + self.bias
    }

    pub fn predict_row(&self, row: &[f64]) -> u8 {
        u8::from(self.decision(row) > 0.0)
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Vec<u8> {
        par::map_range(x.n_rows(), |i| self.predict_row(x.row(i)))
    }
}
