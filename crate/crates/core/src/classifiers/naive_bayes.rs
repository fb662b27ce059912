//! Gaussian naive Bayes.

use serde::{Deserialize, Serialize};

use crate::dataset::{FeatureMatrix, LabelVector};
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NaiveBayesParams {
    /// Lower bound on every per-class feature variance.
    pub var_floor: f64,
}

impl Default for NaiveBayesParams {
    fn default() -> Self {
        Self { var_floor: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDensity {
    pub log_prior: f64,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

impl ClassDensity {
    fn log_likelihood(&self, row: &[f64]) -> f64 {
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        self.means
            .iter()
            .zip(&self.variances)
            .zip(row)
            .map(|((mu, var), x)| -0.5 * (ln_2pi + var.ln() + (x - mu) * (x - mu) / var))
            .sum::<f64>()
            + self.log_prior
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    /// Indexed by label.
    pub classes: [ClassDensity; 2],
}

pub fn fit(params: &NaiveBayesParams, x: &FeatureMatrix, y: &LabelVector) -> NaiveBayesModel {
    let n = x.n_rows() as f64;
    let density = |label: u8| {
        let rows: Vec<usize> = (0..x.n_rows())
            .filter(|&i| y.as_slice()[i] == label)
            .collect();
        let count = rows.len() as f64;
        let means: Vec<f64> = (0..x.n_cols())
            .map(|j| rows.iter().map(|&i| x.get(i, j)).sum::<f64>() / count)
            .collect();
        let variances = (0..x.n_cols())
            .map(|j| {
                let var = rows
                    .iter()
                    .map(|&i| (x.get(i, j) - means[j]).powi(2))
                    .sum::<f64>()
                    / count;
                var.max(params.var_floor)
            })
            .collect();
        ClassDensity {
            log_prior: (count / n).ln(),
            means,
            variances,
        }
    };
    NaiveBayesModel {
        classes: [density(0), density(1)],
    }
}

impl NaiveBayesModel {
    /// Higher posterior wins; equal posteriors give 0.
    pub fn predict_row(&self, row: &[f64]) -> u8 {
        let l0 = self.classes[0].log_likelihood(row);
        let l1 = self.classes[1].log_likelihood(row);
        u8::from(l1 > l0)
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Vec<u8> {
        par::map_range(x.n_rows(), |i| self.predict_row(x.row(i)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimates_class_moments() {
        let x = FeatureMatrix::from_rows(&[[1.0], [3.0], [10.0], [14.0]], &["a"]).unwrap();
        let y = LabelVector::new(vec![0, 0, 1, 1]).unwrap();
        let m = fit(&NaiveBayesParams::default(), &x, &y);
        assert_eq!(m.classes[0].means, vec![2.0]);
        assert_eq!(m.classes[0].variances, vec![1.0]);
        assert_eq!(m.classes[1].means, vec![12.0]);
        assert_eq!(m.classes[1].variances, vec![4.0]);
        assert!((m.classes[0].log_prior - 0.5f64.ln()).abs() < 1e-15);
        assert_eq!(m.predict(&x), vec![0, 0, 1, 1]);
    }

    #[test]
    fn zero_variance_is_floored() {
        let x = FeatureMatrix::from_rows(&[[1.0, 0.0], [1.0, 1.0], [2.0, 0.0], [2.0, 1.0]], &["a", "b"])
            .unwrap();
        let y = LabelVector::new(vec![0, 0, 1, 1]).unwrap();
        let m = fit(&NaiveBayesParams::default(), &x, &y);
        assert_eq!(m.classes[0].variances[0], 1e-9);
        assert_eq!(m.predict(&x), vec![0, 0, 1, 1]);
        assert!(m.classes[0].log_likelihood(&[1.5, 0.5]).is_finite());
    }
}
