//! Least-squares data distortion.
//!
//! A linear model `y ~ c + X beta` is fitted to the label, and every
//! element is then replaced by `beta_j * x_ij + (c + mse)`: each column is
//! scaled by its own coefficient and the whole matrix is shifted by the
//! intercept plus the mean squared residual of the fit.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{DatasetError, FeatureMatrix, LabelVector};
use crate::linalg::{self, LinalgError};
use crate::par;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistortionError {
    #[error("{rows} rows for {cols} coefficients (intercept included); need at least as many rows as coefficients")]
    TooFewRows { rows: usize, cols: usize },
    #[error("{features} feature rows but {labels} labels")]
    LabelMismatch { features: usize, labels: usize },
    #[error("singular least-squares fit at column {column:?}: {diagnosis}")]
    Singular { column: String, diagnosis: String },
    #[error("matrix columns {found:?} do not match the fitted columns {expected:?}")]
    ColumnMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("distortion produced a non-finite value in column {0:?}")]
    NonFinite(String),
    #[error("column {0:?} has a zero coefficient and cannot be inverted")]
    NotInvertible(String),
}

/// Fitted coefficients, intercept and mean squared residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionModel {
    pub beta: Vec<f64>,
    pub intercept: f64,
    /// Mean squared residual of the fit, `(1/n) sum (y_i - yhat_i)^2`.
    pub residual: f64,
    pub fitted_on: Vec<String>,
}

impl DistortionModel {
    /// The scalar `c + mse` added to every distorted element.
    pub fn shift(&self) -> f64 {
        self.intercept + self.residual
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept + row.iter().zip(&self.beta).map(|(x, b)| x * b).sum::<f64>()
    }
}

/// The distorted counterpart of a feature matrix; same shape and names.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortedMatrix(FeatureMatrix);

impl DistortedMatrix {
    pub fn matrix(&self) -> &FeatureMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> FeatureMatrix {
        self.0
    }
}

/// Ordinary least-squares fit of the label on `x` with an intercept.
///
/// Solved by Householder QR. Rank-deficient designs are rejected with the
/// first dependent column named; no regularization or minimum-norm fallback
/// is applied.
pub fn fit_lsm(x: &FeatureMatrix, y: &LabelVector) -> Result<DistortionModel, DistortionError> {
    fit_lsm_to(x, &y.as_f64())
}

/// [`fit_lsm`] against an arbitrary real-valued target.
pub fn fit_lsm_to(x: &FeatureMatrix, target: &[f64]) -> Result<DistortionModel, DistortionError> {
    let n = x.n_rows();
    let m = x.n_cols();
    if target.len() != n {
        return Err(DistortionError::LabelMismatch {
            features: n,
            labels: target.len(),
        });
    }
    let p = m + 1;
    if n < p {
        return Err(DistortionError::TooFewRows { rows: n, cols: p });
    }
    let mut design = Vec::with_capacity(n * p);
    for i in 0..n {
        design.push(1.0);
        design.extend_from_slice(x.row(i));
    }
    let column_name = |k: usize| {
        if k == 0 {
            "(intercept)".to_string()
        } else {
            x.column_names()[k - 1].clone()
        }
    };
    let sol = linalg::lstsq(&design, n, p, target).map_err(|e| match e {
        LinalgError::ZeroColumn { column } => DistortionError::Singular {
            column: column_name(column),
            diagnosis: "column is identically zero".into(),
        },
        LinalgError::RankDeficient { column, .. } => DistortionError::Singular {
            column: column_name(column),
            diagnosis: e.to_string(),
        },
        LinalgError::Underdetermined { rows, cols } => DistortionError::TooFewRows { rows, cols },
        other => DistortionError::Singular {
            column: String::new(),
            diagnosis: other.to_string(),
        },
    })?;

    let intercept = sol.coefficients[0];
    let beta = sol.coefficients[1..].to_vec();
    let mut model = DistortionModel {
        beta,
        intercept,
        residual: 0.0,
        fitted_on: x.column_names().to_vec(),
    };
    let sse: f64 = (0..n)
        .map(|i| {
            let e = target[i] - model.predict_row(x.row(i));
            e * e
        })
        .sum();
    model.residual = sse / n as f64;
    Ok(model)
}

/// Applies `tx_ij = beta_j * x_ij + (c + mse)`.
pub fn transform(
    x: &FeatureMatrix,
    model: &DistortionModel,
) -> Result<DistortedMatrix, DistortionError> {
    check_columns(x, model)?;
    let shift = model.shift();
    let columns = par::try_map_range(x.n_cols(), |j| {
        let b = model.beta[j];
        let col: Vec<f64> = (0..x.n_rows()).map(|i| b * x.get(i, j) + shift).collect();
        if col.iter().all(|v| v.is_finite()) {
            Ok(col)
        } else {
            Err(DistortionError::NonFinite(model.fitted_on[j].clone()))
        }
    })?;
    let out = FeatureMatrix::from_columns(&columns, x.column_names().to_vec())
        .map_err(|e: DatasetError| DistortionError::NonFinite(e.to_string()))?;
    Ok(DistortedMatrix(out))
}

/// Undoes [`transform`] given the model. Only meaningful to someone holding
/// the model; used to check the transform numerically.
pub fn inverse_transform(
    tx: &FeatureMatrix,
    model: &DistortionModel,
) -> Result<FeatureMatrix, DistortionError> {
    check_columns(tx, model)?;
    if let Some(j) = model.beta.iter().position(|&b| b == 0.0) {
        return Err(DistortionError::NotInvertible(model.fitted_on[j].clone()));
    }
    let shift = model.shift();
    let columns: Vec<Vec<f64>> = (0..tx.n_cols())
        .map(|j| {
            (0..tx.n_rows())
                .map(|i| (tx.get(i, j) - shift) / model.beta[j])
                .collect()
        })
        .collect();
    FeatureMatrix::from_columns(&columns, tx.column_names().to_vec())
        .map_err(|e| DistortionError::NonFinite(e.to_string()))
}

fn check_columns(x: &FeatureMatrix, model: &DistortionModel) -> Result<(), DistortionError> {
    if x.column_names() != model.fitted_on.as_slice() || model.beta.len() != x.n_cols() {
        return Err(DistortionError::ColumnMismatch {
            expected: model.fitted_on.clone(),
            found: x.column_names().to_vec(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Distortion {
    pub matrix: DistortedMatrix,
    pub model: DistortionModel,
    pub elapsed: Duration,
}

/// Fit then transform, timing both steps together.
pub fn distort(x: &FeatureMatrix, y: &LabelVector) -> Result<Distortion, DistortionError> {
    let start = Instant::now();
    let model = fit_lsm(x, y)?;
    let matrix = transform(x, &model)?;
    let elapsed = start.elapsed();
    Ok(Distortion {
        matrix,
        model,
        elapsed,
    })
}
