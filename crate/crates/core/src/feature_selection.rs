//! Pearson correlation structure and redundancy-based feature selection.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{DatasetError, FeatureMatrix};
use crate::par;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelectionError {
    #[error("correlation needs at least 2 observations, got {0}")]
    TooShort(usize),
    #[error("vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("correlation is undefined: at least one input is constant")]
    Undefined,
    #[error("threshold {0} is outside (0, 1]")]
    BadThreshold(f64),
    #[error("selection keeps no features")]
    EmptySelection,
    #[error("selected feature {0:?} is not in the matrix")]
    MissingFeature(String),
}

impl From<DatasetError> for SelectionError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::UnknownColumn(c) => SelectionError::MissingFeature(c),
            other => SelectionError::MissingFeature(other.to_string()),
        }
    }
}

/// Mean-centred copy of a column plus its sum of squares.
struct Centered {
    dev: Vec<f64>,
    sum_sq: f64,
}

/// `None` for a constant (or empty) column.
fn center(v: &[f64]) -> Option<Centered> {
    let first = *v.first()?;
    if v.iter().all(|&x| x == first) {
        return None;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let dev: Vec<f64> = v.iter().map(|x| x - mean).collect();
    let sum_sq = dev.iter().map(|d| d * d).sum();
    Some(Centered { dev, sum_sq })
}

fn centered_pearson(a: &Centered, b: &Centered) -> f64 {
    let cov: f64 = a.dev.iter().zip(&b.dev).map(|(x, y)| x * y).sum();
    (cov / (a.sum_sq.sqrt() * b.sum_sq.sqrt())).clamp(-1.0, 1.0)
}

/// Pearson correlation coefficient of two equal-length samples.
///
/// Returns [`SelectionError::Undefined`] when either sample is constant,
/// since the standard deviation in the denominator is then zero.
pub fn pearson(f1: &[f64], f2: &[f64]) -> Result<f64, SelectionError> {
    if f1.len() != f2.len() {
        return Err(SelectionError::LengthMismatch(f1.len(), f2.len()));
    }
    if f1.len() < 2 {
        return Err(SelectionError::TooShort(f1.len()));
    }
    match (center(f1), center(f2)) {
        (Some(a), Some(b)) => Ok(centered_pearson(&a, &b)),
        _ => Err(SelectionError::Undefined),
    }
}

/// Symmetric `m x m` matrix of pairwise coefficients. `None` marks a pair
/// whose correlation is undefined (a constant column).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    column_names: Vec<String>,
    values: Vec<Option<f64>>,
}

impl CorrelationMatrix {
    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn dim(&self) -> usize {
        self.column_names.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i * self.dim() + j]
    }

    /// Columns whose correlation with every other column is undefined.
    pub fn constant_columns(&self) -> Vec<String> {
        let m = self.dim();
        (0..m)
            .filter(|&i| m > 1 && (0..m).filter(|&j| j != i).all(|j| self.get(i, j).is_none()))
            .map(|i| self.column_names[i].clone())
            .collect()
    }

    /// Largest defined off-diagonal `|r|`, if any pair is defined.
    pub fn max_abs_off_diagonal(&self) -> Option<f64> {
        let m = self.dim();
        (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .filter_map(|(i, j)| self.get(i, j))
            .map(f64::abs)
            .reduce(f64::max)
    }

    /// Builds a matrix from explicit row-major entries.
    pub fn from_entries(
        column_names: Vec<String>,
        values: Vec<Option<f64>>,
    ) -> Result<Self, SelectionError> {
        let m = column_names.len();
        if values.len() != m * m {
            return Err(SelectionError::LengthMismatch(values.len(), m * m));
        }
        Ok(Self {
            column_names,
            values,
        })
    }
}

/// Pairwise correlations of every column of `x`. Pairs are evaluated
/// independently, so the parallel build matches the sequential one bit
/// for bit.
pub fn correlation_matrix(x: &FeatureMatrix) -> Result<CorrelationMatrix, SelectionError> {
    let n = x.n_rows();
    if n < 2 {
        return Err(SelectionError::TooShort(n));
    }
    let m = x.n_cols();
    let centered: Vec<Option<Centered>> = par::map_range(m, |j| center(&x.column(j)));
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .collect();
    let upper = par::map_range(pairs.len(), |k| {
        let (i, j) = pairs[k];
        match (&centered[i], &centered[j]) {
            (Some(a), Some(b)) => Some(centered_pearson(a, b)),
            _ => None,
        }
    });
    let mut values = vec![None; m * m];
    for i in 0..m {
        values[i * m + i] = Some(1.0);
    }
    for (&(i, j), r) in pairs.iter().zip(upper) {
        values[i * m + j] = r;
        values[j * m + i] = r;
    }
    Ok(CorrelationMatrix {
        column_names: x.column_names().to_vec(),
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub name: String,
    /// Mean `|r|` against every other feature; `None` when no pair is defined.
    pub score: Option<f64>,
}

/// Scores each feature by its mean absolute correlation with all other
/// features and sorts strongest first. Ties keep column order; undefined
/// scores go last.
pub fn rank_features(c: &CorrelationMatrix) -> Vec<FeatureScore> {
    let m = c.dim();
    let mut scored: Vec<(usize, Option<f64>)> = (0..m)
        .map(|i| {
            let defined: Vec<f64> = (0..m)
                .filter(|&j| j != i)
                .filter_map(|j| c.get(i, j))
                .map(f64::abs)
                .collect();
            let score = if defined.is_empty() {
                None
            } else {
                Some(defined.iter().sum::<f64>() / defined.len() as f64)
            };
            (i, score)
        })
        .collect();
    scored.sort_by(|(ia, a), (ib, b)| match (a, b) {
        (Some(a), Some(b)) => b.total_cmp(a).then(ia.cmp(ib)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => ia.cmp(ib),
    });
    scored
        .into_iter()
        .map(|(i, score)| FeatureScore {
            name: c.column_names[i].clone(),
            score,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum DropReason {
    /// `|r|` with an earlier kept feature exceeded the threshold. Names the
    /// earliest such feature.
    Correlated { with: String, coefficient: f64 },
    /// Excluded from the scan because the column holds encoded nominal values.
    Nominal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedFeature {
    pub name: String,
    #[serde(flatten)]
    pub reason: DropReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub threshold: f64,
    pub kept: Vec<String>,
    pub dropped: Vec<DroppedFeature>,
    /// Constant columns. Their correlations are undefined, so the
    /// threshold rule never drops them.
    pub undefined: Vec<String>,
    pub ranking: Vec<FeatureScore>,
}

impl SelectionReport {
    pub fn dropped_names(&self) -> Vec<&str> {
        self.dropped.iter().map(|d| d.name.as_str()).collect()
    }
}

/// Greedy redundancy filter.
///
/// Columns are scanned in their original order; a column is dropped when
/// its `|r|` with any already-kept column is strictly greater than
/// `threshold`, otherwise it is kept. Undefined pairs never trigger a drop.
pub fn select_by_threshold(
    c: &CorrelationMatrix,
    threshold: f64,
) -> Result<SelectionReport, SelectionError> {
    select_excluding(c, threshold, &[])
}

/// [`select_by_threshold`] with the `nominal` columns removed up front.
/// They take no part in the scan, so they can neither be kept nor cause
/// another column to be dropped.
pub fn select_excluding(
    c: &CorrelationMatrix,
    threshold: f64,
    nominal: &[String],
) -> Result<SelectionReport, SelectionError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(SelectionError::BadThreshold(threshold));
    }
    for name in nominal {
        if !c.column_names.contains(name) {
            return Err(SelectionError::MissingFeature(name.clone()));
        }
    }
    let m = c.dim();
    let mut kept: Vec<usize> = Vec::new();
    let mut dropped = Vec::new();
    for j in 0..m {
        if nominal.contains(&c.column_names[j]) {
            dropped.push(DroppedFeature {
                name: c.column_names[j].clone(),
                reason: DropReason::Nominal,
            });
            continue;
        }
        let trigger = kept
            .iter()
            .find_map(|&k| c.get(k, j).filter(|r| r.abs() > threshold).map(|r| (k, r)));
        match trigger {
            Some((k, r)) => dropped.push(DroppedFeature {
                name: c.column_names[j].clone(),
                reason: DropReason::Correlated {
                    with: c.column_names[k].clone(),
                    coefficient: r,
                },
            }),
            None => kept.push(j),
        }
    }
    Ok(SelectionReport {
        threshold,
        kept: kept.iter().map(|&k| c.column_names[k].clone()).collect(),
        dropped,
        undefined: c.constant_columns(),
        ranking: rank_features(c),
    })
}

/// Restricts `x` to the report's kept columns, preserving their order in `x`.
pub fn apply_selection(
    x: &FeatureMatrix,
    report: &SelectionReport,
) -> Result<FeatureMatrix, SelectionError> {
    if report.kept.is_empty() {
        return Err(SelectionError::EmptySelection);
    }
    for name in &report.kept {
        if x.column_index(name).is_none() {
            return Err(SelectionError::MissingFeature(name.clone()));
        }
    }
    let ordered: Vec<String> = x
        .column_names()
        .iter()
        .filter(|c| report.kept.contains(c))
        .cloned()
        .collect();
    Ok(x.select_columns(&ordered)?)
}
