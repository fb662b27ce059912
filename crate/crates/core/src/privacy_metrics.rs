//! Value- and rank-based measures of how far a distorted matrix has moved
//! from the original.
//!
//! * VD: `||X - TX||_F / ||X||_F`
//! * RP: mean absolute change of each element's rank within its column
//! * RK: fraction of elements whose within-column rank is unchanged
//! * CP: mean absolute change of each column's rank when columns are
//!   ordered by their mean value
//! * CK: fraction of columns whose mean-value rank is unchanged
//!
//! Ranks are ordinal (1-based), ties broken by row (or column) index.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::FeatureMatrix;
use crate::par;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrivacyError {
    #[error("shape mismatch: original is {0}x{1}, distorted is {2}x{3}")]
    Shape(usize, usize, usize, usize),
    #[error("original matrix has zero norm")]
    ZeroNorm,
    #[error("matrices are empty")]
    Empty,
    #[error("column-rank measures need at least 2 columns, got {0}")]
    TooFewColumns(usize),
}

/// Per-column ordinal ranks; each column is a permutation of `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankTable {
    columns: Vec<Vec<usize>>,
}

impl RankTable {
    pub fn column(&self, j: usize) -> &[usize] {
        &self.columns[j]
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }
}

/// 1-based ordinal ranks with ties in original index order.
pub fn ordinal_ranks(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut ranks = vec![0; values.len()];
    for (pos, &i) in order.iter().enumerate() {
        ranks[i] = pos + 1;
    }
    ranks
}

pub fn rank_elements(m: &FeatureMatrix) -> RankTable {
    RankTable {
        columns: par::map_range(m.n_cols(), |j| ordinal_ranks(&m.column(j))),
    }
}

fn check_shape(x: &FeatureMatrix, tx: &FeatureMatrix) -> Result<(), PrivacyError> {
    if x.n_rows() != tx.n_rows() || x.n_cols() != tx.n_cols() {
        return Err(PrivacyError::Shape(
            x.n_rows(),
            x.n_cols(),
            tx.n_rows(),
            tx.n_cols(),
        ));
    }
    if x.n_rows() == 0 || x.n_cols() == 0 {
        return Err(PrivacyError::Empty);
    }
    Ok(())
}

pub fn value_difference(x: &FeatureMatrix, tx: &FeatureMatrix) -> Result<f64, PrivacyError> {
    check_shape(x, tx)?;
    let norm_x = x.values().iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm_x == 0.0 {
        return Err(PrivacyError::ZeroNorm);
    }
    let diff = x
        .values()
        .iter()
        .zip(tx.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(diff / norm_x)
}

/// Per-column (displacement sum, unchanged count).
fn rank_stats(x: &FeatureMatrix, tx: &FeatureMatrix) -> Vec<(u64, u64)> {
    par::map_range(x.n_cols(), |j| {
        let a = ordinal_ranks(&x.column(j));
        let b = ordinal_ranks(&tx.column(j));
        a.iter().zip(&b).fold((0u64, 0u64), |(disp, same), (&ra, &rb)| {
            (disp + ra.abs_diff(rb) as u64, same + u64::from(ra == rb))
        })
    })
}

/// Total absolute rank displacement over all elements (unnormalized RP).
pub fn rank_position_total(x: &FeatureMatrix, tx: &FeatureMatrix) -> Result<u64, PrivacyError> {
    check_shape(x, tx)?;
    Ok(rank_stats(x, tx).iter().map(|s| s.0).sum())
}

/// RP: rank displacement averaged over all `n * m` elements.
pub fn rank_position(x: &FeatureMatrix, tx: &FeatureMatrix) -> Result<f64, PrivacyError> {
    let total = rank_position_total(x, tx)?;
    Ok(total as f64 / (x.n_rows() * x.n_cols()) as f64)
}

/// RK: fraction of elements keeping their within-column rank.
pub fn rank_maintenance(x: &FeatureMatrix, tx: &FeatureMatrix) -> Result<f64, PrivacyError> {
    check_shape(x, tx)?;
    let same: u64 = rank_stats(x, tx).iter().map(|s| s.1).sum();
    Ok(same as f64 / (x.n_rows() * x.n_cols()) as f64)
}

fn column_means(m: &FeatureMatrix) -> Vec<f64> {
    let n = m.n_rows() as f64;
    (0..m.n_cols())
        .map(|j| (0..m.n_rows()).map(|i| m.get(i, j)).sum::<f64>() / n)
        .collect()
}

/// (CP, CK) from the ordering of column means.
pub fn feature_rank_change(
    x: &FeatureMatrix,
    tx: &FeatureMatrix,
) -> Result<(f64, f64), PrivacyError> {
    check_shape(x, tx)?;
    let m = x.n_cols();
    if m < 2 {
        return Err(PrivacyError::TooFewColumns(m));
    }
    let a = ordinal_ranks(&column_means(x));
    let b = ordinal_ranks(&column_means(tx));
    let moved: usize = a.iter().zip(&b).map(|(ra, rb)| ra.abs_diff(*rb)).sum();
    let kept = a.iter().zip(&b).filter(|(ra, rb)| ra == rb).count();
    Ok((moved as f64 / m as f64, kept as f64 / m as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyReport {
    pub vd: f64,
    pub rp: f64,
    /// RP before dividing by `n * m`.
    pub rp_total: u64,
    pub rk: f64,
    pub cp: f64,
    pub ck: f64,
    pub distortion_time_s: f64,
    pub n: usize,
    pub m: usize,
}

impl PrivacyReport {
    /// Header matching [`PrivacyReport::csv_row`].
    pub const CSV_HEADER: [&'static str; 6] = ["VD", "RP", "RK", "CP", "CK", "Time"];

    pub fn csv_row(&self) -> [String; 6] {
        [
            self.vd.to_string(),
            self.rp.to_string(),
            self.rk.to_string(),
            self.cp.to_string(),
            self.ck.to_string(),
            self.distortion_time_s.to_string(),
        ]
    }
}

pub fn privacy_report(
    x: &FeatureMatrix,
    tx: &FeatureMatrix,
    elapsed_s: f64,
) -> Result<PrivacyReport, PrivacyError> {
    check_shape(x, tx)?;
    let vd = value_difference(x, tx)?;
    let stats = rank_stats(x, tx);
    let cells = (x.n_rows() * x.n_cols()) as f64;
    let rp_total: u64 = stats.iter().map(|s| s.0).sum();
    let same: u64 = stats.iter().map(|s| s.1).sum();
    let (cp, ck) = feature_rank_change(x, tx)?;
    Ok(PrivacyReport {
        vd,
        rp: rp_total as f64 / cells,
        rp_total,
        rk: same as f64 / cells,
        cp,
        ck,
        distortion_time_s: elapsed_s,
        n: x.n_rows(),
        m: x.n_cols(),
    })
}
