//! Dense least squares via Householder QR.
//!
//! Columns are equilibrated to unit Euclidean norm before factorizing so the
//! rank test compares like with like; flow features span ten or more orders
//! of magnitude (`dur` vs `sload`), and an unscaled `R` diagonal would flag
//! perfectly healthy columns as degenerate.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("design matrix is empty")]
    Empty,
    #[error("system is underdetermined: {rows} rows for {cols} unknowns")]
    Underdetermined { rows: usize, cols: usize },
    #[error("column {column} is identically zero")]
    ZeroColumn { column: usize },
    #[error(
        "design matrix is rank deficient: column {column} is numerically dependent on earlier \
         columns (|r_kk| = {pivot:.3e}, tolerance {tolerance:.3e})"
    )]
    RankDeficient {
        column: usize,
        pivot: f64,
        tolerance: f64,
    },
    #[error("non-finite value in least-squares input")]
    NonFinite,
}

/// Solution of `min ||A x - b||_2`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstsqSolution {
    pub coefficients: Vec<f64>,
    /// Sum of squared residuals `||A x - b||^2`, taken from the
    /// orthogonal complement of the QR factorization.
    pub residual_sum_squares: f64,
}

/// Solves the least-squares problem for a row-major `rows x cols` matrix.
///
/// Fails rather than returning a minimum-norm solution when the columns
/// are linearly dependent to working precision.
pub fn lstsq(a: &[f64], rows: usize, cols: usize, b: &[f64]) -> Result<LstsqSolution, LinalgError> {
    if rows == 0 || cols == 0 {
        return Err(LinalgError::Empty);
    }
    if rows < cols {
        return Err(LinalgError::Underdetermined { rows, cols });
    }
    assert_eq!(a.len(), rows * cols, "matrix storage does not match shape");
    assert_eq!(b.len(), rows, "right-hand side length does not match rows");
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(LinalgError::NonFinite);
    }

    // Column-major working copy, each column scaled to unit norm.
    let mut q: Vec<Vec<f64>> = (0..cols)
        .map(|j| (0..rows).map(|i| a[i * cols + j]).collect())
        .collect();
    let mut scale = vec![0.0; cols];
    for (j, col) in q.iter_mut().enumerate() {
        let norm = norm2(col);
        if norm == 0.0 {
            return Err(LinalgError::ZeroColumn { column: j });
        }
        col.iter_mut().for_each(|v| *v /= norm);
        scale[j] = norm;
    }
    let mut rhs = b.to_vec();

    let tolerance = (rows.max(cols) as f64) * f64::EPSILON * 4.0;
    let mut diag = vec![0.0; cols];
    for k in 0..cols {
        let alpha = norm2(&q[k][k..]);
        if alpha <= tolerance {
            return Err(LinalgError::RankDeficient {
                column: k,
                pivot: alpha,
                tolerance,
            });
        }
        // v = x - beta e1 with beta = -sign(x_0) ||x||; stored in place.
        let beta = if q[k][k] >= 0.0 { -alpha } else { alpha };
        let (head, tail) = q.split_at_mut(k + 1);
        let v = &mut head[k][k..];
        v[0] -= beta;
        let vnorm_sq: f64 = v.iter().map(|x| x * x).sum();
        for col in tail.iter_mut() {
            reflect(v, vnorm_sq, &mut col[k..]);
        }
        reflect(v, vnorm_sq, &mut rhs[k..]);
        diag[k] = beta;
    }

    // Back substitution on R x = Q^T b; R's strict upper triangle lives in q.
    let mut x = vec![0.0; cols];
    for k in (0..cols).rev() {
        let mut acc = rhs[k];
        for j in k + 1..cols {
            acc -= q[j][k] * x[j];
        }
        x[k] = acc / diag[k];
    }
    let residual_sum_squares = rhs[cols..].iter().map(|v| v * v).sum();
    for (xk, s) in x.iter_mut().zip(&scale) {
        *xk /= s;
    }
    Ok(LstsqSolution {
        coefficients: x,
        residual_sum_squares,
    })
}

fn reflect(v: &[f64], vnorm_sq: f64, target: &mut [f64]) {
    let dot: f64 = v.iter().zip(target.iter()).map(|(a, b)| a * b).sum();
    let f = 2.0 * dot / vnorm_sq;
    for (t, vi) in target.iter_mut().zip(v) {
        *t -= f * vi;
    }
}

fn norm2(v: &[f64]) -> f64 {
    // Scaled accumulation avoids overflow on byte-count columns.
    let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return 0.0;
    }
    max * v.iter().map(|x| (x / max) * (x / max)).sum::<f64>().sqrt()
}
