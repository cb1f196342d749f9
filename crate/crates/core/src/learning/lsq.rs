use nalgebra::{DMatrix, DVector};

use crate::error::{PwlError, Result};

/// Relative threshold on `|R_ii|` below which a column counts as dependent.
const RANK_TOL: f64 = 1e-12;

/// Minimizes `‖Xθ − y‖² + λ‖θ‖²` through a Householder QR of the stacked
/// system `[X; √λ·I] θ = [y; 0]`.
pub fn least_squares(x: &DMatrix<f64>, y: &[f64], ridge: f64) -> Result<Vec<f64>> {
    let (rows, cols) = x.shape();
    if y.len() != rows {
        return Err(PwlError::DimensionMismatch { expected: rows, found: y.len() });
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(PwlError::InvalidConfig(format!("ridge must be a finite value >= 0, got {ridge}")));
    }
    if cols == 0 {
        return Ok(Vec::new());
    }
    let (a, b) = if ridge > 0.0 {
        let s = ridge.sqrt();
        let mut a = DMatrix::zeros(rows + cols, cols);
        a.view_mut((0, 0), (rows, cols)).copy_from(x);
        for j in 0..cols {
            a[(rows + j, j)] = s;
        }
        let mut b = DVector::zeros(rows + cols);
        b.rows_mut(0, rows).copy_from_slice(y);
        (a, b)
    } else {
        if rows < cols {
            return Err(PwlError::Singular { rank: rows, cols });
        }
        (x.clone(), DVector::from_column_slice(y))
    };
    let qr = a.qr();
    let r = qr.r();
    let scale = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rank = r.diagonal().iter().filter(|v| v.abs() > RANK_TOL * scale).count();
    if rank < cols || scale == 0.0 {
        return Err(PwlError::Singular { rank, cols });
    }
    let qtb = qr.q().transpose() * b;
    let theta = r
        .solve_upper_triangular(&qtb)
        .ok_or(PwlError::Singular { rank, cols })?;
    Ok(theta.iter().copied().collect())
}

/// Column-major design matrix from per-basis value columns.
pub(crate) fn design(columns: &[Vec<f64>], rows: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i])
}

/// Least-squares weights for `columns` and the resulting training SSE.
pub(crate) fn refit(columns: &[Vec<f64>], y: &[f64], ridge: f64) -> Result<(Vec<f64>, f64)> {
    let theta = least_squares(&design(columns, y.len()), y, ridge)?;
    let sse = sse(columns, &theta, y);
    Ok((theta, sse))
}

pub(crate) fn predict(columns: &[Vec<f64>], theta: &[f64], rows: usize) -> Vec<f64> {
    (0..rows)
        .map(|i| columns.iter().zip(theta).map(|(c, t)| c[i] * t).sum())
        .collect()
}

pub(crate) fn sse(columns: &[Vec<f64>], theta: &[f64], y: &[f64]) -> f64 {
    predict(columns, theta, y.len())
        .iter()
        .zip(y)
        .map(|(p, t)| (p - t) * (p - t))
        .sum()
}
