//! Thin wrappers around the dense LAPACK kernels with deterministic conventions.

use ndarray::prelude::*;
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

use crate::error::Result;

/// Symmetric eigendecomposition with eigenvalues ascending and a fixed sign
/// convention: the entry of largest magnitude in each eigenvector is positive.
pub fn sym_eig(m: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let (vals, mut vecs) = m.eigh(UPLO::Lower)?;
    fix_column_signs(&mut vecs);
    Ok((vals, vecs))
}

/// Hermitian eigendecomposition (ascending eigenvalues), column sign fixed by
/// making the entry of largest modulus real positive.
///
/// The backend interprets row-major complex input as its transpose, i.e. the
/// conjugate for Hermitian matrices, so the input is conjugated first; the
/// eigenvector orientation is pinned by unit tests.
pub fn hermitian_eig(m: &Array2<Complex64>) -> Result<(Array1<f64>, Array2<Complex64>)> {
    let m = m.as_standard_layout().mapv(|z| z.conj());
    let (vals, mut vecs) = m.eigh(UPLO::Lower)?;
    for mut col in vecs.columns_mut() {
        let mut best = 0usize;
        let mut best_norm = 0.0;
        for (i, v) in col.iter().enumerate() {
            let n = v.norm_sqr();
            if n > best_norm {
                best_norm = n;
                best = i;
            }
        }
        if best_norm > 0.0 {
            let phase = col[best] / col[best].norm();
            for v in col.iter_mut() {
                *v /= phase;
            }
        }
    }
    Ok((vals, vecs))
}

fn fix_column_signs(vecs: &mut Array2<f64>) {
    for mut col in vecs.columns_mut() {
        let mut best = 0usize;
        let mut best_abs = 0.0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > best_abs {
                best_abs = v.abs();
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.mapv_inplace(|v| -v);
        }
    }
}

/// Max-norm of a matrix.
pub fn max_abs(m: &Array2<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Frobenius norm.
pub fn fro_norm(m: &Array2<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Skew-symmetry defect `max |M + M^T|`.
pub fn skew_defect(m: &Array2<f64>) -> f64 {
    let n = m.nrows();
    let mut d = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            d = d.max((m[[i, j]] + m[[j, i]]).abs());
        }
    }
    d
}

/// Ordinary least-squares slope of y against x.
pub fn regression_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    sxy / sxx
}
