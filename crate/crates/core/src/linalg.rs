//! Small dense-matrix helpers shared across the operator modules.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use ndarray_linalg::{c64, SVD};

use crate::error::{Error, Result};

/// Largest absolute entry, used for residual checks.
pub fn max_abs(a: ArrayView2<'_, f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn max_abs_c(a: ArrayView2<'_, c64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.norm()))
}

/// Operator 2-norm (largest singular value).
pub fn spectral_norm(a: &Array2<f64>) -> Result<f64> {
    let (_, s, _) = a.svd(false, false)?;
    Ok(s.iter().copied().fold(0.0, f64::max))
}

/// `diag(d) * a`, scaling row i by `d[i]`.
pub fn scale_rows(d: ArrayView1<'_, f64>, a: &Array2<f64>) -> Array2<f64> {
    let mut out = a.clone();
    for (i, mut row) in out.rows_mut().into_iter().enumerate() {
        row.mapv_inplace(|v| v * d[i]);
    }
    out
}

/// `a * diag(d)`, scaling column j by `d[j]`.
pub fn scale_cols(a: &Array2<f64>, d: ArrayView1<'_, f64>) -> Array2<f64> {
    let mut out = a.clone();
    for (j, mut col) in out.columns_mut().into_iter().enumerate() {
        col.mapv_inplace(|v| v * d[j]);
    }
    out
}

/// Weighted inner product `<f, g>_mu = sum conj(f) g mu` (conjugate-linear
/// in the first argument).
pub fn dot_weighted_c(
    f: ArrayView1<'_, c64>,
    g: ArrayView1<'_, c64>,
    mu: ArrayView1<'_, f64>,
) -> c64 {
    f.iter()
        .zip(g.iter())
        .zip(mu.iter())
        .map(|((a, b), &m)| a.conj() * b * m)
        .sum()
}

pub fn dot_weighted(
    f: ArrayView1<'_, f64>,
    g: ArrayView1<'_, f64>,
    mu: ArrayView1<'_, f64>,
) -> f64 {
    f.iter()
        .zip(g.iter())
        .zip(mu.iter())
        .map(|((a, b), &m)| a * b * m)
        .sum()
}

/// Entrywise square roots of a strictly positive vector, with the
/// degenerate-stationary guard applied first.
pub fn positive_sqrt(pi: ArrayView1<'_, f64>, threshold: f64) -> Result<Array1<f64>> {
    let min_entry = pi.iter().copied().fold(f64::INFINITY, f64::min);
    if min_entry <= threshold {
        return Err(Error::DegenerateStationary { min_entry });
    }
    Ok(pi.mapv(f64::sqrt))
}

/// Converts a real matrix into a complex one.
pub fn to_complex(a: &Array2<f64>) -> Array2<c64> {
    a.mapv(|v| c64::new(v, 0.0))
}

/// Moore-Penrose pseudo-inverse through the SVD, truncating singular values
/// below `rcond * sigma_max`.
pub fn pseudo_inverse(a: &Array2<f64>, rcond: f64) -> Result<Array2<f64>> {
    let (m, n) = a.dim();
    if m == 0 || n == 0 {
        return Ok(Array2::zeros((n, m)));
    }
    let (u, s, vt) = a.svd(true, true)?;
    let u = u.expect("requested U");
    let vt = vt.expect("requested V^T");
    let smax = s.iter().copied().fold(0.0, f64::max);
    let mut out = Array2::zeros((n, m));
    for (i, &sigma) in s.iter().enumerate().take(m.min(n)) {
        if sigma > rcond * smax {
            let vi = vt.row(i);
            let ui = u.column(i);
            let inv = 1.0 / sigma;
            for r in 0..n {
                let vr = vi[r] * inv;
                for c in 0..m {
                    out[[r, c]] += vr * ui[c];
                }
            }
        }
    }
    Ok(out)
}

/// 2-norm condition number of a real matrix.
pub fn condition_number_2(a: &Array2<f64>) -> Result<(f64, f64, f64)> {
    let (_, s, _) = a.svd(false, false)?;
    let max = s.iter().copied().fold(0.0, f64::max);
    let min = s.iter().copied().fold(f64::INFINITY, f64::min);
    let kappa = if min > 0.0 { max / min } else { f64::INFINITY };
    Ok((kappa, max, min))
}
