//! Least squares via Householder QR, plus the HAC sandwich used by the
//! factor regressions.

use nalgebra::{DMatrix, DVector};

use super::newey_west::bartlett;
use super::EconError;

/// Relative threshold on `|R_jj| / ‖X_j‖` below which column `j` is treated
/// as linearly dependent on the columns before it.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    pub r_squared: f64,
    pub ssr: f64,
    pub sst: f64,
    /// `(XᵀX)⁻¹`, kept for covariance estimates.
    pub xtx_inv: DMatrix<f64>,
}

/// Design matrix with a leading column of ones.
pub fn design_with_intercept(columns: &[&[f64]]) -> DMatrix<f64> {
    let n = columns.first().map_or(0, |c| c.len());
    assert!(columns.iter().all(|c| c.len() == n), "design columns differ in length");
    DMatrix::from_fn(n, columns.len() + 1, |i, j| if j == 0 { 1.0 } else { columns[j - 1][i] })
}

/// Solve `min ‖y − Xβ‖²`. `x` must include the intercept column if one is wanted.
pub fn ols(y: &[f64], x: &DMatrix<f64>) -> Result<OlsFit, EconError> {
    let (n, k) = x.shape();
    assert_eq!(y.len(), n, "ols: y has {} rows, X has {n}", y.len());
    if n < k || k == 0 {
        return Err(EconError::Underdetermined { rows: n, cols: k });
    }
    let qr = x.clone().qr();
    let r = qr.r();
    for j in 0..k {
        let col_norm = x.column(j).norm();
        if col_norm == 0.0 || r[(j, j)].abs() <= RANK_TOL * col_norm {
            return Err(EconError::Singular { column: j });
        }
    }
    let q = qr.q();
    let yv = DVector::from_column_slice(y);
    let qty = q.transpose() * &yv;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or(EconError::Singular { column: k - 1 })?;
    let fitted = x * &beta;
    let residuals: Vec<f64> = yv.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let ybar = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    let r_squared = if sst > 0.0 {
        (1.0 - ssr / sst).clamp(0.0, 1.0)
    } else if ssr <= f64::EPSILON {
        1.0
    } else {
        0.0
    };
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(EconError::Singular { column: k - 1 })?;
    let xtx_inv = &r_inv * r_inv.transpose();
    Ok(OlsFit {
        coefficients: beta.iter().copied().collect(),
        residuals,
        r_squared,
        ssr,
        sst,
        xtx_inv,
    })
}

/// Newey-West HAC covariance of the OLS coefficients.
///
/// `(XᵀX)⁻¹ S (XᵀX)⁻¹` with `S = Σ_l w_l Σ_t e_t e_{t−l} (x_t x_{t−l}ᵀ + x_{t−l} x_tᵀ)`,
/// Bartlett weights, scaled by `T / (T − K)`.
pub fn hac_covariance(x: &DMatrix<f64>, fit: &OlsFit, lag: usize) -> DMatrix<f64> {
    let (t, k) = x.shape();
    let e = &fit.residuals;
    let scores: Vec<DVector<f64>> = (0..t).map(|i| x.row(i).transpose() * e[i]).collect();
    let mut s = DMatrix::<f64>::zeros(k, k);
    for g in &scores {
        s += g * g.transpose();
    }
    for l in 1..=lag.min(t.saturating_sub(1)) {
        let w = bartlett(l, lag);
        let mut acc = DMatrix::<f64>::zeros(k, k);
        for i in l..t {
            acc += &scores[i] * scores[i - l].transpose();
        }
        s += (&acc + acc.transpose()) * w;
    }
    let correction = if t > k { t as f64 / (t - k) as f64 } else { 1.0 };
    &fit.xtx_inv * s * &fit.xtx_inv * correction
}
