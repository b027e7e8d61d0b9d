//! Linear least squares via orthogonal factorization.

use nalgebra::{DMatrix, DVector};

use crate::data::{Dataset, ModelFormula};
use crate::error::{Error, Result};

use super::{design, term_names, RANK_TOL};

/// A fitted linear regression.
#[derive(Clone, Debug)]
pub struct LinearFit {
    pub coef: DVector<f64>,
    /// Residual variance SSE / (n - p).
    pub sigma2_hat: f64,
    /// (X'X)^-1; multiply by a dispersion to get a coefficient covariance.
    pub xtx_inverse: DMatrix<f64>,
    pub r2: f64,
    pub dof_resid: usize,
    pub term_names: Vec<String>,
}

impl LinearFit {
    /// Estimated squared standard errors, sigma2_hat * diag((X'X)^-1).
    pub fn coef_variances(&self) -> Vec<f64> {
        (0..self.coef.len())
            .map(|j| self.sigma2_hat * self.xtx_inverse[(j, j)])
            .collect()
    }
}

/// Fit on the rows of `d` complete on the formula variables.
pub fn fit_linear(d: &Dataset, f: &ModelFormula) -> Result<LinearFit> {
    let (x, y) = design(d, f)?;
    fit_linear_xy(&x, &y, term_names(f))
}

/// Matrix-level entry point; `x` must carry the intercept column.
pub fn fit_linear_xy(x: &DMatrix<f64>, y: &DVector<f64>, names: Vec<String>) -> Result<LinearFit> {
    let (n, p) = x.shape();
    if n <= p {
        return Err(Error::TooFewRows { rows: n, params: p });
    }

    let max_col_norm = (0..p)
        .map(|j| x.column(j).norm())
        .fold(0.0_f64, f64::max);
    let qr = x.clone().qr();
    let r = qr.r();
    let tol = RANK_TOL * max_col_norm;
    for j in 0..p {
        if r[(j, j)].abs() < tol {
            return Err(Error::RankDeficient {
                column: names.get(j).cloned().unwrap_or_else(|| format!("column {j}")),
            });
        }
    }
    let qty = qr.q().transpose() * y;
    let coef = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::RankDeficient {
            column: "design".into(),
        })?;

    let rinv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .expect("R is nonsingular after the rank check");
    let xtx_inverse = &rinv * rinv.transpose();

    let resid = y - x * &coef;
    let mut sse = resid.norm_squared();
    let yty = y.norm_squared();
    // snap numerically-exact fits to zero residual variance
    if sse < 1e-24 * yty.max(1.0) {
        sse = 0.0;
    }
    let y_bar = y.mean();
    let sst: f64 = y.iter().map(|v| (v - y_bar).powi(2)).sum();
    let r2 = if sst > 0.0 {
        (1.0 - sse / sst).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let dof_resid = n - p;
    Ok(LinearFit {
        coef,
        sigma2_hat: sse / dof_resid as f64,
        xtx_inverse,
        r2,
        dof_resid,
        term_names: names,
    })
}
