//! Conditional regression engines used for both imputation and analysis
//! models: linear least squares, binary logistic, and proportional-odds
//! ordinal regression, plus posterior parameter draws for proper imputation.

mod draw;
mod linear;
mod logistic;
mod ordinal;

pub use draw::{draw_parameters, impute_draw, ParameterDraw};
pub use linear::{fit_linear, fit_linear_xy, LinearFit};
pub use logistic::{fit_logistic, fit_logistic_xy, GlmFit};
pub use ordinal::{fit_ordinal, fit_ordinal_xy, OrdinalFit};

use nalgebra::{DMatrix, DVector};

use crate::data::{Dataset, ModelFormula};
use crate::error::{Error, Result};

/// Iteration cap shared by the likelihood-based fitters.
pub(crate) const MAX_ITER: usize = 50;
/// Coefficient-change max-norm below which a fit counts as converged.
pub(crate) const COEF_TOL: f64 = 1e-10;
/// Fitted probabilities this close to 0/1 flag separation.
pub(crate) const SEP_PROB_TOL: f64 = 1e-10;
/// Coefficient magnitude beyond which iteration is treated as divergent.
pub(crate) const DIVERGENCE_BOUND: f64 = 1e3;
/// Relative rank tolerance for the orthogonal-factorization solver.
pub(crate) const RANK_TOL: f64 = 1e-10;

/// A fitted model of any of the three kinds.
#[derive(Clone, Debug)]
pub enum Fit {
    Linear(LinearFit),
    Logistic(GlmFit),
    Ordinal(OrdinalFit),
}

impl Fit {
    pub fn converged(&self) -> bool {
        match self {
            Fit::Linear(_) => true,
            Fit::Logistic(f) => f.converged,
            Fit::Ordinal(f) => f.converged,
        }
    }

    pub fn separation_detected(&self) -> bool {
        match self {
            Fit::Linear(_) => false,
            Fit::Logistic(f) => f.separation_detected,
            Fit::Ordinal(f) => f.separation_detected,
        }
    }

    /// R-squared for linear fits, McFadden pseudo-R-squared otherwise.
    pub fn fit_statistic(&self) -> Option<f64> {
        match self {
            Fit::Linear(f) => Some(f.r2),
            Fit::Logistic(f) => f.pseudo_r2,
            Fit::Ordinal(f) => f.pseudo_r2,
        }
    }
}

/// McFadden's 1 - loglik/loglik_null for a likelihood-based fit.
pub fn mcfadden_pseudo_r2(loglik: f64, loglik_null: f64) -> Result<f64> {
    if loglik_null == 0.0 {
        return Err(Error::DegenerateNull);
    }
    Ok(1.0 - loglik / loglik_null)
}

/// Build the response vector and intercept-led design matrix from the rows of
/// `d` that are complete on the formula variables.
pub(crate) fn design(d: &Dataset, f: &ModelFormula) -> Result<(DMatrix<f64>, DVector<f64>)> {
    f.validate(d)?;
    let rows = d.complete_rows(&f.variables())?;
    let n = rows.len();
    let p = f.predictors.len() + 1;
    let resp = d.column(&f.response)?;
    let y = DVector::from_iterator(n, rows.iter().map(|&i| resp.value(i).unwrap()));
    let mut x = DMatrix::zeros(n, p);
    for r in 0..n {
        x[(r, 0)] = 1.0;
    }
    for (j, name) in f.predictors.iter().enumerate() {
        let col = d.column(name)?;
        for (r, &i) in rows.iter().enumerate() {
            x[(r, j + 1)] = col.value(i).unwrap();
        }
    }
    Ok((x, y))
}

/// Predictor-only design matrix (no intercept column), used by the ordinal model.
pub(crate) fn design_no_intercept(
    d: &Dataset,
    f: &ModelFormula,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let (x, y) = design(d, f)?;
    Ok((x.columns(1, x.ncols() - 1).into_owned(), y))
}

pub(crate) fn term_names(f: &ModelFormula) -> Vec<String> {
    std::iter::once("intercept".to_string())
        .chain(f.predictors.iter().cloned())
        .collect()
}

/// Numerically stable log(1 + e^x).
pub(crate) fn log1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}
