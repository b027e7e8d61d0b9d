//! Posterior parameter draws and value imputation.
//!
//! Proper imputation draws model parameters before drawing values, so that
//! parameter uncertainty shows up as between-imputation variance. Linear fits
//! use the normal-inverse-chi-square posterior; logistic and ordinal fits use
//! the large-sample normal approximation around the MLE.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};

use super::{sigmoid, Fit, GlmFit, LinearFit, OrdinalFit};

const ORDERING_REDRAW_ATTEMPTS: usize = 100;

/// One draw from a fit's approximate parameter posterior.
#[derive(Clone, Debug)]
pub enum ParameterDraw {
    Linear {
        coef: DVector<f64>,
        /// Residual-variance draw; zero for a perfect fit.
        dispersion: f64,
    },
    Logistic {
        coef: DVector<f64>,
    },
    Ordinal {
        coef: DVector<f64>,
        thresholds: DVector<f64>,
        levels: Vec<i64>,
    },
}

fn standard_normal_vec(n: usize, rng: &mut impl Rng) -> DVector<f64> {
    DVector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(rng)))
}

/// Draw from N(mean, cov) via a Cholesky factor, with a small ridge retry for
/// covariances at the semidefinite boundary.
fn mvn_draw(mean: &DVector<f64>, cov: &DMatrix<f64>, rng: &mut impl Rng) -> Result<DVector<f64>> {
    let p = mean.len();
    let chol = cov.clone().cholesky().or_else(|| {
        let ridge = 1e-12 * (cov.trace() / p as f64).max(1e-300);
        (cov + DMatrix::identity(p, p) * ridge).cholesky()
    });
    let l = chol
        .ok_or_else(|| Error::Spec("parameter covariance is not positive definite".into()))?
        .l();
    Ok(mean + l * standard_normal_vec(p, rng))
}

fn draw_linear(fit: &LinearFit, rng: &mut impl Rng) -> Result<ParameterDraw> {
    if fit.sigma2_hat == 0.0 {
        return Ok(ParameterDraw::Linear {
            coef: fit.coef.clone(),
            dispersion: 0.0,
        });
    }
    let dof = fit.dof_resid as f64;
    let chi: f64 = ChiSquared::new(dof)
        .map_err(|e| Error::Spec(format!("chi-squared({dof}): {e}")))?
        .sample(rng);
    let dispersion = fit.sigma2_hat * dof / chi;
    let cov = &fit.xtx_inverse * dispersion;
    let coef = mvn_draw(&fit.coef, &cov, rng)?;
    Ok(ParameterDraw::Linear { coef, dispersion })
}

fn draw_logistic(fit: &GlmFit, rng: &mut impl Rng) -> Result<ParameterDraw> {
    Ok(ParameterDraw::Logistic {
        coef: mvn_draw(&fit.coef, &fit.cov, rng)?,
    })
}

fn draw_ordinal(fit: &OrdinalFit, rng: &mut impl Rng) -> Result<ParameterDraw> {
    let p = fit.coef.len();
    let k1 = fit.thresholds.len();
    let mut mean = DVector::zeros(p + k1);
    mean.rows_mut(0, p).copy_from(&fit.coef);
    mean.rows_mut(p, k1).copy_from(&fit.thresholds);
    for _ in 0..ORDERING_REDRAW_ATTEMPTS {
        let draw = mvn_draw(&mean, &fit.cov, rng)?;
        let theta: Vec<f64> = (0..k1).map(|j| draw[p + j]).collect();
        if theta.windows(2).all(|w| w[1] > w[0]) {
            return Ok(ParameterDraw::Ordinal {
                coef: draw.rows(0, p).into_owned(),
                thresholds: draw.rows(p, k1).into_owned(),
                levels: fit.levels.clone(),
            });
        }
    }
    Err(Error::RedrawExhausted {
        attempts: ORDERING_REDRAW_ATTEMPTS,
    })
}

/// Draw parameters from a converged, non-separated fit.
pub fn draw_parameters(fit: &Fit, rng: &mut impl Rng) -> Result<ParameterDraw> {
    if !fit.converged() || fit.separation_detected() {
        return Err(Error::Spec(
            "parameter draws require a converged fit without separation".into(),
        ));
    }
    match fit {
        Fit::Linear(f) => draw_linear(f, rng),
        Fit::Logistic(f) => draw_logistic(f, rng),
        Fit::Ordinal(f) => draw_ordinal(f, rng),
    }
}

/// Impute values for incomplete rows given a parameter draw.
///
/// `x` holds the predictor values of the rows to impute: intercept-led for
/// linear and logistic draws, predictors-only for ordinal draws (matching the
/// design each fitter uses).
pub fn impute_draw(draw: &ParameterDraw, x: &DMatrix<f64>, rng: &mut impl Rng) -> Vec<f64> {
    match draw {
        ParameterDraw::Linear { coef, dispersion } => {
            let mean = x * coef;
            let sd = dispersion.sqrt();
            mean.iter()
                .map(|&m| {
                    let z: f64 = StandardNormal.sample(rng);
                    m + sd * z
                })
                .collect()
        }
        ParameterDraw::Logistic { coef } => {
            let eta = x * coef;
            eta.iter()
                .map(|&e| {
                    if rng.gen::<f64>() < sigmoid(e) {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect()
        }
        ParameterDraw::Ordinal {
            coef,
            thresholds,
            levels,
        } => {
            let eta = x * coef;
            eta.iter()
                .map(|&e| {
                    let u: f64 = rng.gen();
                    let mut cat = levels.len() - 1;
                    for (j, &t) in thresholds.iter().enumerate() {
                        if u < sigmoid(t - e) {
                            cat = j;
                            break;
                        }
                    }
                    levels[cat] as f64
                })
                .collect()
        }
    }
}
