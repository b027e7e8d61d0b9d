//! Binary logistic regression by Newton's method with step-halving.

use nalgebra::{DMatrix, DVector};

use crate::data::{Dataset, ModelFormula, VariableKind};
use crate::error::{Error, Result};

use super::{
    design, log1p_exp, mcfadden_pseudo_r2, sigmoid, term_names, COEF_TOL, DIVERGENCE_BOUND,
    MAX_ITER, SEP_PROB_TOL,
};

/// A fitted logistic regression on the log-odds scale.
#[derive(Clone, Debug)]
pub struct GlmFit {
    pub coef: DVector<f64>,
    /// Inverse observed information at the solution.
    pub cov: DMatrix<f64>,
    pub loglik: f64,
    pub loglik_null: f64,
    /// McFadden's 1 - loglik/loglik_null; `None` for a constant response.
    pub pseudo_r2: Option<f64>,
    pub converged: bool,
    pub separation_detected: bool,
    pub iterations: usize,
    pub term_names: Vec<String>,
}

impl GlmFit {
    pub fn coef_variances(&self) -> Vec<f64> {
        (0..self.coef.len()).map(|j| self.cov[(j, j)]).collect()
    }
}

pub fn fit_logistic(d: &Dataset, f: &ModelFormula) -> Result<GlmFit> {
    let kind = d.column(&f.response)?.kind().clone();
    if kind != VariableKind::Binary {
        return Err(Error::Spec(format!(
            "logistic response {:?} must be binary, got {}",
            f.response,
            kind.name()
        )));
    }
    let (x, y) = design(d, f)?;
    fit_logistic_xy(&x, &y, term_names(f))
}

fn loglik_at(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> f64 {
    let eta = x * beta;
    y.iter()
        .zip(eta.iter())
        .map(|(&yi, &e)| yi * e - log1p_exp(e))
        .sum()
}

fn null_loglik(y: &DVector<f64>) -> f64 {
    let n = y.len() as f64;
    let p = y.sum() / n;
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        n * (p * p.ln() + (1.0 - p) * (1.0 - p).ln())
    }
}

/// Matrix-level entry point; `x` must carry the intercept column.
///
/// Separation is flagged (with `converged = false`), never silently absorbed:
/// the caller decides whether to drop predictors or raise an error.
pub fn fit_logistic_xy(x: &DMatrix<f64>, y: &DVector<f64>, names: Vec<String>) -> Result<GlmFit> {
    let (n, p) = x.shape();
    if n <= p {
        return Err(Error::TooFewRows { rows: n, params: p });
    }
    debug_assert!(y.iter().all(|&v| v == 0.0 || v == 1.0));

    let loglik_null = null_loglik(y);
    let mut beta = DVector::zeros(p);
    let mut ll = loglik_at(x, y, &beta);
    let mut converged = false;
    let mut iterations = 0;

    let separated = |beta: &DVector<f64>, probs: &DVector<f64>| {
        beta.amax() > DIVERGENCE_BOUND
            || probs
                .iter()
                .any(|&pi| pi < SEP_PROB_TOL || pi > 1.0 - SEP_PROB_TOL)
    };

    while iterations < MAX_ITER {
        iterations += 1;
        let eta = x * &beta;
        let probs = eta.map(sigmoid);
        if separated(&beta, &probs) {
            return Ok(finish(x, y, beta, ll, loglik_null, false, true, iterations, names));
        }

        // Newton step: (X'WX) delta = X'(y - p)
        let grad = x.transpose() * (y - &probs);
        let mut hess = DMatrix::zeros(p, p);
        weighted_cross(x, &probs, &mut hess);
        let delta = match hess.clone().cholesky() {
            Some(ch) => ch.solve(&grad),
            None => {
                return Ok(finish(x, y, beta, ll, loglik_null, false, true, iterations, names))
            }
        };

        // step-halving keeps the log-likelihood non-decreasing
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand = &beta + step * &delta;
            let cand_ll = loglik_at(x, y, &cand);
            if cand_ll >= ll - 1e-12 {
                let change = (step * &delta).amax();
                beta = cand;
                ll = cand_ll;
                accepted = true;
                if change < COEF_TOL {
                    converged = true;
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // no ascent direction improves the likelihood: already at optimum
            converged = true;
        }
        if converged {
            break;
        }
    }

    if !converged {
        return Err(Error::NonConvergence { iterations });
    }
    let probs = (x * &beta).map(sigmoid);
    let sep = separated(&beta, &probs);
    Ok(finish(x, y, beta, ll, loglik_null, !sep, sep, iterations, names))
}

/// Accumulate X' diag(p(1-p)) X into `hess`.
fn weighted_cross(x: &DMatrix<f64>, probs: &DVector<f64>, hess: &mut DMatrix<f64>) {
    let (n, p) = x.shape();
    for i in 0..n {
        let w = probs[i] * (1.0 - probs[i]);
        for a in 0..p {
            let xa = x[(i, a)] * w;
            for b in a..p {
                hess[(a, b)] += xa * x[(i, b)];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            hess[(a, b)] = hess[(b, a)];
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    x: &DMatrix<f64>,
    _y: &DVector<f64>,
    beta: DVector<f64>,
    loglik: f64,
    loglik_null: f64,
    converged: bool,
    separation: bool,
    iterations: usize,
    names: Vec<String>,
) -> GlmFit {
    let p = x.ncols();
    let probs = (x * &beta).map(sigmoid);
    let mut hess = DMatrix::zeros(p, p);
    weighted_cross(x, &probs, &mut hess);
    let cov = hess
        .cholesky()
        .map(|ch| ch.inverse())
        .unwrap_or_else(|| DMatrix::zeros(p, p));
    let pseudo_r2 = if converged {
        mcfadden_pseudo_r2(loglik, loglik_null).ok()
    } else {
        None
    };
    GlmFit {
        coef: beta,
        cov,
        loglik,
        loglik_null,
        pseudo_r2,
        converged,
        separation_detected: separation,
        iterations,
        term_names: names,
    }
}
