//! Analysis-model fitting on completed or listwise-deleted data, and Rubin's
//! rules for combining the M analyses.

use rayon::prelude::*;

use crate::data::{Dataset, ModelFormula};
use crate::error::{Error, Result};
use crate::mice::{CompletedDataset, Method};
use crate::regress::{fit_linear, fit_logistic, fit_ordinal};

/// One analysis-model fit: per-term points and squared standard errors.
#[derive(Clone, Debug)]
pub struct Estimate {
    pub terms: Vec<EstimateTerm>,
    pub n_used: usize,
    pub model_kind: Method,
}

#[derive(Clone, Debug)]
pub struct EstimateTerm {
    pub name: String,
    pub point: f64,
    pub variance: f64,
}

impl Estimate {
    pub fn term(&self, name: &str) -> Option<&EstimateTerm> {
        self.terms.iter().find(|t| t.name == name)
    }
}

/// Rubin's-rules combination of M estimates.
#[derive(Clone, Debug)]
pub struct PooledEstimate {
    pub terms: Vec<PooledTerm>,
    pub m: usize,
}

#[derive(Clone, Debug)]
pub struct PooledTerm {
    pub name: String,
    /// Pooled point: mean of the M points.
    pub q_bar: f64,
    /// Within-imputation variance: mean of the M variances.
    pub u_bar: f64,
    /// Between-imputation variance: sample variance of the points.
    pub b: f64,
    /// Total variance u_bar + (1 + 1/m) b.
    pub t: f64,
    /// Rubin (1987) large-sample degrees of freedom; infinite when b = 0.
    pub df: f64,
}

impl PooledEstimate {
    pub fn term(&self, name: &str) -> Option<&PooledTerm> {
        self.terms.iter().find(|t| t.name == name)
    }
}

impl PooledTerm {
    pub fn se(&self) -> f64 {
        self.t.sqrt()
    }
}

fn estimate_from_fit(d: &Dataset, f: &ModelFormula, kind: Method, n_used: usize) -> Result<Estimate> {
    let terms = match kind {
        Method::Linear => {
            let fit = fit_linear(d, f)?;
            let vars = fit.coef_variances();
            fit.term_names
                .iter()
                .zip(fit.coef.iter())
                .zip(&vars)
                .map(|((name, &point), &variance)| EstimateTerm {
                    name: name.clone(),
                    point,
                    variance,
                })
                .collect()
        }
        Method::Logistic => {
            let fit = fit_logistic(d, f)?;
            if !fit.converged {
                return Err(Error::NonConvergence {
                    iterations: fit.iterations,
                });
            }
            fit.term_names
                .iter()
                .enumerate()
                .map(|(j, name)| EstimateTerm {
                    name: name.clone(),
                    point: fit.coef[j],
                    variance: fit.cov[(j, j)],
                })
                .collect()
        }
        Method::Ordinal => {
            let fit = fit_ordinal(d, f)?;
            if !fit.converged {
                return Err(Error::NonConvergence {
                    iterations: fit.iterations,
                });
            }
            let p = fit.coef.len();
            let mut terms: Vec<EstimateTerm> = fit
                .term_names
                .iter()
                .enumerate()
                .map(|(j, name)| EstimateTerm {
                    name: name.clone(),
                    point: fit.coef[j],
                    variance: fit.cov[(j, j)],
                })
                .collect();
            for (k, &theta) in fit.thresholds.iter().enumerate() {
                terms.push(EstimateTerm {
                    name: format!("threshold_{}", k + 1),
                    point: theta,
                    variance: fit.cov[(p + k, p + k)],
                });
            }
            terms
        }
    };
    Ok(Estimate {
        terms,
        n_used,
        model_kind: kind,
    })
}

/// Fit the analysis model on the listwise-complete rows of `d`.
pub fn ld_estimate(d: &Dataset, f: &ModelFormula, kind: Method) -> Result<Estimate> {
    f.validate(d)?;
    let vars = f.variables();
    let complete = d.listwise_complete(&vars)?;
    estimate_from_fit(&complete, f, kind, complete.n_rows())
}

/// Fit the analysis model on each of the M completed datasets.
pub fn mi_estimates(
    completed: &[CompletedDataset],
    f: &ModelFormula,
    kind: Method,
) -> Result<Vec<Estimate>> {
    if completed.len() < 2 {
        return Err(Error::Spec(format!(
            "pooling requires at least 2 completed datasets, got {}",
            completed.len()
        )));
    }
    completed
        .par_iter()
        .map(|c| {
            estimate_from_fit(&c.data, f, kind, c.data.n_rows()).map_err(|e| Error::Chain {
                index: c.index,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Combine M estimates per term with Rubin's rules.
pub fn pool_rubin(estimates: &[Estimate]) -> Result<PooledEstimate> {
    let m = estimates.len();
    if m < 2 {
        return Err(Error::Spec(format!(
            "Rubin pooling requires at least 2 estimates, got {m}"
        )));
    }
    let names: Vec<&str> = estimates[0].terms.iter().map(|t| t.name.as_str()).collect();
    for e in &estimates[1..] {
        let other: Vec<&str> = e.terms.iter().map(|t| t.name.as_str()).collect();
        if other != names {
            return Err(Error::Spec(format!(
                "mismatched terms across estimates: {names:?} vs {other:?}"
            )));
        }
    }
    let mf = m as f64;
    let terms = names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let points: Vec<f64> = estimates.iter().map(|e| e.terms[j].point).collect();
            let q_bar = points.iter().sum::<f64>() / mf;
            let u_bar = estimates.iter().map(|e| e.terms[j].variance).sum::<f64>() / mf;
            let b = points.iter().map(|q| (q - q_bar).powi(2)).sum::<f64>() / (mf - 1.0);
            let t = u_bar + (1.0 + 1.0 / mf) * b;
            let df = if b == 0.0 {
                f64::INFINITY
            } else {
                (mf - 1.0) * (1.0 + u_bar / ((1.0 + 1.0 / mf) * b)).powi(2)
            };
            PooledTerm {
                name: name.to_string(),
                q_bar,
                u_bar,
                b,
                t,
                df,
            }
        })
        .collect();
    Ok(PooledEstimate { terms, m })
}
