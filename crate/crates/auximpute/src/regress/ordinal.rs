//! Proportional-odds (cumulative-logit) ordinal regression.
//!
//! Model: P(Y <= k | x) = sigmoid(theta_k - x'beta) with strictly increasing
//! thresholds theta_1 < ... < theta_{K-1} and a single slope vector. There is
//! no separate intercept; the thresholds absorb it.

use nalgebra::{DMatrix, DVector};

use crate::data::{Dataset, ModelFormula, VariableKind};
use crate::error::{Error, Result};

use super::{
    design_no_intercept, mcfadden_pseudo_r2, sigmoid, COEF_TOL, DIVERGENCE_BOUND, MAX_ITER,
    SEP_PROB_TOL,
};

#[derive(Clone, Debug)]
pub struct OrdinalFit {
    /// Slope vector (no intercept).
    pub coef: DVector<f64>,
    /// Strictly increasing cutpoints, K-1 of them.
    pub thresholds: DVector<f64>,
    /// Inverse observed information over (coef, thresholds), in that order.
    pub cov: DMatrix<f64>,
    pub loglik: f64,
    pub loglik_null: f64,
    pub pseudo_r2: Option<f64>,
    pub converged: bool,
    pub separation_detected: bool,
    pub iterations: usize,
    pub term_names: Vec<String>,
    /// Declared level codes, in order.
    pub levels: Vec<i64>,
}

pub fn fit_ordinal(d: &Dataset, f: &ModelFormula) -> Result<OrdinalFit> {
    let col = d.column(&f.response)?;
    let levels = match col.kind() {
        VariableKind::Ordinal { levels } => levels.clone(),
        other => {
            return Err(Error::Spec(format!(
                "ordinal response {:?} must be ordinal, got {}",
                f.response,
                other.name()
            )))
        }
    };
    for &lev in &levels {
        if !col.observed_values().any(|v| v as i64 == lev) {
            return Err(Error::UnobservedLevel {
                variable: f.response.clone(),
                level: lev,
            });
        }
    }
    let (x, y) = design_no_intercept(d, f)?;
    let y_idx: Vec<usize> = y
        .iter()
        .map(|&v| levels.iter().position(|&l| l == v as i64).unwrap())
        .collect();
    fit_ordinal_xy(&x, &y_idx, levels, f.predictors.clone())
}

/// Stable sigmoid(a) - sigmoid(b) for a >= b.
fn sigmoid_diff(a: f64, b: f64) -> f64 {
    let sa = sigmoid(a);
    let sb = sigmoid(b);
    sa * (1.0 - sb) - sb * (1.0 - sa)
}

struct Terms {
    loglik: f64,
    grad: DVector<f64>,
    neg_hess: DMatrix<f64>,
    min_prob: f64,
}

/// Log-likelihood, gradient and negated Hessian over psi = (beta, theta).
fn evaluate(x: &DMatrix<f64>, y_idx: &[usize], k: usize, psi: &DVector<f64>) -> Terms {
    let (n, p) = x.shape();
    let m = p + k - 1;
    let beta = psi.rows(0, p);
    let theta = psi.rows(p, k - 1);
    let mut loglik = 0.0;
    let mut grad = DVector::zeros(m);
    let mut hess = DMatrix::zeros(m, m);
    let mut min_prob = f64::INFINITY;

    for i in 0..n {
        let eta: f64 = (0..p).map(|j| x[(i, j)] * beta[j]).sum();
        let cat = y_idx[i];
        let upper = if cat < k - 1 { Some(cat) } else { None };
        let lower = if cat > 0 { Some(cat - 1) } else { None };
        let a = upper.map_or(f64::INFINITY, |u| theta[u] - eta);
        let b = lower.map_or(f64::NEG_INFINITY, |l| theta[l] - eta);

        let (sig_a, phi_a) = match upper {
            Some(_) => {
                let s = sigmoid(a);
                (s, s * (1.0 - s))
            }
            None => (1.0, 0.0),
        };
        let (sig_b, phi_b) = match lower {
            Some(_) => {
                let s = sigmoid(b);
                (s, s * (1.0 - s))
            }
            None => (0.0, 0.0),
        };
        let pi = match (upper, lower) {
            (Some(_), Some(_)) => sigmoid_diff(a, b),
            (Some(_), None) => sig_a,
            (None, Some(_)) => 1.0 - sig_b,
            (None, None) => 1.0,
        }
        .max(1e-300);
        min_prob = min_prob.min(pi);
        loglik += pi.ln();

        let ga = phi_a / pi;
        let gb = -phi_b / pi;
        let dphi_a = phi_a * (1.0 - 2.0 * sig_a);
        let dphi_b = phi_b * (1.0 - 2.0 * sig_b);
        let haa = dphi_a / pi - ga * ga;
        let hbb = -dphi_b / pi - (phi_b / pi) * (phi_b / pi);
        let hab = phi_a * phi_b / (pi * pi);

        // gradient: d(a,b)/d(beta) = -x_i, d(a)/d(theta_u) = 1, d(b)/d(theta_l) = 1
        let gsum = ga + gb;
        for j in 0..p {
            grad[j] -= gsum * x[(i, j)];
        }
        if let Some(u) = upper {
            grad[p + u] += ga;
        }
        if let Some(l) = lower {
            grad[p + l] += gb;
        }

        // Hessian via chain rule over the two linear forms
        let hxx = haa + hbb + 2.0 * hab;
        for j in 0..p {
            for j2 in j..p {
                hess[(j, j2)] += hxx * x[(i, j)] * x[(i, j2)];
            }
        }
        if let Some(u) = upper {
            let c = haa + hab;
            for j in 0..p {
                hess[(j, p + u)] -= c * x[(i, j)];
            }
            hess[(p + u, p + u)] += haa;
        }
        if let Some(l) = lower {
            let c = hbb + hab;
            for j in 0..p {
                hess[(j, p + l)] -= c * x[(i, j)];
            }
            hess[(p + l, p + l)] += hbb;
        }
        if let (Some(u), Some(l)) = (upper, lower) {
            let (r, c) = if p + u <= p + l { (p + u, p + l) } else { (p + l, p + u) };
            hess[(r, c)] += hab;
        }
    }
    for r in 0..m {
        for c in 0..r {
            hess[(r, c)] = hess[(c, r)];
        }
    }
    Terms {
        loglik,
        grad,
        neg_hess: -hess,
        min_prob,
    }
}

fn thresholds_increasing(theta: &[f64]) -> bool {
    theta.windows(2).all(|w| w[1] - w[0] > 1e-12)
}

/// Matrix-level entry point; `x` carries predictors only (no intercept),
/// `y_idx` holds 0-based category indices, all of 0..K-1 present.
pub fn fit_ordinal_xy(
    x: &DMatrix<f64>,
    y_idx: &[usize],
    levels: Vec<i64>,
    term_names: Vec<String>,
) -> Result<OrdinalFit> {
    let (n, p) = x.shape();
    let k = levels.len();
    if n <= p + k - 1 {
        return Err(Error::TooFewRows {
            rows: n,
            params: p + k - 1,
        });
    }

    // null fit: empirical cumulative logits, zero slopes
    let mut counts = vec![0usize; k];
    for &c in y_idx {
        counts[c] += 1;
    }
    let loglik_null: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| c as f64 * ((c as f64 / n as f64).ln()))
        .sum();

    let m = p + k - 1;
    let mut psi = DVector::zeros(m);
    let mut cum = 0.0;
    for j in 0..k - 1 {
        cum += counts[j] as f64 / n as f64;
        let c = cum.clamp(1e-10, 1.0 - 1e-10);
        psi[p + j] = (c / (1.0 - c)).ln();
    }

    let mut terms = evaluate(x, y_idx, k, &psi);
    let mut converged = false;
    let mut iterations = 0;
    let mut separation = false;

    while iterations < MAX_ITER {
        iterations += 1;
        let beta_max = if p > 0 { psi.rows(0, p).amax() } else { 0.0 };
        if terms.min_prob < SEP_PROB_TOL || beta_max > DIVERGENCE_BOUND {
            separation = true;
            break;
        }
        let delta = match terms.neg_hess.clone().cholesky() {
            Some(ch) => ch.solve(&terms.grad),
            None => {
                separation = true;
                break;
            }
        };
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand = &psi + step * &delta;
            let theta: Vec<f64> = (0..k - 1).map(|j| cand[p + j]).collect();
            if thresholds_increasing(&theta) {
                let cand_terms = evaluate(x, y_idx, k, &cand);
                if cand_terms.loglik >= terms.loglik - 1e-12 {
                    let change = (step * &delta).amax();
                    psi = cand;
                    terms = cand_terms;
                    accepted = true;
                    if change < COEF_TOL {
                        converged = true;
                    }
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            converged = true;
        }
        if converged {
            break;
        }
    }
    if !converged && !separation {
        return Err(Error::NonConvergence { iterations });
    }

    let cov = terms
        .neg_hess
        .clone()
        .cholesky()
        .map(|ch| ch.inverse())
        .unwrap_or_else(|| DMatrix::zeros(m, m));
    let coef = psi.rows(0, p).into_owned();
    let thresholds = psi.rows(p, k - 1).into_owned();
    let pseudo_r2 = if converged && !separation {
        mcfadden_pseudo_r2(terms.loglik, loglik_null).ok()
    } else {
        None
    };
    Ok(OrdinalFit {
        coef,
        thresholds,
        cov,
        loglik: terms.loglik,
        loglik_null,
        pseudo_r2,
        converged: converged && !separation,
        separation_detected: separation,
        iterations,
        term_names,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Column;
    use crate::regress::{fit_logistic, GlmFit};
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn ordinal_dataset(x: Vec<f64>, y: Vec<f64>, levels: Vec<i64>) -> Dataset {
        Dataset::new(vec![
            Column::complete("x", VariableKind::Continuous, x).unwrap(),
            Column::complete("y", VariableKind::Ordinal { levels }, y).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn zero_effect_thresholds_are_cumulative_logits() {
        // 3 equally frequent levels, predictor carries no signal
        let mut x = Vec::new();
        let mut y = Vec::new();
        for lev in 1..=3 {
            for v in [-1.0, 0.0, 1.0, -1.0, 0.0, 1.0] {
                x.push(v);
                y.push(lev as f64);
            }
        }
        let d = ordinal_dataset(x, y, vec![1, 2, 3]);
        let fit = fit_ordinal(&d, &ModelFormula::new("y", &["x"])).unwrap();
        assert!(fit.converged);
        assert_abs_diff_eq!(fit.coef[0], 0.0, epsilon = 1e-7);
        assert_abs_diff_eq!(fit.thresholds[0], -(2.0_f64.ln()), epsilon = 1e-6);
        assert_abs_diff_eq!(fit.thresholds[1], 2.0_f64.ln(), epsilon = 1e-6);
    }

    #[test]
    fn two_levels_reduce_to_logistic() {
        let mut rng = crate::rng::Stream::root(21).rng();
        let n = 120;
        let xs: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 4.0 - 2.0).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| {
                if rng.gen::<f64>() < sigmoid(-0.4 + 0.9 * x) {
                    2.0
                } else {
                    1.0
                }
            })
            .collect();
        let d = Dataset::new(vec![
            Column::complete("x", VariableKind::Continuous, xs.clone()).unwrap(),
            Column::complete("y", VariableKind::Ordinal { levels: vec![1, 2] }, ys.clone())
                .unwrap(),
            Column::complete(
                "ytop",
                VariableKind::Binary,
                ys.iter().map(|&v| if v == 2.0 { 1.0 } else { 0.0 }).collect(),
            )
            .unwrap(),
        ])
        .unwrap();
        let of = fit_ordinal(&d, &ModelFormula::new("y", &["x"])).unwrap();
        let lf: GlmFit = fit_logistic(&d, &ModelFormula::new("ytop", &["x"])).unwrap();
        // P(y = top) = sigmoid(x*beta - theta_1): slope matches, threshold is
        // the negated logistic intercept
        assert_abs_diff_eq!(of.coef[0], lf.coef[1], epsilon = 1e-6);
        assert_abs_diff_eq!(of.thresholds[0], -lf.coef[0], epsilon = 1e-6);
    }

    #[test]
    fn perfectly_ordering_predictor_flags_separation() {
        let x: Vec<f64> = (0..18).map(|i| i as f64 / 3.0).collect();
        let y: Vec<f64> = (0..18).map(|i| (i / 6 + 1) as f64).collect();
        let d = ordinal_dataset(x, y, vec![1, 2, 3]);
        let fit = fit_ordinal(&d, &ModelFormula::new("y", &["x"])).unwrap();
        assert!(fit.separation_detected);
        assert!(!fit.converged);
    }

    #[test]
    fn unobserved_level_is_reported() {
        let d = ordinal_dataset(
            vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
            vec![1.0, 2.0, 1.0, 2.0, 1.0, 2.0],
            vec![1, 2, 3],
        );
        match fit_ordinal(&d, &ModelFormula::new("y", &["x"])).unwrap_err() {
            Error::UnobservedLevel { variable, level } => {
                assert_eq!(variable, "y");
                assert_eq!(level, 3);
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn gradient_vanishes_at_solution() {
        let mut rng = crate::rng::Stream::root(31).rng();
        let n = 300;
        let xs: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 4.0 - 2.0).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| {
                let u: f64 = rng.gen();
                let c1 = sigmoid(-0.8 - 0.7 * x);
                let c2 = sigmoid(0.9 - 0.7 * x);
                if u < c1 {
                    1.0
                } else if u < c2 {
                    2.0
                } else {
                    3.0
                }
            })
            .collect();
        let d = ordinal_dataset(xs.clone(), ys.clone(), vec![1, 2, 3]);
        let fit = fit_ordinal(&d, &ModelFormula::new("y", &["x"])).unwrap();
        assert!(fit.converged);
        let x = DMatrix::from_column_slice(n, 1, &xs);
        let y_idx: Vec<usize> = ys.iter().map(|&v| v as usize - 1).collect();
        let mut psi = DVector::zeros(3);
        psi[0] = fit.coef[0];
        psi[1] = fit.thresholds[0];
        psi[2] = fit.thresholds[1];
        let terms = evaluate(&x, &y_idx, 3, &psi);
        assert!(terms.grad.amax() < 1e-6, "gradient {:?}", terms.grad);
        assert!(fit.loglik >= fit.loglik_null);
        assert!(fit.pseudo_r2.unwrap() > 0.0);
    }
}
