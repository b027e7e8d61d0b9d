//! Amputation: deleting observed values from a complete dataset under MCAR or
//! MAR mechanisms at a target rate.
//!
//! MCAR masks an exact count of cells sampled uniformly without replacement,
//! so the realized missing fraction is round(rate * n) / n. MAR assigns each
//! row a deletion probability inverse-logit(a + score) with the intercept `a`
//! calibrated by bisection so the mean deletion probability matches the target
//! rate, then masks cells by independent Bernoulli draws.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::regress::sigmoid;

/// Calibration target: |mean deletion probability - rate| below this.
const CALIBRATION_TOL: f64 = 1e-4;
/// Search interval for the selection-model intercept.
const CALIBRATION_BRACKET: f64 = 40.0;
const CALIBRATION_MAX_ITER: usize = 200;

/// How values of the target variable get deleted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mechanism {
    /// Deletion independent of all data.
    Mcar,
    /// Deletion probability depends on a linear score over other variables.
    Mar {
        /// (variable name, weight) pairs; must not reference the target.
        score: Vec<(String, f64)>,
    },
}

/// A complete description of one amputation step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MissingnessSpec {
    pub target: String,
    pub rate: f64,
    pub mechanism: Mechanism,
}

impl MissingnessSpec {
    pub fn mcar(target: impl Into<String>, rate: f64) -> Self {
        Self {
            target: target.into(),
            rate,
            mechanism: Mechanism::Mcar,
        }
    }

    pub fn mar(target: impl Into<String>, rate: f64, score: &[(&str, f64)]) -> Self {
        Self {
            target: target.into(),
            rate,
            mechanism: Mechanism::Mar {
                score: score.iter().map(|(v, w)| (v.to_string(), *w)).collect(),
            },
        }
    }

    /// Check rate bounds, target observability, and score validity against `d`.
    pub fn validate(&self, d: &Dataset) -> Result<()> {
        if !(self.rate > 0.0 && self.rate < 1.0) {
            return Err(Error::Spec(format!(
                "missingness rate must lie in (0, 1), got {}",
                self.rate
            )));
        }
        let target = d.column(&self.target)?;
        if target.n_missing() > 0 {
            return Err(Error::AlreadyMissing(self.target.clone()));
        }
        if let Mechanism::Mar { score } = &self.mechanism {
            for (name, weight) in score {
                if name == &self.target {
                    return Err(Error::Spec(format!(
                        "MAR score may not reference the amputation target {name:?}"
                    )));
                }
                if !weight.is_finite() {
                    return Err(Error::Spec(format!(
                        "MAR score weight for {name:?} is not finite"
                    )));
                }
                let col = d.column(name)?;
                if col.n_missing() > 0 {
                    return Err(Error::Spec(format!(
                        "MAR score variable {name:?} must be fully observed"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Apply `spec` to the complete dataset `d`, dispatching on mechanism.
pub fn ampute(d: &Dataset, spec: &MissingnessSpec, rng: &mut impl Rng) -> Result<Dataset> {
    spec.validate(d)?;
    match &spec.mechanism {
        Mechanism::Mcar => mask_mcar(d, &spec.target, spec.rate, rng),
        Mechanism::Mar { score } => mask_mar(d, &spec.target, spec.rate, score, rng),
    }
}

/// Mask exactly round(rate * n) cells of `target`, chosen uniformly without
/// replacement.
pub fn ampute_mcar(
    d: &Dataset,
    target: &str,
    rate: f64,
    rng: &mut impl Rng,
) -> Result<Dataset> {
    let spec = MissingnessSpec::mcar(target, rate);
    spec.validate(d)?;
    mask_mcar(d, target, rate, rng)
}

/// Mask cells of the target by independent Bernoulli draws with per-row
/// probability inverse-logit(a + score), `a` calibrated to the target rate.
pub fn ampute_mar(d: &Dataset, spec: &MissingnessSpec, rng: &mut impl Rng) -> Result<Dataset> {
    spec.validate(d)?;
    let score = match &spec.mechanism {
        Mechanism::Mar { score } => score,
        Mechanism::Mcar => {
            return Err(Error::Spec(
                "ampute_mar called with an MCAR mechanism".into(),
            ))
        }
    };
    mask_mar(d, &spec.target, spec.rate, score, rng)
}

fn mask_mcar(d: &Dataset, target: &str, rate: f64, rng: &mut impl Rng) -> Result<Dataset> {
    let n = d.n_rows();
    let k = (rate * n as f64).round() as usize;
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(rng);
    rows.truncate(k);
    d.with_masked(target, &rows)
}

fn mask_mar(
    d: &Dataset,
    target: &str,
    rate: f64,
    score: &[(String, f64)],
    rng: &mut impl Rng,
) -> Result<Dataset> {
    let n = d.n_rows();
    let mut s = vec![0.0; n];
    for (name, weight) in score {
        let col = d.column(name)?;
        for (i, v) in s.iter_mut().enumerate() {
            *v += weight * col.value(i).expect("score variables are fully observed");
        }
    }
    let a = calibrate_intercept(&s, rate)?;
    let rows: Vec<usize> = (0..n)
        .filter(|&i| rng.gen::<f64>() < sigmoid(a + s[i]))
        .collect();
    d.with_masked(target, &rows)
}

/// Bisect for the intercept `a` with mean_i inverse-logit(a + s_i) = rate.
fn calibrate_intercept(scores: &[f64], rate: f64) -> Result<f64> {
    let n = scores.len() as f64;
    let mean_prob = |a: f64| scores.iter().map(|&s| sigmoid(a + s)).sum::<f64>() / n;
    let (mut lo, mut hi) = (-CALIBRATION_BRACKET, CALIBRATION_BRACKET);
    if mean_prob(lo) > rate || mean_prob(hi) < rate {
        return Err(Error::Calibration(format!(
            "target rate {rate} is unreachable within the intercept bracket"
        )));
    }
    for _ in 0..CALIBRATION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        let p = mean_prob(mid);
        if (p - rate).abs() < CALIBRATION_TOL {
            return Ok(mid);
        }
        if p < rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Calibration(format!(
        "bisection failed to reach rate {rate} within {CALIBRATION_MAX_ITER} iterations"
    )))
}
