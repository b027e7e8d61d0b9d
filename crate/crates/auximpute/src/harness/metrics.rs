//! Efficiency metrics, analytic MCAR bounds, and significance markers.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};

/// Efficiency of a method relative to a reference, in SE terms and in
/// equivalent-sample-size terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyRow {
    /// SE_method / SE_ref - 1 (negative = smaller SE than the reference).
    pub se_diff: f64,
    /// (SE_ref / SE_method)^2 - 1 (positive = acts like a larger sample).
    pub equiv_n_change: f64,
}

impl EfficiencyRow {
    /// Rendered to the nearest percent, half away from zero.
    pub fn se_diff_pct(&self) -> i64 {
        (self.se_diff * 100.0).round() as i64
    }

    pub fn equiv_n_change_pct(&self) -> i64 {
        (self.equiv_n_change * 100.0).round() as i64
    }
}

/// Compare a method's SE against a reference SE.
pub fn efficiency_metrics(se_method: f64, se_ref: f64) -> Result<EfficiencyRow> {
    if !(se_method > 0.0 && se_ref > 0.0) {
        return Err(Error::Spec(format!(
            "standard errors must be positive, got {se_method} and {se_ref}"
        )));
    }
    let ratio = se_method / se_ref;
    Ok(EfficiencyRow {
        se_diff: ratio - 1.0,
        equiv_n_change: ratio.powi(-2) - 1.0,
    })
}

/// Idealized complete-data-vs-LD efficiency under MCAR at `rate`:
/// (SE reduction 1 - sqrt(1-rate), sample-size change 1/(1-rate) - 1).
pub fn analytic_mcar_bounds(rate: f64) -> Result<(f64, f64)> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::Spec(format!(
            "missingness rate must lie in (0, 1), got {rate}"
        )));
    }
    Ok((1.0 - (1.0 - rate).sqrt(), 1.0 / (1.0 - rate) - 1.0))
}

/// Two-sided p-value of point/se against a t distribution with `df` degrees
/// of freedom (normal when `df` is infinite).
pub fn two_sided_p(point: f64, se: f64, df: f64) -> Result<f64> {
    if !(se > 0.0) {
        return Err(Error::Spec(format!("standard error must be positive, got {se}")));
    }
    if !(df > 0.0) {
        return Err(Error::Spec(format!("degrees of freedom must be positive, got {df}")));
    }
    let t = (point / se).abs();
    let upper_tail = if df.is_infinite() {
        let n = Normal::new(0.0, 1.0).expect("standard normal");
        1.0 - n.cdf(t)
    } else {
        let dist = StudentsT::new(0.0, 1.0, df)
            .map_err(|e| Error::Spec(format!("t distribution with df {df}: {e}")))?;
        1.0 - dist.cdf(t)
    };
    Ok((2.0 * upper_tail).min(1.0))
}

/// Map a coefficient to its significance marker at the conventional levels:
/// dagger p<.10, * p<.05, ** p<.01, *** p<.001.
pub fn significance_stars(point: f64, se: f64, df: f64) -> Result<&'static str> {
    let p = two_sided_p(point, se, df)?;
    Ok(if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else if p < 0.10 {
        "\u{2020}"
    } else {
        ""
    })
}
