//! Synthetic populations with calibrated auxiliary strength.
//!
//! The generator mimics the structure of a survey analysis: a logistic
//! analysis model of known truth, one covariate (`x1`) that will later be
//! amputed, and auxiliary variables `z_<tier>` whose predictive strength for
//! `x1` is calibrated so the imputation-model R-squared hits named targets.
//!
//! Construction, all in standardized units:
//!
//! ```text
//! x1 = sqrt(base_r2 / (k-1)) * sum_j std(x_j)
//!    + sum_tiers lambda_tier * z_tier
//!    + sigma0 * eps
//! ```
//!
//! with `lambda_tier^2 = target_r2 - base_r2` and `sigma0^2` chosen so
//! `Var(x1) = 1`. Regressing `x1` on the other covariates alone then has
//! population R-squared `base_r2`; adding one tier's auxiliary raises it to
//! that tier's target. The response depends on the auxiliaries only through
//! `x1`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{Column, Dataset, VariableKind};
use crate::error::{Error, Result};
use crate::regress::sigmoid;

/// One auxiliary-strength tier: the imputation model including this tier's
/// auxiliary has population R-squared `target_r2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuxTier {
    pub name: String,
    pub target_r2: f64,
}

/// Everything needed to generate one population.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopulationConfig {
    pub n: usize,
    /// Analysis-model truth: intercept, then slopes for x1..xk.
    pub true_beta: Vec<f64>,
    /// Kinds of the fully observed covariates x2..xk.
    pub covariates: Vec<VariableKind>,
    /// Population R-squared of the no-auxiliary imputation regression of x1.
    pub base_r2: f64,
    pub aux_tiers: Vec<AuxTier>,
    #[serde(default)]
    pub seed: u64,
}

/// True coefficients carried alongside a generated dataset for bias checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub term_names: Vec<String>,
    pub true_beta: Vec<f64>,
}

impl PopulationConfig {
    /// The default experiment shape: six fully observed covariates (three
    /// continuous, three binary), base R-squared .14, and auxiliary tiers at
    /// .45 (moderate) and .62 (strong).
    pub fn survey_like(n: usize, seed: u64) -> Self {
        Self {
            n,
            true_beta: vec![-0.35, 0.5, 0.3, -0.3, 0.2, -0.2, 0.2, 0.3],
            covariates: vec![
                VariableKind::Continuous,
                VariableKind::Binary,
                VariableKind::Continuous,
                VariableKind::Binary,
                VariableKind::Continuous,
                VariableKind::Binary,
            ],
            base_r2: 0.14,
            aux_tiers: vec![
                AuxTier {
                    name: "moderate".into(),
                    target_r2: 0.45,
                },
                AuxTier {
                    name: "strong".into(),
                    target_r2: 0.62,
                },
            ],
            seed,
        }
    }

    /// Residual standard deviation of the x1 construction.
    fn sigma0(&self) -> f64 {
        let aux_var: f64 = self
            .aux_tiers
            .iter()
            .map(|t| t.target_r2 - self.base_r2)
            .sum();
        (1.0 - self.base_r2 - aux_var).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 100 {
            return Err(Error::Spec(format!(
                "population size must be at least 100, got {}",
                self.n
            )));
        }
        if self.true_beta.len() != self.covariates.len() + 2 {
            return Err(Error::Spec(format!(
                "true_beta needs {} entries (intercept plus x1..x{}), got {}",
                self.covariates.len() + 2,
                self.covariates.len() + 1,
                self.true_beta.len()
            )));
        }
        if !(self.base_r2 > 0.0 && self.base_r2 < 1.0) {
            return Err(Error::Spec(format!(
                "base_r2 must lie in (0, 1), got {}",
                self.base_r2
            )));
        }
        for k in &self.covariates {
            if matches!(k, VariableKind::Ordinal { .. }) {
                return Err(Error::Spec(
                    "generated covariates must be continuous or binary".into(),
                ));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for tier in &self.aux_tiers {
            if !seen.insert(tier.name.as_str()) {
                return Err(Error::DuplicateVariable(tier.name.clone()));
            }
            calibrate_aux_strength(self.base_r2, tier.target_r2)?;
        }
        let total: f64 = self.base_r2
            + self
                .aux_tiers
                .iter()
                .map(|t| t.target_r2 - self.base_r2)
                .sum::<f64>();
        if total >= 1.0 {
            return Err(Error::Spec(format!(
                "tier targets leave no residual variance for x1 (signal variance {total})"
            )));
        }
        Ok(())
    }
}

/// Loading lambda for one auxiliary so the imputation model including it has
/// population R-squared `target_r2`: lambda = sqrt(target_r2 - base_r2).
pub fn calibrate_aux_strength(base_r2: f64, target_r2: f64) -> Result<f64> {
    if !(base_r2 > 0.0 && base_r2 < 1.0 && target_r2 < 1.0) {
        return Err(Error::Spec(format!(
            "R-squared values must lie in (0, 1): base {base_r2}, target {target_r2}"
        )));
    }
    if target_r2 < base_r2 {
        return Err(Error::Spec(format!(
            "target R-squared {target_r2} is below the base {base_r2}"
        )));
    }
    Ok((target_r2 - base_r2).sqrt())
}

fn standard_normal(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Generate one population and its truth record.
///
/// Column order: x1..xk, one z column per tier, then y.
pub fn generate_population(
    cfg: &PopulationConfig,
    rng: &mut impl Rng,
) -> Result<(Dataset, TruthRecord)> {
    cfg.validate()?;
    let n = cfg.n;
    let k1 = cfg.covariates.len();

    // fully observed covariates, plus standardized copies for x1's construction
    let mut raw: Vec<Vec<f64>> = Vec::with_capacity(k1);
    let mut standardized: Vec<Vec<f64>> = Vec::with_capacity(k1);
    for kind in &cfg.covariates {
        match kind {
            VariableKind::Binary => {
                let b: Vec<f64> = (0..n)
                    .map(|_| if rng.gen::<f64>() < 0.5 { 1.0 } else { 0.0 })
                    .collect();
                standardized.push(b.iter().map(|&v| (v - 0.5) / 0.5).collect());
                raw.push(b);
            }
            VariableKind::Continuous => {
                let z = standard_normal(n, rng);
                standardized.push(z.clone());
                raw.push(z);
            }
            VariableKind::Ordinal { .. } => unreachable!("rejected by validate"),
        }
    }

    let base_load = (cfg.base_r2 / k1 as f64).sqrt();
    let mut x1: Vec<f64> = (0..n)
        .map(|i| base_load * standardized.iter().map(|c| c[i]).sum::<f64>())
        .collect();
    let mut aux_columns: Vec<(String, Vec<f64>)> = Vec::with_capacity(cfg.aux_tiers.len());
    for tier in &cfg.aux_tiers {
        let lambda = calibrate_aux_strength(cfg.base_r2, tier.target_r2)?;
        let z = standard_normal(n, rng);
        for (v, &zi) in x1.iter_mut().zip(&z) {
            *v += lambda * zi;
        }
        aux_columns.push((format!("z_{}", tier.name), z));
    }
    let sigma0 = cfg.sigma0();
    for v in &mut x1 {
        let eps: f64 = StandardNormal.sample(rng);
        *v += sigma0 * eps;
    }

    let y: Vec<f64> = (0..n)
        .map(|i| {
            let mut eta = cfg.true_beta[0] + cfg.true_beta[1] * x1[i];
            for (j, col) in raw.iter().enumerate() {
                eta += cfg.true_beta[j + 2] * col[i];
            }
            if rng.gen::<f64>() < sigmoid(eta) {
                1.0
            } else {
                0.0
            }
        })
        .collect();

    let mut columns = Vec::with_capacity(k1 + cfg.aux_tiers.len() + 2);
    columns.push(Column::complete("x1", VariableKind::Continuous, x1)?);
    for (j, (kind, values)) in cfg.covariates.iter().zip(raw).enumerate() {
        columns.push(Column::complete(format!("x{}", j + 2), kind.clone(), values)?);
    }
    for (name, values) in aux_columns {
        columns.push(Column::complete(name, VariableKind::Continuous, values)?);
    }
    columns.push(Column::complete("y", VariableKind::Binary, y)?);
    let data = Dataset::new(columns)?;

    let term_names = std::iter::once("intercept".to_string())
        .chain((1..=k1 + 1).map(|j| format!("x{j}")))
        .collect();
    let truth = TruthRecord {
        term_names,
        true_beta: cfg.true_beta.clone(),
    };
    Ok((data, truth))
}

/// Names of the analysis-model covariates (`x1..xk`) for a config.
pub fn covariate_names(cfg: &PopulationConfig) -> Vec<String> {
    (1..=cfg.covariates.len() + 1).map(|j| format!("x{j}")).collect()
}
