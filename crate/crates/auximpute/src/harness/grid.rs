//! Replication engine: run every (rate x estimator) cell of the grid.
//!
//! RNG discipline: everything derives from `Stream::root(seed)` through fixed
//! labels, so that cells share their random inputs wherever the design calls
//! for common random numbers:
//!
//! - population draws are keyed by replication only, so every estimator in
//!   every cell sees the same data;
//! - amputation is keyed by (rate block, replication), so every estimator
//!   within a block sees the same missing cells;
//! - imputation is keyed by (rate block, replication), so MI tiers differ
//!   only in their predictor sets, not in their random draws.
//!
//! This pairing sharpens the between-estimator comparisons the tables make.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, ModelFormula, VariableKind};
use crate::error::{Error, Result};
use crate::harness::config::{Estimator, HarnessConfig};
use crate::mice::{impute, ImputationSpec, Method, VariableModel};
use crate::missingness::{ampute, Mechanism, MissingnessSpec};
use crate::pooling::{ld_estimate, mi_estimates, pool_rubin};
use crate::rng::Stream;
use crate::simgen::generate_population;

const PILOT_LABEL: u64 = 0;
const POPULATION_LABEL: u64 = 1;
const AMPUTATION_LABEL: u64 = 2;
const IMPUTATION_LABEL: u64 = 3;

/// Identifies one grid cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellId {
    pub mechanism: String,
    pub rate: f64,
    pub estimator: String,
}

/// Aggregated results of one cell's replications.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub id: CellId,
    pub replications: usize,
    /// Empirical mean of the focal coefficient.
    pub est_mean: f64,
    /// Empirical SD across replications — the "standard error" the tables report.
    pub est_sd: f64,
    /// Average estimated (model-based) SE.
    pub mean_model_se: f64,
    /// est_mean minus the large-n pilot estimand.
    pub bias: f64,
    /// Average imputation-model fit statistic; None for non-MI estimators.
    pub mean_r2: Option<f64>,
}

impl CellResult {
    /// Monte Carlo standard error of `est_mean` (and hence of `bias`).
    pub fn mcse(&self) -> f64 {
        self.est_sd / (self.replications as f64).sqrt()
    }
}

/// Everything run_grid produces besides rendered reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridOutcome {
    /// Focal coefficient from the large-n complete-data pilot fit.
    pub pilot_estimand: f64,
    pub cells: Vec<CellResult>,
}

fn mechanism_label(m: &Mechanism) -> String {
    match m {
        Mechanism::Mcar => "mcar".into(),
        Mechanism::Mar { .. } => "mar".into(),
    }
}

fn analysis_formula(cfg: &HarnessConfig) -> ModelFormula {
    let preds: Vec<&str> = cfg.grid.analysis.predictors.iter().map(String::as_str).collect();
    ModelFormula::new(cfg.grid.analysis.response.clone(), &preds)
}

fn imputation_method(kind: &VariableKind) -> Method {
    match kind {
        VariableKind::Continuous => Method::Linear,
        VariableKind::Binary => Method::Logistic,
        VariableKind::Ordinal { .. } => Method::Ordinal,
    }
}

/// Imputation model for the target: the other analysis covariates, the
/// response, and optionally one auxiliary tier's z column.
fn imputation_spec(
    cfg: &HarnessConfig,
    target_kind: &VariableKind,
    tier: Option<&str>,
) -> ImputationSpec {
    let mut predictors: Vec<String> = cfg
        .grid
        .analysis
        .predictors
        .iter()
        .filter(|p| *p != &cfg.grid.target)
        .cloned()
        .collect();
    predictors.push(cfg.grid.analysis.response.clone());
    if let Some(t) = tier {
        predictors.push(format!("z_{t}"));
    }
    ImputationSpec::new(
        vec![VariableModel {
            variable: cfg.grid.target.clone(),
            method: imputation_method(target_kind),
            predictors,
        }],
        cfg.replication.m,
        cfg.replication.iterations,
    )
}

/// Fit the analysis model on a complete population of `pilot_n` rows; the
/// focal coefficient anchors all bias measurements.
pub fn pilot_estimand(cfg: &HarnessConfig) -> Result<f64> {
    let mut pcfg = cfg.population.clone();
    pcfg.n = cfg.replication.pilot_n;
    let root = Stream::root(cfg.replication.seed);
    let (d, _) = generate_population(&pcfg, &mut root.child(PILOT_LABEL).rng())?;
    let est = ld_estimate(&d, &analysis_formula(cfg), cfg.grid.analysis.method)?;
    let term = est
        .term(&cfg.grid.focal_term)
        .ok_or_else(|| Error::Config(format!("no analysis term named {:?}", cfg.grid.focal_term)))?;
    Ok(term.point)
}

struct Replication {
    point: f64,
    model_se: f64,
    r2: Option<f64>,
}

fn replicate(
    cfg: &HarnessConfig,
    fixed_population: Option<&Dataset>,
    block: usize,
    rate: f64,
    estimator: &Estimator,
    r: usize,
) -> Result<Replication> {
    let root = Stream::root(cfg.replication.seed);
    let generated;
    let population: &Dataset = match fixed_population {
        Some(p) => p,
        None => {
            let mut rng = root.child(POPULATION_LABEL).child(r as u64).rng();
            generated = generate_population(&cfg.population, &mut rng)?.0;
            &generated
        }
    };
    let formula = analysis_formula(cfg);
    let method = cfg.grid.analysis.method;
    let focal = cfg.grid.focal_term.as_str();

    if *estimator == Estimator::Complete {
        let est = ld_estimate(population, &formula, method)?;
        let term = est
            .term(focal)
            .ok_or_else(|| Error::Config(format!("no analysis term named {focal:?}")))?;
        return Ok(Replication {
            point: term.point,
            model_se: term.variance.sqrt(),
            r2: None,
        });
    }

    let spec = MissingnessSpec {
        target: cfg.grid.target.clone(),
        rate,
        mechanism: cfg.grid.mechanism.clone(),
    };
    let mut amp_rng = root
        .child(AMPUTATION_LABEL)
        .child(block as u64)
        .child(r as u64)
        .rng();
    let amputed = ampute(population, &spec, &mut amp_rng)?;

    match estimator {
        Estimator::Complete => unreachable!("handled above"),
        Estimator::Ld => {
            let est = ld_estimate(&amputed, &formula, method)?;
            let term = est
                .term(focal)
                .ok_or_else(|| Error::Config(format!("no analysis term named {focal:?}")))?;
            Ok(Replication {
                point: term.point,
                model_se: term.variance.sqrt(),
                r2: None,
            })
        }
        Estimator::Mi { tier } => {
            let target_kind = population.column(&cfg.grid.target)?.kind().clone();
            let ispec = imputation_spec(cfg, &target_kind, tier.as_deref());
            let master = root
                .child(IMPUTATION_LABEL)
                .child(block as u64)
                .child(r as u64);
            let completed = impute(&amputed, &ispec, master)?;
            let ests = mi_estimates(&completed, &formula, method)?;
            let pooled = pool_rubin(&ests)?;
            let term = pooled
                .term(focal)
                .ok_or_else(|| Error::Config(format!("no analysis term named {focal:?}")))?;
            let stats: Vec<f64> = completed
                .iter()
                .flat_map(|c| {
                    c.fit_statistics
                        .iter()
                        .filter(|(v, _)| v == &cfg.grid.target)
                        .filter_map(|(_, s)| *s)
                })
                .collect();
            let r2 = if stats.is_empty() {
                None
            } else {
                Some(stats.iter().sum::<f64>() / stats.len() as f64)
            };
            Ok(Replication {
                point: term.q_bar,
                model_se: term.se(),
                r2,
            })
        }
    }
}

/// Run every replication of one cell and aggregate.
pub fn run_cell(
    cfg: &HarnessConfig,
    fixed_population: Option<&Dataset>,
    pilot: f64,
    block: usize,
    rate: f64,
    estimator: &Estimator,
) -> Result<CellResult> {
    let r_total = cfg.replication.replications;
    let reps: Vec<Replication> = (0..r_total)
        .into_par_iter()
        .map(|r| {
            replicate(cfg, fixed_population, block, rate, estimator, r).map_err(|e| {
                Error::Replication {
                    index: r,
                    source: Box::new(e),
                }
            })
        })
        .collect::<Result<_>>()?;

    let nf = r_total as f64;
    let est_mean = reps.iter().map(|r| r.point).sum::<f64>() / nf;
    let est_sd = (reps
        .iter()
        .map(|r| (r.point - est_mean).powi(2))
        .sum::<f64>()
        / (nf - 1.0))
        .sqrt();
    let mean_model_se = reps.iter().map(|r| r.model_se).sum::<f64>() / nf;
    let r2s: Vec<f64> = reps.iter().filter_map(|r| r.r2).collect();
    let mean_r2 = if r2s.is_empty() {
        None
    } else {
        Some(r2s.iter().sum::<f64>() / r2s.len() as f64)
    };
    Ok(CellResult {
        id: CellId {
            mechanism: mechanism_label(&cfg.grid.mechanism),
            rate,
            estimator: estimator.to_string(),
        },
        replications: r_total,
        est_mean,
        est_sd,
        mean_model_se,
        bias: est_mean - pilot,
        mean_r2,
    })
}

/// Run the whole grid: pilot fit, then every (rate, estimator) cell.
pub fn run_grid(cfg: &HarnessConfig) -> Result<GridOutcome> {
    cfg.validate()?;
    let pilot = pilot_estimand(cfg)?;
    let root = Stream::root(cfg.replication.seed);
    let fixed = if cfg.replication.resample_population {
        None
    } else {
        let mut rng = root.child(POPULATION_LABEL).child(0).rng();
        Some(generate_population(&cfg.population, &mut rng)?.0)
    };
    let mut cells = Vec::with_capacity(cfg.grid.rates.len() * cfg.grid.estimators.len());
    for (block, &rate) in cfg.grid.rates.iter().enumerate() {
        for estimator in &cfg.grid.estimators {
            cells.push(run_cell(cfg, fixed.as_ref(), pilot, block, rate, estimator)?);
        }
    }
    Ok(GridOutcome {
        pilot_estimand: pilot,
        cells,
    })
}
