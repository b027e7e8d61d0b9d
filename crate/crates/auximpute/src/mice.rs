//! Multiple imputation by chained equations.
//!
//! Each of the M chains starts from a random fill of the missing cells, then
//! runs a fixed number of cycles. A cycle visits each incomplete variable in
//! declared order: refit its model on the rows where it was originally
//! observed (predictors at current working values), draw parameters from the
//! fit's posterior, and re-impute only the originally missing cells.
//!
//! Chains run in parallel; each derives its RNG streams from the master
//! stream and the chain index, so results are byte-identical whether chains
//! run serially or concurrently.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, ModelFormula, VariableKind};
use crate::error::{Error, Result};
use crate::regress::{
    draw_parameters, fit_linear, fit_logistic, fit_ordinal, impute_draw, Fit,
};
use crate::rng::Stream;

/// Regression family used to impute one variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Linear,
    Logistic,
    Ordinal,
}

impl Method {
    fn matches(self, kind: &VariableKind) -> bool {
        matches!(
            (self, kind),
            (Method::Linear, VariableKind::Continuous)
                | (Method::Logistic, VariableKind::Binary)
                | (Method::Ordinal, VariableKind::Ordinal { .. })
        )
    }
}

/// Imputation model for one incomplete variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariableModel {
    pub variable: String,
    pub method: Method,
    pub predictors: Vec<String>,
}

/// What to do when a model cannot be fit because a predictor perfectly
/// predicts the response (separation or exact collinearity).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerfectPredictionPolicy {
    /// Surface the failure immediately.
    Error,
    /// Drop predictors from the end of the declared list until the fit works,
    /// recording each removal.
    DropPredictor,
    /// Skip re-imputing the variable this cycle, leaving working values.
    AbortVariable,
}

/// Full chained-equations specification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImputationSpec {
    /// Update order is the declaration order of this list.
    pub models: Vec<VariableModel>,
    pub m: usize,
    pub iterations: usize,
    pub perfect_prediction_policy: PerfectPredictionPolicy,
}

impl ImputationSpec {
    pub fn new(models: Vec<VariableModel>, m: usize, iterations: usize) -> Self {
        Self {
            models,
            m,
            iterations,
            perfect_prediction_policy: PerfectPredictionPolicy::Error,
        }
    }

    pub fn validate(&self, d: &Dataset) -> Result<()> {
        if self.m < 2 {
            return Err(Error::Spec(format!(
                "at least 2 imputations are required, got {}",
                self.m
            )));
        }
        if self.iterations < 1 {
            return Err(Error::Spec("at least 1 cycle is required".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for model in &self.models {
            if !seen.insert(model.variable.as_str()) {
                return Err(Error::DuplicateVariable(model.variable.clone()));
            }
            let col = d.column(&model.variable)?;
            if !model.method.matches(col.kind()) {
                return Err(Error::Spec(format!(
                    "method {:?} does not match the kind of {:?} ({})",
                    model.method,
                    model.variable,
                    col.kind().name()
                )));
            }
            for p in &model.predictors {
                d.column(p)?;
                if p == &model.variable {
                    return Err(Error::Spec(format!(
                        "{p:?} cannot predict itself"
                    )));
                }
            }
        }
        for col in d.columns() {
            if col.n_missing() > 0 && !seen.contains(col.name()) {
                return Err(Error::Spec(format!(
                    "incomplete variable {:?} has no imputation model",
                    col.name()
                )));
            }
        }
        Ok(())
    }
}

/// One completed dataset with provenance.
#[derive(Clone, Debug)]
pub struct CompletedDataset {
    pub data: Dataset,
    /// Imputation index in 0..m.
    pub index: usize,
    /// Originally missing rows per modeled variable.
    pub imputed_cells: Vec<(String, Vec<usize>)>,
    /// Final-cycle fit statistic (r2 or pseudo-r2) per modeled variable.
    pub fit_statistics: Vec<(String, Option<f64>)>,
    /// (variable, predictor) pairs removed by the drop_predictor policy.
    pub dropped_predictors: Vec<(String, String)>,
}

/// Fill every missing cell with a uniform draw from that variable's observed
/// values, returning the working table.
pub fn initialize_fill(d: &Dataset, rng: &mut impl rand::Rng) -> Result<Dataset> {
    let mut working = d.clone();
    for col in d.columns() {
        let missing = col.missing_rows();
        if missing.is_empty() {
            continue;
        }
        let observed: Vec<f64> = col.observed_values().collect();
        if observed.is_empty() {
            return Err(Error::FullyMissing(col.name().to_string()));
        }
        let fills: Vec<f64> = missing
            .iter()
            .map(|_| observed[rng.gen_range(0..observed.len())])
            .collect();
        working = working.with_filled(col.name(), &missing, &fills)?;
    }
    Ok(working)
}

fn fit_model(working: &Dataset, rows: &[usize], model: &VariableModel, predictors: &[String]) -> Result<Fit> {
    let observed = working.select_rows(rows);
    let preds: Vec<&str> = predictors.iter().map(String::as_str).collect();
    let f = ModelFormula::new(model.variable.clone(), &preds);
    Ok(match model.method {
        Method::Linear => Fit::Linear(fit_linear(&observed, &f)?),
        Method::Logistic => Fit::Logistic(fit_logistic(&observed, &f)?),
        Method::Ordinal => Fit::Ordinal(fit_ordinal(&observed, &f)?),
    })
}

/// Predictor matrix for `rows` of the working table: intercept-led for linear
/// and logistic models, predictors-only for ordinal models.
fn predictor_matrix(
    working: &Dataset,
    rows: &[usize],
    predictors: &[String],
    method: Method,
) -> Result<DMatrix<f64>> {
    let intercept = method != Method::Ordinal;
    let offset = usize::from(intercept);
    let mut x = DMatrix::zeros(rows.len(), predictors.len() + offset);
    if intercept {
        for r in 0..rows.len() {
            x[(r, 0)] = 1.0;
        }
    }
    for (j, name) in predictors.iter().enumerate() {
        let col = working.column(name)?;
        for (r, &i) in rows.iter().enumerate() {
            x[(r, j + offset)] = col.value(i).expect("working table is complete");
        }
    }
    Ok(x)
}

fn separation_error(model: &VariableModel, predictors: &[String]) -> Error {
    Error::Separation {
        variable: model.variable.clone(),
        predictors: predictors.to_vec(),
    }
}

/// Fit with the perfect-prediction policy applied. Returns the fit, the
/// predictor list actually used, and any (variable, predictor) drops made.
fn fit_with_policy(
    working: &Dataset,
    rows: &[usize],
    model: &VariableModel,
    policy: PerfectPredictionPolicy,
) -> Result<Option<(Fit, Vec<String>, Vec<(String, String)>)>> {
    let mut predictors = model.predictors.clone();
    let mut dropped = Vec::new();
    loop {
        let attempt = fit_model(working, rows, model, &predictors);
        let failure = match &attempt {
            Ok(fit) if fit.separation_detected() => true,
            Ok(_) => false,
            Err(Error::RankDeficient { .. }) => true,
            Err(_) => false,
        };
        if !failure {
            return attempt.map(|fit| Some((fit, predictors, dropped)));
        }
        match policy {
            PerfectPredictionPolicy::Error => {
                return Err(separation_error(model, &predictors));
            }
            PerfectPredictionPolicy::AbortVariable => return Ok(None),
            PerfectPredictionPolicy::DropPredictor => {
                match predictors.pop() {
                    Some(p) => dropped.push((model.variable.clone(), p)),
                    None => return Err(separation_error(model, &model.predictors)),
                }
            }
        }
    }
}

struct CycleOutcome {
    working: Dataset,
    fit_statistics: Vec<(String, Option<f64>)>,
    dropped: Vec<(String, String)>,
}

/// One pass over the incomplete variables in declared order.
///
/// `cycle_stream` supplies two substreams per variable: one for the parameter
/// draw, one for the imputation noise.
fn mice_cycle(
    original: &Dataset,
    working: Dataset,
    spec: &ImputationSpec,
    cycle_stream: Stream,
) -> Result<CycleOutcome> {
    let mut working = working;
    let mut stats = Vec::with_capacity(spec.models.len());
    let mut dropped = Vec::new();
    for (v, model) in spec.models.iter().enumerate() {
        let source = original.column(&model.variable)?;
        let missing = source.missing_rows();
        if missing.is_empty() {
            stats.push((model.variable.clone(), None));
            continue;
        }
        let observed_rows = source.observed_rows();
        let var_stream = cycle_stream.child(v as u64);
        let fitted = fit_with_policy(
            &working,
            &observed_rows,
            model,
            spec.perfect_prediction_policy,
        )?;
        let Some((fit, predictors, drops)) = fitted else {
            stats.push((model.variable.clone(), None));
            continue;
        };
        dropped.extend(drops);
        stats.push((model.variable.clone(), fit.fit_statistic()));
        let draw = draw_parameters(&fit, &mut var_stream.child(0).rng())?;
        let x = predictor_matrix(&working, &missing, &predictors, model.method)?;
        let values = impute_draw(&draw, &x, &mut var_stream.child(1).rng());
        working = working.with_filled(&model.variable, &missing, &values)?;
    }
    Ok(CycleOutcome {
        working,
        fit_statistics: stats,
        dropped,
    })
}

fn run_chain(d: &Dataset, spec: &ImputationSpec, chain: Stream, index: usize) -> Result<CompletedDataset> {
    let mut working = initialize_fill(d, &mut chain.child(0).rng())?;
    let mut fit_statistics = Vec::new();
    let mut dropped = Vec::new();
    for c in 1..=spec.iterations {
        let outcome = mice_cycle(d, working, spec, chain.child(c as u64))?;
        working = outcome.working;
        fit_statistics = outcome.fit_statistics;
        for pair in outcome.dropped {
            if !dropped.contains(&pair) {
                dropped.push(pair);
            }
        }
    }
    let imputed_cells = spec
        .models
        .iter()
        .map(|m| {
            let rows = d.column(&m.variable).map(|c| c.missing_rows());
            rows.map(|r| (m.variable.clone(), r))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CompletedDataset {
        data: working,
        index,
        imputed_cells,
        fit_statistics,
        dropped_predictors: dropped,
    })
}

/// Produce M completed datasets from `d`. Chain `i` uses the substream
/// `master.child(i)`, so output is independent of scheduling.
pub fn impute(d: &Dataset, spec: &ImputationSpec, master: Stream) -> Result<Vec<CompletedDataset>> {
    spec.validate(d)?;
    (0..spec.m)
        .into_par_iter()
        .map(|i| {
            run_chain(d, spec, master.child(i as u64), i).map_err(|e| Error::Chain {
                index: i,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Serial reference implementation of [`impute`], used to verify that chain
/// results do not depend on scheduling.
pub fn impute_serial(
    d: &Dataset,
    spec: &ImputationSpec,
    master: Stream,
) -> Result<Vec<CompletedDataset>> {
    spec.validate(d)?;
    (0..spec.m)
        .map(|i| {
            run_chain(d, spec, master.child(i as u64), i).map_err(|e| Error::Chain {
                index: i,
                source: Box::new(e),
            })
        })
        .collect()
}
