//! Declarative harness configuration: one TOML document describes the
//! population, the experimental grid, the replication plan, and the outputs.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mice::Method;
use crate::missingness::Mechanism;
use crate::simgen::PopulationConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// Which estimator a grid cell runs.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Estimator {
    /// Listwise deletion.
    Ld,
    /// The analysis model on the un-amputed data.
    Complete,
    /// Multiple imputation; `tier` names an auxiliary tier from the
    /// population config, or `None` for no auxiliaries.
    Mi { tier: Option<String> },
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Estimator::Ld => write!(f, "ld"),
            Estimator::Complete => write!(f, "complete"),
            Estimator::Mi { tier: None } => write!(f, "mi"),
            Estimator::Mi { tier: Some(t) } => write!(f, "mi:{t}"),
        }
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ld" => Ok(Estimator::Ld),
            "complete" => Ok(Estimator::Complete),
            "mi" => Ok(Estimator::Mi { tier: None }),
            other => match other.strip_prefix("mi:") {
                Some(tier) if !tier.is_empty() => Ok(Estimator::Mi {
                    tier: Some(tier.to_string()),
                }),
                _ => Err(Error::Config(format!(
                    "unknown estimator {other:?}; expected ld, complete, mi, or mi:<tier>"
                ))),
            },
        }
    }
}

impl Serialize for Estimator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Estimator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// Analysis model fitted by every estimator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub response: String,
    pub predictors: Vec<String>,
    pub method: Method,
}

/// The mechanism x rate x estimator grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Variable whose values get deleted.
    pub target: String,
    pub mechanism: Mechanism,
    pub rates: Vec<f64>,
    pub estimators: Vec<Estimator>,
    /// Coefficient whose distribution the tables report.
    pub focal_term: String,
    pub analysis: AnalysisConfig,
}

fn default_pilot_n() -> usize {
    1_000_000
}

/// Replication plan and RNG seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplicationConfig {
    pub replications: usize,
    /// Imputations per replication for MI estimators.
    pub m: usize,
    /// Chained-equation cycles per imputation.
    pub iterations: usize,
    /// Draw a fresh population each replication instead of re-amputing one
    /// fixed population.
    #[serde(default)]
    pub resample_population: bool,
    pub seed: u64,
    /// Population size for the large-n pilot fit that anchors bias checks.
    #[serde(default = "default_pilot_n")]
    pub pilot_n: usize,
}

/// Report formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Markdown,
    Json,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "md",
            ReportFormat::Json => "json",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Config(format!(
                "unknown format {other:?}; expected csv, markdown, or json"
            ))),
        }
    }
}

fn default_formats() -> Vec<ReportFormat> {
    vec![ReportFormat::Csv, ReportFormat::Markdown, ReportFormat::Json]
}

fn default_out_dir() -> String {
    "out".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_formats")]
    pub formats: Vec<ReportFormat>,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            formats: default_formats(),
            out_dir: default_out_dir(),
        }
    }
}

/// The whole declarative document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessConfig {
    pub schema_version: u32,
    pub population: PopulationConfig,
    pub grid: GridConfig,
    pub replication: ReplicationConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl HarnessConfig {
    /// Desk-scale default: n = 2000, R = 100, M = 20, MCAR at 30/20/10%,
    /// all estimator columns.
    pub fn desk_default(seed: u64) -> Self {
        let population = PopulationConfig::survey_like(2000, seed);
        let predictors: Vec<String> = crate::simgen::covariate_names(&population);
        Self {
            schema_version: SCHEMA_VERSION,
            population,
            grid: GridConfig {
                target: "x1".into(),
                mechanism: Mechanism::Mcar,
                rates: vec![0.30, 0.20, 0.10],
                estimators: vec![
                    Estimator::Ld,
                    Estimator::Mi { tier: None },
                    Estimator::Mi {
                        tier: Some("moderate".into()),
                    },
                    Estimator::Mi {
                        tier: Some("strong".into()),
                    },
                    Estimator::Complete,
                ],
                focal_term: "x1".into(),
                analysis: AnalysisConfig {
                    response: "y".into(),
                    predictors,
                    method: Method::Logistic,
                },
            },
            replication: ReplicationConfig {
                replications: 100,
                m: 20,
                iterations: 10,
                resample_population: false,
                seed,
                pilot_n: default_pilot_n(),
            },
            output: OutputConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (this build reads version {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.population.validate()?;
        if self.grid.rates.is_empty() || self.grid.estimators.is_empty() {
            return Err(Error::Config(
                "the grid needs at least one rate and one estimator".into(),
            ));
        }
        for &rate in &self.grid.rates {
            if !(rate > 0.0 && rate < 1.0) {
                return Err(Error::Config(format!(
                    "grid rate {rate} must lie in (0, 1)"
                )));
            }
        }
        let tier_names: Vec<&str> = self
            .population
            .aux_tiers
            .iter()
            .map(|t| t.name.as_str())
            .collect();
        for est in &self.grid.estimators {
            if let Estimator::Mi { tier: Some(t) } = est {
                if !tier_names.contains(&t.as_str()) {
                    return Err(Error::Config(format!(
                        "estimator mi:{t} names an auxiliary tier missing from the population (have {tier_names:?})"
                    )));
                }
            }
        }
        if let Mechanism::Mar { score } = &self.grid.mechanism {
            if score.iter().any(|(name, _)| name == &self.grid.target) {
                return Err(Error::Config(format!(
                    "MAR score may not reference the amputation target {:?}",
                    self.grid.target
                )));
            }
        }
        let analysis = &self.grid.analysis;
        if !analysis.predictors.contains(&self.grid.focal_term)
            && self.grid.focal_term != "intercept"
        {
            return Err(Error::Config(format!(
                "focal term {:?} is not a term of the analysis model",
                self.grid.focal_term
            )));
        }
        if analysis.predictors.contains(&analysis.response) {
            return Err(Error::Config(
                "the analysis response cannot also be a predictor".into(),
            ));
        }
        if !analysis.predictors.contains(&self.grid.target) {
            return Err(Error::Config(format!(
                "amputation target {:?} should appear in the analysis model; \
                 otherwise every estimator is the complete-data estimator",
                self.grid.target
            )));
        }
        let r = &self.replication;
        if r.replications < 2 {
            return Err(Error::Config(format!(
                "at least 2 replications are required, got {}",
                r.replications
            )));
        }
        if r.m < 2 || r.iterations < 1 {
            return Err(Error::Config(format!(
                "MI needs m >= 2 and iterations >= 1, got m = {}, iterations = {}",
                r.m, r.iterations
            )));
        }
        if r.pilot_n < self.population.n {
            return Err(Error::Config(format!(
                "pilot_n {} must not be smaller than the population size {}",
                r.pilot_n, self.population.n
            )));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: HarnessConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }
}
