//! Thin command-line front end over the library.
//!
//! Subcommands:
//! - `run`: execute a simulation grid from a TOML config and write reports
//! - `metrics`: efficiency arithmetic on user-supplied standard errors
//! - `generate`: emit a synthetic population as CSV
//! - `impute`: CSV in, M completed CSVs out
//!
//! Failures exit nonzero with a machine-readable JSON error on stderr.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use auximpute::data::{emit_csv_path, load_csv, VariableKind};
use auximpute::harness::{
    analytic_mcar_bounds, efficiency_metrics, emit_report, run_grid, HarnessConfig, ReportFormat,
};
use auximpute::mice::{impute, ImputationSpec, Method, PerfectPredictionPolicy, VariableModel};
use auximpute::rng::Stream;
use auximpute::simgen::{generate_population, PopulationConfig};
use auximpute::{Error, Result};

#[derive(Parser)]
#[command(name = "auximpute", version, about = "Multiple imputation with auxiliary variables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Master RNG seed (overrides any seed in a config file).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Output format: csv, markdown, or json.
    #[arg(long)]
    format: Option<String>,
    /// Directory for output files.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation grid and write reports.
    Run {
        /// TOML config path; omitted = the built-in desk-scale default.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Efficiency arithmetic: compare a method SE against a reference SE.
    Metrics {
        /// The method's standard error.
        se_method: f64,
        /// The reference (LD) standard error.
        se_ref: f64,
        /// Also print the analytic complete-vs-LD bounds for this MCAR rate.
        #[arg(long)]
        rate: Option<f64>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Generate a synthetic population CSV.
    Generate {
        /// Number of rows.
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Impute a CSV with missing cells, writing M completed CSVs.
    Impute {
        /// Input CSV; empty cells (or `--missing-token`) are missing.
        input: PathBuf,
        /// Number of imputations.
        #[arg(long, default_value_t = 5)]
        m: usize,
        /// Chained-equation cycles per imputation.
        #[arg(long, default_value_t = 10)]
        iterations: usize,
        /// Column kinds, e.g. -k y=binary -k grade=ordinal:1|2|3
        /// (unlisted columns are continuous).
        #[arg(short, long = "kind", value_name = "NAME=KIND")]
        kinds: Vec<String>,
        /// Model overrides, e.g. -M x1=x2+x3+y
        /// (default: each incomplete column on all other columns).
        #[arg(short = 'M', long = "model", value_name = "TARGET=P1+P2")]
        models: Vec<String>,
        /// Drop perfectly predictive regressors instead of failing.
        #[arg(long)]
        drop_perfect_predictors: bool,
        /// Token marking a missing cell.
        #[arg(long, default_value = "")]
        missing_token: String,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn parse_kind(text: &str) -> Result<VariableKind> {
    match text {
        "continuous" => Ok(VariableKind::Continuous),
        "binary" => Ok(VariableKind::Binary),
        other => match other.strip_prefix("ordinal:") {
            Some(levels) => {
                let levels = levels
                    .split('|')
                    .map(|l| {
                        l.parse::<i64>()
                            .map_err(|_| Error::Config(format!("bad ordinal level {l:?}")))
                    })
                    .collect::<Result<Vec<i64>>>()?;
                let kind = VariableKind::Ordinal { levels };
                kind.validate()?;
                Ok(kind)
            }
            None => Err(Error::Config(format!(
                "unknown kind {other:?}; expected continuous, binary, or ordinal:a|b|c"
            ))),
        },
    }
}

fn split_pair<'a>(text: &'a str, what: &str) -> Result<(&'a str, &'a str)> {
    text.split_once('=')
        .ok_or_else(|| Error::Config(format!("{what} {text:?} must look like name=value")))
}

fn init_threads(common: &CommonOpts) -> Result<()> {
    if let Some(t) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn formats_from(common: &CommonOpts, fallback: &[ReportFormat]) -> Result<Vec<ReportFormat>> {
    match &common.format {
        Some(f) => Ok(vec![f.parse()?]),
        None => Ok(fallback.to_vec()),
    }
}

fn cmd_run(config: Option<PathBuf>, common: &CommonOpts) -> Result<()> {
    init_threads(common)?;
    let mut cfg = match config {
        Some(path) => HarnessConfig::load(path)?,
        None => HarnessConfig::desk_default(20260824),
    };
    if let Some(seed) = common.seed {
        cfg.replication.seed = seed;
        cfg.population.seed = seed;
    }
    if let Some(dir) = &common.out_dir {
        cfg.output.out_dir = dir.display().to_string();
    }
    let formats = formats_from(common, &cfg.output.formats)?;
    let outcome = run_grid(&cfg)?;
    let dir = PathBuf::from(&cfg.output.out_dir);
    for format in formats {
        let path = emit_report(&outcome, format, &dir)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn cmd_metrics(se_method: f64, se_ref: f64, rate: Option<f64>, common: &CommonOpts) -> Result<()> {
    let row = efficiency_metrics(se_method, se_ref)?;
    let bounds = rate.map(analytic_mcar_bounds).transpose()?;
    match common.format.as_deref() {
        Some("json") => {
            let mut doc = serde_json::json!({
                "se_method": se_method,
                "se_ref": se_ref,
                "se_diff": row.se_diff,
                "se_diff_pct": row.se_diff_pct(),
                "equiv_n_change": row.equiv_n_change,
                "equiv_n_change_pct": row.equiv_n_change_pct(),
            });
            if let (Some(rate), Some((se_red, n_change))) = (rate, bounds) {
                doc["analytic_mcar"] = serde_json::json!({
                    "rate": rate,
                    "se_reduction_complete_vs_ld": se_red,
                    "equiv_n_change_complete_vs_ld": n_change,
                });
            }
            println!("{}", serde_json::to_string_pretty(&doc).map_err(|e| Error::Config(e.to_string()))?);
        }
        _ => {
            println!("difference in SE vs reference:            {}%", row.se_diff_pct());
            println!("equivalent change in sample size:         {}%", row.equiv_n_change_pct());
            if let (Some(rate), Some((se_red, n_change))) = (rate, bounds) {
                println!(
                    "analytic complete-vs-LD at MCAR rate {:.2}: SE -{}%, sample size +{}%",
                    rate,
                    (se_red * 100.0).round(),
                    (n_change * 100.0).round()
                );
            }
        }
    }
    Ok(())
}

fn cmd_generate(n: usize, common: &CommonOpts) -> Result<()> {
    let seed = common.seed.unwrap_or(20260824);
    let cfg = PopulationConfig::survey_like(n, seed);
    let (data, truth) = generate_population(&cfg, &mut Stream::root(seed).rng())?;
    let dir = common.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("population.csv");
    emit_csv_path(&data, &path, "")?;
    println!("{}", path.display());
    let truth_path = dir.join("truth.json");
    std::fs::write(
        &truth_path,
        serde_json::to_string_pretty(&truth).map_err(|e| Error::Config(e.to_string()))?,
    )?;
    println!("{}", truth_path.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_impute(
    input: &PathBuf,
    m: usize,
    iterations: usize,
    kinds: &[String],
    models: &[String],
    drop_perfect_predictors: bool,
    missing_token: &str,
    common: &CommonOpts,
) -> Result<()> {
    init_threads(common)?;
    let header = {
        let mut reader = csv::ReaderBuilder::new().from_path(input)?;
        reader
            .headers()?
            .iter()
            .map(String::from)
            .collect::<Vec<String>>()
    };
    let mut kind_by_name: std::collections::HashMap<String, VariableKind> =
        std::collections::HashMap::new();
    for entry in kinds {
        let (name, kind) = split_pair(entry, "kind")?;
        if !header.iter().any(|h| h == name) {
            return Err(Error::UnknownVariable(name.into()));
        }
        kind_by_name.insert(name.to_string(), parse_kind(kind)?);
    }
    let specs: Vec<(String, VariableKind)> = header
        .iter()
        .map(|name| {
            (
                name.clone(),
                kind_by_name
                    .get(name)
                    .cloned()
                    .unwrap_or(VariableKind::Continuous),
            )
        })
        .collect();
    let data = load_csv(input, &specs, missing_token)?;

    let mut model_by_target: std::collections::HashMap<String, Vec<String>> =
        std::collections::HashMap::new();
    for entry in models {
        let (target, preds) = split_pair(entry, "model")?;
        model_by_target.insert(
            target.to_string(),
            preds.split('+').map(String::from).collect(),
        );
    }
    let mut variable_models = Vec::new();
    for col in data.columns() {
        if col.n_missing() == 0 && !model_by_target.contains_key(col.name()) {
            continue;
        }
        let predictors = model_by_target.remove(col.name()).unwrap_or_else(|| {
            header
                .iter()
                .filter(|h| *h != col.name())
                .cloned()
                .collect()
        });
        let method = match col.kind() {
            VariableKind::Continuous => Method::Linear,
            VariableKind::Binary => Method::Logistic,
            VariableKind::Ordinal { .. } => Method::Ordinal,
        };
        variable_models.push(VariableModel {
            variable: col.name().to_string(),
            method,
            predictors,
        });
    }
    if let Some(orphan) = model_by_target.keys().next() {
        return Err(Error::UnknownVariable(orphan.clone()));
    }

    let mut spec = ImputationSpec::new(variable_models, m, iterations);
    if drop_perfect_predictors {
        spec.perfect_prediction_policy = PerfectPredictionPolicy::DropPredictor;
    }
    let seed = common.seed.unwrap_or(20260824);
    let completed = impute(&data, &spec, Stream::root(seed))?;
    let dir = common.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir)?;
    let stem = input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("imputed");
    for c in &completed {
        let path = dir.join(format!("{stem}_imp{}.csv", c.index + 1));
        emit_csv_path(&c.data, &path, missing_token)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Run { config, common } => cmd_run(config.clone(), common),
        Command::Metrics {
            se_method,
            se_ref,
            rate,
            common,
        } => cmd_metrics(*se_method, *se_ref, *rate, common),
        Command::Generate { n, common } => cmd_generate(*n, common),
        Command::Impute {
            input,
            m,
            iterations,
            kinds,
            models,
            drop_perfect_predictors,
            missing_token,
            common,
        } => cmd_impute(
            input,
            *m,
            *iterations,
            kinds,
            models,
            *drop_perfect_predictors,
            missing_token,
            common,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let doc = serde_json::json!({
                "error": e.to_string(),
            });
            eprintln!("{doc}");
            ExitCode::FAILURE
        }
    }
}
