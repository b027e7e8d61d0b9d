//! Report rendering: CSV, human-readable markdown tables, and
//! full-precision JSON.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::config::ReportFormat;
use crate::harness::grid::{CellResult, GridOutcome};
use crate::harness::metrics::efficiency_metrics;

/// The LD cell of the same (mechanism, rate) block, if any.
fn ld_reference<'a>(cells: &'a [CellResult], cell: &CellResult) -> Option<&'a CellResult> {
    cells.iter().find(|c| {
        c.id.estimator == "ld" && c.id.mechanism == cell.id.mechanism && c.id.rate == cell.id.rate
    })
}

fn pct_vs_ld(cells: &[CellResult], cell: &CellResult) -> Option<(i64, i64)> {
    let ld = ld_reference(cells, cell)?;
    if cell.est_sd <= 0.0 || ld.est_sd <= 0.0 {
        return None;
    }
    let row = efficiency_metrics(cell.est_sd, ld.est_sd).ok()?;
    Some((row.se_diff_pct(), row.equiv_n_change_pct()))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Flat CSV: one row per cell, full-precision values, integer percents for
/// the two efficiency columns.
pub fn render_csv(outcome: &GridOutcome) -> String {
    let mut out = String::from(
        "mechanism,rate,estimator,replications,est_mean,est_sd,mean_model_se,bias,mean_r2,\
         se_diff_vs_ld_pct,equiv_n_change_vs_ld_pct\n",
    );
    for cell in &outcome.cells {
        let (se_pct, n_pct) = match pct_vs_ld(&outcome.cells, cell) {
            Some((a, b)) => (a.to_string(), b.to_string()),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            cell.id.mechanism,
            cell.id.rate,
            cell.id.estimator,
            cell.replications,
            cell.est_mean,
            cell.est_sd,
            cell.mean_model_se,
            cell.bias,
            fmt_opt(cell.mean_r2),
            se_pct,
            n_pct,
        ));
    }
    out
}

/// Markdown: one block per (mechanism, rate), estimators as columns and the
/// table's row set (slope, SE, the two efficiency rows, imputation R²).
pub fn render_markdown(outcome: &GridOutcome) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# Simulation report\n\nPilot estimand (focal slope, large-n complete fit): {:.4}\n",
        outcome.pilot_estimand
    ));
    let mut blocks: Vec<(String, f64)> = Vec::new();
    for c in &outcome.cells {
        let key = (c.id.mechanism.clone(), c.id.rate);
        if !blocks.contains(&key) {
            blocks.push(key);
        }
    }
    for (mechanism, rate) in blocks {
        let cells: Vec<&CellResult> = outcome
            .cells
            .iter()
            .filter(|c| c.id.mechanism == mechanism && c.id.rate == rate)
            .collect();
        out.push_str(&format!(
            "\n## {}, missing {:.0}%\n\n",
            mechanism,
            rate * 100.0
        ));
        let header: Vec<String> = cells.iter().map(|c| c.id.estimator.clone()).collect();
        out.push_str(&format!("| | {} |\n", header.join(" | ")));
        out.push_str(&format!("|---|{}\n", "---|".repeat(cells.len())));
        let row = |label: &str, values: Vec<String>| {
            format!("| {} | {} |\n", label, values.join(" | "))
        };
        out.push_str(&row(
            "slope (mean)",
            cells.iter().map(|c| format!("{:.4}", c.est_mean)).collect(),
        ));
        out.push_str(&row(
            "standard error (empirical SD)",
            cells.iter().map(|c| format!("{:.4}", c.est_sd)).collect(),
        ));
        out.push_str(&row(
            "bias vs pilot",
            cells.iter().map(|c| format!("{:+.4}", c.bias)).collect(),
        ));
        out.push_str(&row(
            "difference in SE vs LD",
            cells
                .iter()
                .map(|c| match pct_vs_ld(&outcome.cells, c) {
                    Some((se, _)) => format!("{se}%"),
                    None => "\u{2014}".into(),
                })
                .collect(),
        ));
        out.push_str(&row(
            "equivalent change in sample size vs LD",
            cells
                .iter()
                .map(|c| match pct_vs_ld(&outcome.cells, c) {
                    Some((_, n)) => format!("{n}%"),
                    None => "\u{2014}".into(),
                })
                .collect(),
        ));
        out.push_str(&row(
            "R\u{b2} of imputation model",
            cells
                .iter()
                .map(|c| match c.mean_r2 {
                    Some(r2) => format!("{r2:.2}"),
                    None => "\u{2014}".into(),
                })
                .collect(),
        ));
    }
    out
}

/// Full-precision JSON of the whole outcome; round-trips losslessly.
pub fn render_json(outcome: &GridOutcome) -> Result<String> {
    serde_json::to_string_pretty(outcome).map_err(|e| Error::Config(e.to_string()))
}

/// Render in the requested format.
pub fn render(outcome: &GridOutcome, format: ReportFormat) -> Result<String> {
    Ok(match format {
        ReportFormat::Csv => render_csv(outcome),
        ReportFormat::Markdown => render_markdown(outcome),
        ReportFormat::Json => render_json(outcome)?,
    })
}

/// Write `report.<ext>` under `dir`, creating the directory, and return the path.
pub fn emit_report(outcome: &GridOutcome, format: ReportFormat, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("report.{}", format.extension()));
    std::fs::write(&path, render(outcome, format)?)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::grid::CellId;

    fn cell(estimator: &str, rate: f64, sd: f64, r2: Option<f64>) -> CellResult {
        CellResult {
            id: CellId {
                mechanism: "mcar".into(),
                rate,
                estimator: estimator.into(),
            },
            replications: 100,
            est_mean: 0.1256,
            est_sd: sd,
            mean_model_se: sd * 1.01,
            bias: 0.0012,
            mean_r2: r2,
        }
    }

    fn table_like_outcome() -> GridOutcome {
        GridOutcome {
            pilot_estimand: 0.124,
            cells: vec![
                cell("ld", 0.3, 0.0239, None),
                cell("mi", 0.3, 0.0234, Some(0.14)),
                cell("mi:moderate", 0.3, 0.0229, Some(0.45)),
                cell("mi:strong", 0.3, 0.0209, Some(0.62)),
                cell("complete", 0.3, 0.0200, None),
            ],
        }
    }

    #[test]
    fn json_round_trips_exactly() {
        let outcome = table_like_outcome();
        let text = render_json(&outcome).unwrap();
        let back: GridOutcome = serde_json::from_str(&text).unwrap();
        assert_eq!(outcome, back);
    }

    #[test]
    fn csv_carries_the_published_percents() {
        let text = render_csv(&table_like_outcome());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert!(lines[1].ends_with(",0,0"), "ld row: {}", lines[1]);
        assert!(lines[4].ends_with(",-13,31"), "strong row: {}", lines[4]);
        assert!(lines[5].ends_with(",-16,43"), "complete row: {}", lines[5]);
    }

    #[test]
    fn markdown_mirrors_the_table_row_set() {
        let text = render_markdown(&table_like_outcome());
        for label in [
            "slope (mean)",
            "standard error (empirical SD)",
            "difference in SE vs LD",
            "equivalent change in sample size vs LD",
            "R\u{b2} of imputation model",
        ] {
            assert!(text.contains(label), "missing row {label:?}:\n{text}");
        }
        assert!(text.contains("-13%"));
        assert!(text.contains("31%"));
        assert!(text.contains("0.62"));
        assert!(text.contains("## mcar, missing 30%"));
    }

    #[test]
    fn rendering_does_not_mutate_the_outcome() {
        let outcome = table_like_outcome();
        let copy = outcome.clone();
        let _ = render_csv(&outcome);
        let _ = render_markdown(&outcome);
        let _ = render_json(&outcome).unwrap();
        assert_eq!(outcome, copy);
    }

    #[test]
    fn files_are_written_per_format() {
        let outcome = table_like_outcome();
        let dir = tempfile::tempdir().unwrap();
        for format in [ReportFormat::Csv, ReportFormat::Markdown, ReportFormat::Json] {
            let path = emit_report(&outcome, format, dir.path()).unwrap();
            assert!(path.exists());
            let text = std::fs::read_to_string(&path).unwrap();
            assert_eq!(text, render(&outcome, format).unwrap());
        }
    }
}
