//! End-to-end tests of the command-line binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_auximpute");

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary should run")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn small_config(out_dir: &str) -> String {
    format!(
        r#"
schema_version = 1

[population]
n = 300
true_beta = [-0.35, 0.5, 0.3, -0.3, 0.2, -0.2, 0.2, 0.3]
covariates = ["continuous", "binary", "continuous", "binary", "continuous", "binary"]
base_r2 = 0.14
seed = 1

[[population.aux_tiers]]
name = "moderate"
target_r2 = 0.45

[[population.aux_tiers]]
name = "strong"
target_r2 = 0.62

[grid]
target = "x1"
rates = [0.3]
estimators = ["ld", "mi:strong", "complete"]
focal_term = "x1"

[grid.mechanism]
kind = "mcar"

[grid.analysis]
response = "y"
predictors = ["x1", "x2", "x3", "x4", "x5", "x6", "x7"]
method = "logistic"

[replication]
replications = 4
m = 3
iterations = 2
seed = 11
pilot_n = 20000

[output]
formats = ["csv", "markdown", "json"]
out_dir = "{out_dir}"
"#
    )
}

#[test]
fn metrics_prints_percentages_and_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["metrics", "0.0209", "0.0239", "--rate", "0.3"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("-13%"), "{text}");
    assert!(text.contains("31%"), "{text}");
    assert!(text.contains("SE -16%"), "{text}");
    assert!(text.contains("sample size +43%"), "{text}");
}

#[test]
fn metrics_json_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["metrics", "0.0200", "0.0239", "--rate", "0.3", "--format", "json"],
        dir.path(),
    );
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["se_diff_pct"], -16);
    assert_eq!(doc["equiv_n_change_pct"], 43);
    let n_change = doc["analytic_mcar"]["equiv_n_change_complete_vs_ld"]
        .as_f64()
        .unwrap();
    assert!((n_change - (1.0 / 0.7 - 1.0)).abs() < 1e-12);
}

#[test]
fn bad_input_exits_nonzero_with_json_error() {
    let dir = tempfile::tempdir().unwrap();
    // a zero reference SE is arithmetic nonsense
    let out = run(&["metrics", "0.02", "0"], dir.path());
    assert!(!out.status.success());
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8(out.stderr.clone()).unwrap().trim()).unwrap();
    assert!(err["error"].is_string());

    // missing config file
    let out = run(&["run", "--config", "no_such_file.toml"], dir.path());
    assert!(!out.status.success());
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8(out.stderr.clone()).unwrap().trim()).unwrap();
    assert!(err["error"].is_string());
}

#[test]
fn generate_writes_population_and_truth() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["generate", "--n", "500", "--seed", "9", "--out-dir", "gen"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let pop = dir.path().join("gen/population.csv");
    let truth = dir.path().join("gen/truth.json");
    assert!(pop.exists() && truth.exists());

    let csv_text = fs::read_to_string(&pop).unwrap();
    let header = csv_text.lines().next().unwrap();
    assert_eq!(header, "x1,x2,x3,x4,x5,x6,x7,z_moderate,z_strong,y");
    assert_eq!(csv_text.lines().count(), 501);

    let truth_doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&truth).unwrap()).unwrap();
    assert_eq!(truth_doc["true_beta"].as_array().unwrap().len(), 8);

    // a different seed gives different data
    let out2 = run(
        &["generate", "--n", "500", "--seed", "10", "--out-dir", "gen2"],
        dir.path(),
    );
    assert!(out2.status.success());
    let other = fs::read_to_string(dir.path().join("gen2/population.csv")).unwrap();
    assert_ne!(csv_text, other);
}

#[test]
fn impute_fills_missing_cells_and_preserves_observed() {
    let dir = tempfile::tempdir().unwrap();
    // a small hand-made table with missing cells in two columns
    let mut rows = String::from("a,b,flag\n");
    for i in 0..60 {
        let a = if i % 5 == 0 {
            String::new()
        } else {
            format!("{:.3}", (i as f64) * 0.1 - 3.0)
        };
        let b = if i % 7 == 0 {
            String::new()
        } else {
            format!("{:.3}", (i as f64) * -0.05 + 1.0)
        };
        let flag = i % 2;
        rows.push_str(&format!("{a},{b},{flag}\n"));
    }
    let input = dir.path().join("table.csv");
    fs::write(&input, &rows).unwrap();

    let out = run(
        &[
            "impute",
            "table.csv",
            "--m",
            "3",
            "--iterations",
            "3",
            "--kind",
            "flag=binary",
            "--seed",
            "5",
            "--out-dir",
            "done",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let listed: Vec<String> = stdout(&out).lines().map(String::from).collect();
    assert_eq!(listed.len(), 3);
    let original: Vec<Vec<String>> = rows
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    for k in 1..=3 {
        let path = dir.path().join(format!("done/table_imp{k}.csv"));
        assert!(path.exists(), "missing {path:?}");
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "a,b,flag");
        assert_eq!(lines.len(), 61);
        for (i, line) in lines[1..].iter().enumerate() {
            let cells: Vec<&str> = line.split(',').collect();
            for j in 0..3 {
                assert!(!cells[j].is_empty(), "row {i} col {j} still missing");
                if !original[i][j].is_empty() {
                    // observed cells pass through numerically unchanged
                    let before: f64 = original[i][j].parse().unwrap();
                    let after: f64 = cells[j].parse().unwrap();
                    assert_eq!(before, after, "row {i} col {j} changed");
                }
            }
        }
    }
}

#[test]
fn run_is_reproducible_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cfg.toml"), small_config("out_a")).unwrap();

    let out = run(&["run", "--config", "cfg.toml"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["report.csv", "report.md", "report.json"] {
        assert!(dir.path().join("out_a").join(name).exists(), "missing {name}");
    }

    // identical rerun into another directory, forced single-threaded
    let out2 = run(
        &["run", "--config", "cfg.toml", "--out-dir", "out_b", "--threads", "1"],
        dir.path(),
    );
    assert!(out2.status.success());
    for name in ["report.csv", "report.md", "report.json"] {
        let a = fs::read_to_string(dir.path().join("out_a").join(name)).unwrap();
        let b = fs::read_to_string(dir.path().join("out_b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }

    // a different seed changes the numbers
    let out3 = run(
        &["run", "--config", "cfg.toml", "--out-dir", "out_c", "--seed", "99"],
        dir.path(),
    );
    assert!(out3.status.success());
    let a = fs::read_to_string(dir.path().join("out_a/report.csv")).unwrap();
    let c = fs::read_to_string(dir.path().join("out_c/report.csv")).unwrap();
    assert_ne!(a, c);
}

#[test]
fn run_format_flag_selects_single_report() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cfg.toml"), small_config("out")).unwrap();
    let out = run(
        &["run", "--config", "cfg.toml", "--format", "markdown"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("out/report.md").exists());
    assert!(!dir.path().join("out/report.csv").exists());
    assert!(!dir.path().join("out/report.json").exists());
    let md = fs::read_to_string(dir.path().join("out/report.md")).unwrap();
    assert!(md.contains("difference in SE vs LD"), "{md}");
}
