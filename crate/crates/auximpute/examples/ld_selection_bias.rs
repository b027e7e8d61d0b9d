//! When deletion depends on the response, listwise deletion selects the
//! sample on y. The logistic intercept is then badly biased while multiple
//! imputation, which uses the deleted rows' other columns, stays close.
//! (The slope survives selection on y — a classic case-control result — so
//! watch the intercept here.)
//!
//! Run with: cargo run --release --example ld_selection_bias

use auximpute::data::ModelFormula;
use auximpute::mice::{impute, ImputationSpec, Method, VariableModel};
use auximpute::missingness::{ampute, MissingnessSpec};
use auximpute::pooling::{ld_estimate, mi_estimates, pool_rubin};
use auximpute::rng::Stream;
use auximpute::simgen::{generate_population, PopulationConfig};

fn main() -> auximpute::Result<()> {
    let cfg = PopulationConfig::survey_like(5000, 1);
    let analysis = ModelFormula::new("y", &["x1", "x2", "x3", "x4", "x5", "x6", "x7"]);

    // anchor: the intercept in a large complete sample
    let mut big = cfg.clone();
    big.n = 400_000;
    let (pilot, _) = generate_population(&big, &mut Stream::root(99).rng())?;
    let anchor = ld_estimate(&pilot, &analysis, Method::Logistic)?
        .term("intercept")
        .unwrap()
        .point;

    let spec = MissingnessSpec::mar("x1", 0.30, &[("y", 2.0)]);
    let imputation = ImputationSpec::new(
        vec![VariableModel {
            variable: "x1".into(),
            method: Method::Linear,
            predictors: vec![
                "x2".into(), "x3".into(), "x4".into(), "x5".into(), "x6".into(),
                "x7".into(), "y".into(), "z_strong".into(),
            ],
        }],
        20,
        5,
    );

    let reps = 30;
    let (mut ld_sum, mut mi_sum) = (0.0, 0.0);
    for r in 0..reps {
        let stream = Stream::root(4).child(r);
        let (data, _) = generate_population(&cfg, &mut stream.child(0).rng())?;
        let amputed = ampute(&data, &spec, &mut stream.child(1).rng())?;
        ld_sum += ld_estimate(&amputed, &analysis, Method::Logistic)?
            .term("intercept")
            .unwrap()
            .point;
        let completed = impute(&amputed, &imputation, stream.child(2))?;
        mi_sum += pool_rubin(&mi_estimates(&completed, &analysis, Method::Logistic)?)?
            .term("intercept")
            .unwrap()
            .q_bar;
    }

    println!("intercept anchor (large complete sample): {:+.4}", anchor);
    println!(
        "mean LD intercept over {reps} replications: {:+.4} (bias {:+.4})",
        ld_sum / reps as f64,
        ld_sum / reps as f64 - anchor
    );
    println!(
        "mean MI intercept over {reps} replications: {:+.4} (bias {:+.4})",
        mi_sum / reps as f64,
        mi_sum / reps as f64 - anchor
    );
    Ok(())
}
