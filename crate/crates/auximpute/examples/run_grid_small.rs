//! Run a small simulation grid through the harness and print the markdown
//! report.
//!
//! Run with: cargo run --release --example run_grid_small

use auximpute::harness::{render_markdown, run_grid, Estimator, HarnessConfig};

fn main() -> auximpute::Result<()> {
    let mut cfg = HarnessConfig::desk_default(12);
    // shrink the desk-scale defaults so the example finishes in seconds
    cfg.population.n = 1000;
    cfg.replication.replications = 20;
    cfg.replication.m = 5;
    cfg.replication.iterations = 2;
    cfg.replication.pilot_n = 100_000;
    cfg.replication.resample_population = true;
    cfg.grid.rates = vec![0.30];
    cfg.grid.estimators = vec![
        Estimator::Ld,
        Estimator::Mi { tier: None },
        Estimator::Mi { tier: Some("strong".into()) },
        Estimator::Complete,
    ];

    let outcome = run_grid(&cfg)?;
    print!("{}", render_markdown(&outcome));
    Ok(())
}
