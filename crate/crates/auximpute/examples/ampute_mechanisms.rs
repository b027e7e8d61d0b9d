//! Delete values under MCAR and MAR mechanisms and inspect what each does.
//!
//! Run with: cargo run --release --example ampute_mechanisms

use auximpute::missingness::{ampute, MissingnessSpec};
use auximpute::rng::Stream;
use auximpute::simgen::{generate_population, PopulationConfig};

fn main() -> auximpute::Result<()> {
    let cfg = PopulationConfig::survey_like(10_000, 3);
    let (data, _) = generate_population(&cfg, &mut Stream::root(cfg.seed).rng())?;

    // MCAR: an exact 30% of x1 cells, chosen uniformly
    let mcar = MissingnessSpec::mcar("x1", 0.30);
    let out = ampute(&data, &mcar, &mut Stream::root(10).rng())?;
    println!(
        "MCAR: realized missing fraction = {:.4} (exact count {})",
        out.missing_fraction("x1")?,
        out.column("x1")?.n_missing()
    );

    // MAR scored on y: deletion probability rises with the response
    let mar = MissingnessSpec::mar("x1", 0.30, &[("y", 2.0)]);
    let out = ampute(&data, &mar, &mut Stream::root(11).rng())?;
    let x1 = out.column("x1")?;
    let y = out.column("y")?;
    let mean_y = |rows: &[usize]| {
        rows.iter().map(|&i| y.value(i).unwrap()).sum::<f64>() / rows.len() as f64
    };
    println!(
        "MAR on y: realized fraction = {:.4}; mean y deleted = {:.3}, retained = {:.3}",
        out.missing_fraction("x1")?,
        mean_y(&x1.missing_rows()),
        mean_y(&x1.observed_rows()),
    );
    Ok(())
}
