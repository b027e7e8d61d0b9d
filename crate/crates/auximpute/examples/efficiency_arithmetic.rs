//! Efficiency arithmetic on standard errors: SE differences, equivalent
//! sample-size changes, analytic MCAR bounds, and significance markers.
//!
//! Run with: cargo run --example efficiency_arithmetic

use auximpute::harness::{analytic_mcar_bounds, efficiency_metrics, significance_stars};

fn main() -> auximpute::Result<()> {
    println!("method SE vs reference SE:");
    for (method, reference) in [(0.0209, 0.0239), (0.0200, 0.0239), (0.0226, 0.0224)] {
        let row = efficiency_metrics(method, reference)?;
        println!(
            "  {method:.4} vs {reference:.4}: SE {:+}%  equivalent n {:+}%",
            row.se_diff_pct(),
            row.equiv_n_change_pct()
        );
    }

    println!("\nanalytic complete-vs-LD bounds under MCAR:");
    for rate in [0.10, 0.20, 0.30] {
        let (se_red, n_change) = analytic_mcar_bounds(rate)?;
        println!(
            "  rate {rate:.0$}: SE reduction {1:.1}%, sample-size change {2:.1}%",
            2,
            se_red * 100.0,
            n_change * 100.0
        );
    }

    println!("\nsignificance markers as the SE shrinks at a fixed coefficient:");
    for se in [2.66, 2.06] {
        let stars = significance_stars(-4.8, se, f64::INFINITY)?;
        println!("  point -4.80, se {se:.2}: {:?}", stars);
    }
    Ok(())
}
