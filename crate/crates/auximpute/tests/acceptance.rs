//! End-to-end acceptance checks. Each test prints an explicit PASS/FAIL line
//! so the suite doubles as a checklist when run with `--nocapture`.

use auximpute::data::ModelFormula;
use auximpute::harness::{
    analytic_mcar_bounds, efficiency_metrics, render_json, run_grid, significance_stars,
    Estimator, HarnessConfig,
};
use auximpute::mice::Method;
use auximpute::missingness::Mechanism;
use auximpute::pooling::{pool_rubin, Estimate, EstimateTerm};
use auximpute::regress::{fit_linear_xy, fit_logistic_xy, fit_ordinal_xy};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

fn report(name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {name}: {} {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{name}: {detail}");
}

/// One published table entry: SEs as printed (with their print precision)
/// plus the printed percent pair.
struct PublishedEntry {
    se_method: f64,
    se_ref: f64,
    /// Half of the last printed digit of each SE.
    half_ulp: f64,
    se_diff_pct: i64,
    equiv_n_pct: i64,
}

impl PublishedEntry {
    /// The printed percents were computed from unrounded SEs, so exact
    /// reproduction from the printed SEs is only required up to the half-ulp
    /// interval the printed SEs stand for.
    fn consistent(&self) -> bool {
        let (m, r, h) = (self.se_method, self.se_ref, self.half_ulp);
        let lo = efficiency_metrics(m - h, r + h).unwrap();
        let hi = efficiency_metrics(m + h, r - h).unwrap();
        let se_ok = self.se_diff_pct as f64 >= lo.se_diff * 100.0 - 0.5
            && self.se_diff_pct as f64 <= hi.se_diff * 100.0 + 0.5;
        // equiv-n is decreasing in the method SE, so its extremes swap
        let n_ok = self.equiv_n_pct as f64 >= hi.equiv_n_change * 100.0 - 0.5
            && self.equiv_n_pct as f64 <= lo.equiv_n_change * 100.0 + 0.5;
        se_ok && n_ok
    }
}

#[test]
fn published_table_arithmetic() {
    let e = |se_method, se_ref, half_ulp, se_diff_pct, equiv_n_pct| PublishedEntry {
        se_method,
        se_ref,
        half_ulp,
        se_diff_pct,
        equiv_n_pct,
    };
    let entries = [
        // 30% missing block, reference SE .0239
        e(0.0234, 0.0239, 0.00005, -2, 4),
        e(0.0229, 0.0239, 0.00005, -4, 9),
        e(0.0209, 0.0239, 0.00005, -13, 31),
        e(0.0200, 0.0239, 0.00005, -16, 43),
        // 20% missing block, reference SE .0224
        e(0.0226, 0.0224, 0.00005, 1, -2),
        e(0.0217, 0.0224, 0.00005, -3, 6),
        e(0.0207, 0.0224, 0.00005, -7, 17),
        e(0.0200, 0.0224, 0.00005, -11, 25),
        // 10% missing block, reference SE .0211
        e(0.0212, 0.0211, 0.00005, 1, -1),
        e(0.0207, 0.0211, 0.00005, -2, 4),
        e(0.0203, 0.0211, 0.00005, -4, 8),
        e(0.0200, 0.0211, 0.00005, -5, 11),
        // attainment-coefficient table, per-row references
        e(1.01, 1.02, 0.005, -1, 1),
        e(0.77, 1.02, 0.005, -24, 74),
        e(1.60, 1.60, 0.005, 0, 0),
        e(1.36, 1.60, 0.005, -15, 38),
        e(1.28, 1.29, 0.005, -1, 1),
        e(0.98, 1.29, 0.005, -24, 71),
        e(2.63, 2.66, 0.005, -1, 2),
        e(2.06, 2.66, 0.005, -22, 66),
        e(0.91, 0.92, 0.005, -1, 2),
        e(0.72, 0.92, 0.005, -21, 61),
    ];
    let failures: Vec<String> = entries
        .iter()
        .filter(|entry| !entry.consistent())
        .map(|entry| format!("({}, {})", entry.se_method, entry.se_ref))
        .collect();
    report(
        "published-table-arithmetic",
        failures.is_empty(),
        &format!("{} entries checked, inconsistent: {failures:?}", entries.len()),
    );

    // spot checks quoted with exact printed values
    let strong = efficiency_metrics(0.0209, 0.0239).unwrap();
    assert_eq!((strong.se_diff_pct(), strong.equiv_n_change_pct()), (-13, 31));
    let complete = efficiency_metrics(0.0200, 0.0239).unwrap();
    assert_eq!((complete.se_diff_pct(), complete.equiv_n_change_pct()), (-16, 43));
    let none = efficiency_metrics(0.0226, 0.0224).unwrap();
    assert_eq!((none.se_diff_pct(), none.equiv_n_change_pct()), (1, -2));
}

#[test]
fn analytic_mcar_bounds_match_quoted_identities() {
    let mut pass = true;
    let mut detail = String::new();
    for (rate, se_pct, n_pct) in [(0.10, 5, 11), (0.20, 11, 25), (0.30, 16, 43)] {
        let (se_red, n_change) = analytic_mcar_bounds(rate).unwrap();
        let ok = (se_red * 100.0).round() as i64 == se_pct
            && (n_change * 100.0).round() as i64 == n_pct;
        pass &= ok;
        detail.push_str(&format!(
            "rate {rate}: ({:.1}%, {:.1}%) ",
            se_red * 100.0,
            n_change * 100.0
        ));
    }
    // the two identities quoted in closed form
    let (se30, n30) = analytic_mcar_bounds(0.30).unwrap();
    pass &= (n30 - (1.0 / 0.7 - 1.0)).abs() < 1e-15;
    pass &= (se30 - (1.0 - 0.7_f64.sqrt())).abs() < 1e-15;
    report("analytic-mcar-bounds", pass, &detail);
}

fn structural_config(seed: u64) -> HarnessConfig {
    let mut cfg = HarnessConfig::desk_default(seed);
    cfg.replication.iterations = 2; // single incomplete variable: cycles past the first are inert
    cfg.replication.resample_population = true; // a fixed population gives the complete estimator zero spread
    cfg.grid.rates = vec![0.30];
    cfg
}

#[test]
fn mcar_structural_replication() {
    let cfg = structural_config(5);
    let outcome = run_grid(&cfg).unwrap();
    let sd = |est: &str| -> f64 {
        outcome
            .cells
            .iter()
            .find(|c| c.id.estimator == est)
            .unwrap()
            .est_sd
    };
    let (ld, none, moderate, strong, complete) =
        (sd("ld"), sd("mi"), sd("mi:moderate"), sd("mi:strong"), sd("complete"));

    let ordering = complete <= strong && strong <= moderate && moderate <= none;
    let strong_near_complete = strong / complete <= 1.10;
    let none_near_ld = (none / ld - 1.0).abs() <= 0.05;
    let bias_ok = outcome
        .cells
        .iter()
        .all(|c| c.bias.abs() < 3.0 * c.mcse());
    report(
        "mcar-structural-replication",
        ordering && strong_near_complete && none_near_ld && bias_ok,
        &format!(
            "SDs ld {ld:.4} none {none:.4} moderate {moderate:.4} strong {strong:.4} complete {complete:.4}; \
             ordering {ordering}, strong/complete {:.3}, none/ld {:.3}, bias_ok {bias_ok}",
            strong / complete,
            none / ld
        ),
    );

    // the imputation-model fit statistic should sit on the calibrated tiers
    let r2 = |est: &str| -> f64 {
        outcome
            .cells
            .iter()
            .find(|c| c.id.estimator == est)
            .unwrap()
            .mean_r2
            .unwrap()
    };
    // the response adds a little predictive power on top of the tier target
    assert!((r2("mi:moderate") - 0.45).abs() < 0.03, "moderate R² {}", r2("mi:moderate"));
    assert!((r2("mi:strong") - 0.62).abs() < 0.03, "strong R² {}", r2("mi:strong"));
}

fn selection_on_y_config(focal: &str) -> HarnessConfig {
    let mut cfg = HarnessConfig::desk_default(101);
    cfg.population.n = 5000;
    cfg.replication.replications = 200;
    cfg.replication.iterations = 2;
    cfg.replication.resample_population = true;
    cfg.grid.rates = vec![0.30];
    cfg.grid.mechanism = Mechanism::Mar {
        score: vec![("y".into(), 2.0)],
    };
    cfg.grid.estimators = vec![
        Estimator::Ld,
        Estimator::Mi {
            tier: Some("strong".into()),
        },
    ];
    cfg.grid.focal_term = focal.into();
    cfg
}

/// Deletion scored on the response selects the sample on y. For a logistic
/// analysis model that selection shifts the intercept but leaves the slopes
/// consistent (the case-control sampling invariance), so the bias shows up
/// in the intercept term.
#[test]
fn selection_on_y_biases_ld_intercept_not_mi() {
    let outcome = run_grid(&selection_on_y_config("intercept")).unwrap();
    let cell = |est: &str| outcome.cells.iter().find(|c| c.id.estimator == est).unwrap();
    let ld = cell("ld");
    let mi = cell("mi:strong");
    let ld_t = ld.bias.abs() / ld.mcse();
    let mi_t = mi.bias.abs() / mi.mcse();
    report(
        "selection-on-y-ld-bias (intercept)",
        ld_t > 3.0 && mi_t < 3.0,
        &format!("LD |bias|/mcse = {ld_t:.1}, MI strong |bias|/mcse = {mi_t:.1}"),
    );
}

/// The literal slope version of the selection-on-y property. It fails by
/// construction: when deletion depends only on y, complete cases are a
/// case-control sample and the logistic slope stays consistent, so LD slope
/// bias does NOT exceed 3 Monte Carlo SEs. Kept runnable (`--ignored`) as
/// documentation of the measurement; the intercept test above carries the
/// selection-bias property that actually holds.
#[test]
#[ignore = "selection on y leaves the logistic slope consistent; see the intercept test"]
fn selection_on_y_ld_slope_bias_as_stated() {
    let outcome = run_grid(&selection_on_y_config("x1")).unwrap();
    let cell = |est: &str| outcome.cells.iter().find(|c| c.id.estimator == est).unwrap();
    let ld = cell("ld");
    let mi = cell("mi:strong");
    let ld_t = ld.bias.abs() / ld.mcse();
    let mi_t = mi.bias.abs() / mi.mcse();
    report(
        "selection-on-y-ld-bias (slope, as stated)",
        ld_t > 3.0 && mi_t < 3.0,
        &format!("LD |bias|/mcse = {ld_t:.1}, MI strong |bias|/mcse = {mi_t:.1}"),
    );
}

#[test]
fn solver_oracles() {
    let mut rng = auximpute::rng::Stream::root(505).rng();

    // linear: 100 random designs against the normal equations
    let mut max_err = 0.0_f64;
    for _ in 0..100 {
        let n = 30 + (rng.gen::<f64>() * 40.0) as usize;
        let x = DMatrix::from_fn(n, 4, |_, j| if j == 0 { 1.0 } else { rng.gen::<f64>() * 2.0 - 1.0 });
        let y = DVector::from_fn(n, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let fit = fit_linear_xy(&x, &y, (0..4).map(|j| format!("c{j}")).collect()).unwrap();
        let oracle = (x.transpose() * &x)
            .lu()
            .solve(&(x.transpose() * &y))
            .unwrap();
        max_err = max_err.max((&fit.coef - oracle).amax());
    }
    let linear_ok = max_err < 1e-8;

    // logistic: gradient max-norm at the solution, and a 2-parameter grid oracle
    let n = 400;
    let x = DMatrix::from_fn(n, 2, |_, j| if j == 0 { 1.0 } else { rng.gen::<f64>() * 2.0 - 1.0 });
    let y = DVector::from_fn(n, |i, _| {
        let p = 1.0 / (1.0 + (-(0.4 + 1.2 * x[(i, 1)])).exp());
        if rng.gen::<f64>() < p {
            1.0
        } else {
            0.0
        }
    });
    let fit = fit_logistic_xy(&x, &y, vec!["b0".into(), "b1".into()]).unwrap();
    let mut grad = [0.0_f64; 2];
    for i in 0..n {
        let p = 1.0 / (1.0 + (-(fit.coef[0] + fit.coef[1] * x[(i, 1)])).exp());
        grad[0] += y[i] - p;
        grad[1] += (y[i] - p) * x[(i, 1)];
    }
    let grad_ok = grad[0].abs().max(grad[1].abs()) < 1e-6;

    let loglik = |b0: f64, b1: f64| -> f64 {
        (0..n)
            .map(|i| {
                let eta = b0 + b1 * x[(i, 1)];
                y[i] * eta - if eta > 0.0 { eta + (-eta).exp().ln_1p() } else { eta.exp().ln_1p() }
            })
            .sum()
    };
    // grid refinement around the MLE
    let (mut c0, mut c1, mut width) = (0.0, 0.0, 4.0);
    for _ in 0..24 {
        let mut best = (f64::NEG_INFINITY, c0, c1);
        for i in -4..=4 {
            for j in -4..=4 {
                let (b0, b1) = (c0 + i as f64 * width / 4.0, c1 + j as f64 * width / 4.0);
                let ll = loglik(b0, b1);
                if ll > best.0 {
                    best = (ll, b0, b1);
                }
            }
        }
        c0 = best.1;
        c1 = best.2;
        width /= 2.0;
    }
    let grid_ok = (fit.coef[0] - c0).abs() < 1e-4 && (fit.coef[1] - c1).abs() < 1e-4;

    // ordinal with two levels against the logistic fit
    let y_idx: Vec<usize> = (0..n).map(|i| y[i] as usize).collect();
    let x_pred = x.columns(1, 1).into_owned();
    let ord = fit_ordinal_xy(&x_pred, &y_idx, vec![0, 1], vec!["b1".into()]).unwrap();
    let ordinal_ok = (ord.coef[0] - fit.coef[1]).abs() < 1e-6
        && (ord.thresholds[0] + fit.coef[0]).abs() < 1e-6;

    // pooling hand case
    let estimates: Vec<Estimate> = [0.10, 0.12, 0.14]
        .iter()
        .map(|&q| Estimate {
            terms: vec![EstimateTerm {
                name: "slope".into(),
                point: q,
                variance: 0.0004,
            }],
            n_used: 100,
            model_kind: Method::Linear,
        })
        .collect();
    let pooled = pool_rubin(&estimates).unwrap();
    let term = &pooled.terms[0];
    let pool_ok = (term.q_bar - 0.12).abs() < 1e-9
        && (term.t - 0.00093333333333333333).abs() < 1e-9
        && (term.df - 6.125).abs() < 1e-9;

    report(
        "solver-oracles",
        linear_ok && grad_ok && grid_ok && ordinal_ok && pool_ok,
        &format!(
            "linear max err {max_err:.2e}; gradient ok {grad_ok}; grid ok {grid_ok}; \
             ordinal-vs-logistic ok {ordinal_ok}; pooling ok {pool_ok}"
        ),
    );
}

#[test]
fn deterministic_reports_across_thread_counts() {
    let mut cfg = HarnessConfig::desk_default(77);
    cfg.population.n = 500;
    cfg.replication.replications = 6;
    cfg.replication.m = 4;
    cfg.replication.iterations = 2;
    cfg.replication.pilot_n = 20_000;
    cfg.grid.rates = vec![0.30];

    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| run_grid(&cfg).unwrap());
    let parallel = rayon::ThreadPoolBuilder::new()
        .num_threads(8)
        .build()
        .unwrap()
        .install(|| run_grid(&cfg).unwrap());
    let a = render_json(&serial).unwrap();
    let b = render_json(&parallel).unwrap();
    report(
        "deterministic-reports",
        a == b,
        &format!("serial and 8-thread JSON reports identical ({} bytes)", a.len()),
    );
}

#[test]
fn significance_star_transitions() {
    let before = significance_stars(-4.68, 2.66, f64::INFINITY).unwrap();
    let after = significance_stars(-5.01, 2.06, f64::INFINITY).unwrap();
    report(
        "significance-star-transition",
        before == "\u{2020}" && after == "*",
        &format!("(-4.68, 2.66) -> {before:?}, (-5.01, 2.06) -> {after:?}"),
    );
}

/// The analysis model used by the default configs exposes the focal slope.
#[test]
fn default_config_is_well_formed() {
    let cfg = HarnessConfig::desk_default(1);
    cfg.validate().unwrap();
    let _ = ModelFormula::new(
        cfg.grid.analysis.response.clone(),
        &cfg.grid.analysis.predictors.iter().map(String::as_str).collect::<Vec<_>>(),
    );
}
