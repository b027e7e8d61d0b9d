//! Multiple imputation with auxiliary variables, plus a Monte Carlo harness
//! for measuring the efficiency they buy.
//!
//! The crate is organized bottom-up:
//!
//! - [`data`]: typed columns, datasets, model formulas, CSV I/O
//! - [`rng`]: deterministic substream derivation for reproducible parallel runs
//! - [`regress`]: linear, logistic, and proportional-odds engines with
//!   posterior parameter draws
//! - [`missingness`]: MCAR and MAR amputation
//! - [`mice`]: chained-equations imputation
//! - [`pooling`]: Rubin's rules
//! - [`simgen`]: synthetic populations with calibrated auxiliary strength
//! - [`harness`]: simulation grid, efficiency metrics, and reports
//!
//! See the `examples/` directory for runnable walkthroughs of each layer.

pub mod data;
pub mod error;
pub mod harness;
pub mod mice;
pub mod missingness;
pub mod pooling;
pub mod regress;
pub mod rng;
pub mod simgen;

pub use error::{Error, Result};
