//! Replication engine: configuration, grid execution, efficiency metrics,
//! and report rendering.

pub mod config;
pub mod grid;
pub mod metrics;
pub mod report;

pub use config::{
    AnalysisConfig, Estimator, GridConfig, HarnessConfig, OutputConfig, ReplicationConfig,
    ReportFormat, SCHEMA_VERSION,
};
pub use grid::{pilot_estimand, run_cell, run_grid, CellId, CellResult, GridOutcome};
pub use metrics::{
    analytic_mcar_bounds, efficiency_metrics, significance_stars, two_sided_p, EfficiencyRow,
};
pub use report::{emit_report, render, render_csv, render_json, render_markdown};
