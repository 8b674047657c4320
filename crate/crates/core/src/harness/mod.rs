//! Experiment harness: configs and presets, seeded multi-trial comparisons,
//! aggregation with confidence intervals, CSV/SVG reports, and the invariant
//! verification battery.

mod config;
mod experiment;
mod presets;
mod report;
mod summary;
pub mod verify;

pub use config::ExperimentConfig;
pub use experiment::{
    run_experiment, run_experiment_trace, run_single_trial, sweep_filters, ExperimentResult,
    SweepRow, SweepTable,
};
pub use presets::{preset, preset_names};
pub use report::{emit_csv, emit_summary, emit_svg, emit_sweep_csv, write_trial_rows, TRIAL_CSV_HEADER};
pub use summary::{log_grid, median, PredictorSummary, SummaryRow, SummaryTable};
