//! Seeded Monte Carlo engine: draws channels and links per trial, runs the
//! configured estimators and aggregates RMSE statistics.

mod config;
mod metrics;
mod runner;

pub use config::{EstimatorKind, ExperimentConfig, H3Knowledge, Preset};
pub use metrics::{empirical_cdf, median, trial_rmse, EmpiricalCdf, Metric};
pub use runner::{
    draw_trial, run_experiment, run_experiment_with_threads, run_trial, trial_stream, CdfTable,
    EstimatorOutcome, ExperimentResult, SummaryRow, TrialDraw, TrialResult, FAILURE_GATE,
};
