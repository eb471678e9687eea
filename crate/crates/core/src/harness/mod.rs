//! Experiment configuration, trajectory driving, studies and output.

mod audit;
mod config;
mod emit;
mod run;
mod study;

pub use audit::{audit, Audit, Check};
pub use config::{ExperimentConfig, Horizon, ResolvedConfig};
pub use emit::{
    emit, emit_sweep, read_summary_csv, write_series_csv, write_summary_csv, Format, SummaryRow,
    SERIES_HEADER, SUMMARY_HEADER,
};
pub use run::{initial_data, run_experiment, RunReport, RunStatus, SeriesRow, Trajectory};
pub use study::{collision_comparison, convergence_study, CollisionReport, ConvergenceRow, ConvergenceTable};
