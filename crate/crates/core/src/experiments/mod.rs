//! Ensemble experiments on coupled trajectories.

pub mod convergence;
pub mod tightness;
pub mod uniqueness;

pub use convergence::{
    run_convergence_in_n, ConvergencePath, ConvergenceStudy, DistanceRow, StatisticRow, STATISTICS,
};
pub use tightness::{run_tightness_tables, tail_spread, tail_table, TailRow, MIN_TAIL_PATHS};
pub use uniqueness::{
    perturbation_field, resolve_c_bar, run_uniqueness_experiment, summarize_uniqueness, terminal_norms,
    weighted_mean_nonincreasing, UniquenessRecord, UniquenessRun, UniquenessSummaryRow,
    C_BAR_CALIBRATION_SAMPLES,
};
