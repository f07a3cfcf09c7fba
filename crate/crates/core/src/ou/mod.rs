//! Stochastic convolution `z_n`: simulation, Hölder seminorms and moment studies.

pub mod holder;
pub mod study;

pub use holder::{
    dyadic_holder, embedded_distance, embedded_norm, holder_seminorm, BandEmbedding, OUTrajectory,
};
pub use study::{
    moment_rows, ou_moment_samples, ou_moment_study, ou_path_stats, simulate_ou, MomentRow,
    OuLevelSamples, OuPathStats, OuRun, STAT_GN, STAT_HOLDER, STAT_LM, STAT_SUP,
};
