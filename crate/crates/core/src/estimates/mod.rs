//! Random-instance verification of the functional inequalities, the Yosida
//! growth rate and the moment scaling of the stochastic integral.

pub mod moments;
pub mod oracle;
pub mod suite;
pub mod yosida;

pub use moments::{verify_stochastic_moment_bound, MomentBoundReport, MomentBoundRow};
pub use oracle::brute_force_b_oracle;
pub use suite::{
    calibrate_gn_constant, run_inequality_suite, suite_band, EstimateReport, InequalityId,
    SuiteParams,
};
pub use yosida::{analytic_yosida_sup, fit_slope, verify_yosida_growth, YosidaGrowthReport, YosidaGrowthRow};
