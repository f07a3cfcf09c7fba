//! Time integration of the Yosida-regularized equation by the `v = u + z`
//! splitting, with energy diagnostics and the uniqueness weight.

pub mod energy;
pub mod psi;
pub mod stepper;
pub mod trajectory;

pub use energy::{energy_constant, DiagnosticsRow, EnergySummary, EnergyTracker};
pub use psi::{psi_from_norms, psi_weight, young_c_bar};
pub use stepper::{ou_step, step_u, step_v_direct, Scheme, Simulation, StepEnergy};
pub use trajectory::{
    energy_report, resolve_energy_constant, simulate, simulate_with, EnergyReport, RunOptions,
    TrajectorySample, GN_CALIBRATION_SAMPLES,
};
