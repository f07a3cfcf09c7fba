//! Torus grids, spectral vector fields, Fourier multipliers and norms.

pub mod bilinear;
pub mod field;
pub mod fourier;
pub mod grid;
pub mod norms;
pub mod operators;

pub use bilinear::bilinear_b;
pub use field::{Band, RandomFieldSpec, SpectralField};
pub use fourier::{with_workspace, FourierWorkspace};
pub use grid::{GridSpec, TorusGrid, MAX_N_3D};
pub use norms::{
    gradient_norm_sq, hs_norm, hs_norm_sq, l4_norm, lp_norm_grid, sobolev_norm,
    sobolev_norm_quadrature, NormEvaluator, NormSpec,
};
pub use operators::{
    bessel_potential, discrete_multiplier_sup, duality_pairing, l2_inner, leray_project,
    leray_project_in_place, sobolev_inner, stokes_semigroup,
    yosida_smoother, YosidaLevel,
};
