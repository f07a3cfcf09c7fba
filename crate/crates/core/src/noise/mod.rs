//! Rough multiplicative noise: basis, covariance, γ-norms and Wiener increments.

pub mod basis;
pub mod covariance;
pub mod spec;
pub mod wiener;

pub use basis::{basis_field, BasisMode, NoiseBasis, Parity};
pub use covariance::{rough_regime_certificate, NoiseModel, RoughRegimeCertificate};
pub use spec::{NoiseFlavor, NoiseSpec};
pub use wiener::{fill_increments, path_seed, sample_wiener, IncrementSource, WienerPath};
