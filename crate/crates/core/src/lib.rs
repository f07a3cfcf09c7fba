//! Pseudospectral solver for the stochastic Navier–Stokes equations on the
//! periodic box, driven by rough multiplicative noise, together with the
//! numerical checks of the estimates that control it.

pub mod config;
pub mod error;
pub mod estimates;
pub mod experiments;
pub mod io;
pub mod meta;
pub mod noise;
pub mod nse;
pub mod ou;
pub mod spectral;
pub mod stats;

pub use error::{Result, SnsError};
