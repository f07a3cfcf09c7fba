//! Energy inequality for the `u` part and its Gronwall majorant.

use serde::{Deserialize, Serialize};

use super::stepper::StepEnergy;
use crate::spectral::{gradient_norm_sq, hs_norm_sq, l4_norm, SpectralField};

/// One row of `diagnostics.csv`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    #[serde(rename = "E_u")]
    pub e_u: f64,
    #[serde(rename = "D_u")]
    pub d_u: f64,
    #[serde(rename = "z_L4")]
    pub z_l4: f64,
    pub phi: f64,
    pub psi: f64,
    pub gronwall_majorant: f64,
}

/// Constant `C` for which
/// `d/dt‖u‖² + ν‖∇u‖² ≤ (ν/2 + 2C‖z‖_{L⁴}^{8/(4-d)})‖u‖² + 2C(‖z‖⁴_{L⁴} + ‖f‖²_{H^{-1}})`
/// follows from the Gagliardo–Nirenberg bound `‖w‖_{L⁴} ≤ c_gn ‖w‖^{1-d/4} ‖∇w‖^{d/4}`.
///
/// The cubic term is split by Young with weight `ν/8` on `‖∇u‖²`; the
/// quadratic `z` term and the forcing give the `2/ν` floor.
pub fn energy_constant(dim: usize, nu: f64, c_gn: f64) -> f64 {
    let d = dim as f64;
    let q = 8.0 / (4.0 - d);
    let p = 8.0 / (4.0 + d);
    let eps = (p * nu / 8.0).powf(1.0 / p);
    let young = c_gn.powf(q) * eps.powf(-q) / q;
    young.max(2.0 / nu)
}

/// Running Gronwall bookkeeping.
#[derive(Clone, Debug)]
pub struct EnergyTracker {
    c: f64,
    nu: f64,
    exponent: f64,
    last: Option<DiagnosticsRow>,
    /// `ν ∫‖∇u‖²`.
    pub dissipation_lhs: f64,
    /// `‖v₀‖² + ∫(φ‖u‖² + ψ)`.
    pub dissipation_rhs: f64,
    pub max_residual: f64,
    pub violations: usize,
    pub sup_energy: f64,
}

impl EnergyTracker {
    pub fn new(c: f64, nu: f64, dim: usize) -> Self {
        Self {
            c,
            nu,
            exponent: 8.0 / (4.0 - dim as f64),
            last: None,
            dissipation_lhs: 0.0,
            dissipation_rhs: 0.0,
            max_residual: 0.0,
            violations: 0,
            sup_energy: 0.0,
        }
    }

    pub fn constant(&self) -> f64 {
        self.c
    }

    /// Folds in one completed step (φ, ψ frozen at the step's left end).
    pub fn step(&mut self, e: &StepEnergy) {
        if let Some(prev) = self.last {
            self.dissipation_lhs += self.nu * e.dissipation;
            self.dissipation_rhs += prev.phi * e.energy_integral;
        }
        self.max_residual = self.max_residual.max(e.residual.abs());
    }

    /// Records the state at time `t` and extends the majorant from the
    /// previous record.
    pub fn observe(&mut self, t: f64, u: &SpectralField, z: &SpectralField, f: Option<&SpectralField>) -> DiagnosticsRow {
        let e_u = u.energy();
        let z_l4 = if z.coeff_norm() == 0.0 { 0.0 } else { l4_norm(z) };
        let f_sq = f.map(|f| hs_norm_sq(f, -1.0)).unwrap_or(0.0);
        let phi = 0.5 * self.nu + 2.0 * self.c * z_l4.powf(self.exponent);
        let psi = 2.0 * self.c * (z_l4.powi(4) + f_sq);
        let majorant = match self.last {
            None => {
                self.dissipation_rhs += e_u;
                e_u
            }
            Some(prev) => {
                let h = t - prev.t;
                self.dissipation_rhs += prev.psi * h;
                let x = prev.phi * h;
                // ψ (e^{φh} - 1) / φ
                let growth = if x.abs() < 1e-12 { h } else { x.exp_m1() / prev.phi };
                prev.gronwall_majorant * x.exp() + prev.psi * growth
            }
        };
        self.sup_energy = self.sup_energy.max(e_u);
        if e_u > majorant * (1.0 + 1e-12) {
            self.violations += 1;
        }
        let row = DiagnosticsRow {
            t,
            e_u,
            d_u: gradient_norm_sq(u),
            z_l4,
            phi,
            psi,
            gronwall_majorant: majorant,
        };
        self.last = Some(row);
        row
    }

    pub fn summary(&self) -> EnergySummary {
        EnergySummary {
            energy_constant: self.c,
            max_residual: self.max_residual,
            sup_energy: self.sup_energy,
            final_majorant: self.last.map(|r| r.gronwall_majorant).unwrap_or(0.0),
            majorant_violations: self.violations,
            dissipation_lhs: self.dissipation_lhs,
            dissipation_rhs: self.dissipation_rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergySummary {
    pub energy_constant: f64,
    /// Largest `|‖u₊‖² - ‖u‖² + 2ν∫‖∇u‖² - 2∫⟨F,u⟩|` over the steps.
    pub max_residual: f64,
    pub sup_energy: f64,
    pub final_majorant: f64,
    /// Records where `‖u‖²` exceeded the majorant.
    pub majorant_violations: usize,
    pub dissipation_lhs: f64,
    pub dissipation_rhs: f64,
}

impl EnergySummary {
    pub fn majorant_holds(&self) -> bool {
        self.majorant_violations == 0
    }

    pub fn dissipation_bound_holds(&self) -> bool {
        self.dissipation_lhs <= self.dissipation_rhs * (1.0 + 1e-12)
    }
}
