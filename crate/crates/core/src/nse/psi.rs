//! Weight of the uniqueness functional `e^{-∫ψ} ‖v₁ - v₂‖²_{H^{-g}}`.

use crate::spectral::{hs_norm, SpectralField};

/// `ψ = 1 + L_g² + 2C̄ (‖v₁‖^{4/(1-g)}_{H^{(1-g)/2}} + ‖v₂‖^{4/(1-g)}_{H^{(1-g)/2}})`.
pub fn psi_weight(v1: &SpectralField, v2: &SpectralField, l_g: f64, c_bar: f64, g: f64) -> f64 {
    let s = 0.5 * (1.0 - g);
    psi_from_norms(hs_norm(v1, s), hs_norm(v2, s), l_g, c_bar, g)
}

/// `ψ` from precomputed `‖v_i‖_{H^{(1-g)/2}}`.
pub fn psi_from_norms(n1: f64, n2: f64, l_g: f64, c_bar: f64, g: f64) -> f64 {
    let e = 4.0 / (1.0 - g);
    1.0 + l_g * l_g + 2.0 * c_bar * (n1.powf(e) + n2.powf(e))
}

/// `C̄` from the trilinear constant `C` in
/// `|⟨J^{-g}B(V,w), J^{-g}V⟩| ≤ C ‖V‖^{(1-g)/2}_{H^{-g}} ‖V‖^{(3+g)/2}_{H^{1-g}} ‖w‖_{H^{(1-g)/2}}`,
/// after Young with exponents `4/(3+g)`, `4/(1-g)` and weight `1/4` on
/// `‖V‖²_{H^{1-g}}`.
pub fn young_c_bar(c: f64, g: f64) -> f64 {
    let p = 4.0 / (3.0 + g);
    let q = 4.0 / (1.0 - g);
    c.powf(q) * (p / 4.0).powf(-q / p) / q
}
