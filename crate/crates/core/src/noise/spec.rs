use serde::{Deserialize, Serialize};

use crate::error::{Result, SnsError};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseFlavor {
    /// `σ_j = a_j`.
    Additive,
    /// `σ_j(v) = a_j (1 + tanh⟨J^{-g} v, J^{-g} e_j⟩) / 2`.
    #[default]
    LipschitzMultiplicative,
}

/// Noise section of a run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// Roughness: the covariance is summable only after `J^{-g}`.
    pub g: f64,
    /// Decay exponent of `a_j = (1 + |k_j|²)^{-alpha/2}`.
    pub alpha: f64,
    /// Number of active basis modes; `None` uses the whole dealiasing band.
    #[serde(rename = "J", default)]
    pub modes: Option<usize>,
    #[serde(default)]
    pub flavor: NoiseFlavor,
    #[serde(default)]
    pub seed: u64,
    /// Overall factor on every `a_j` (0 switches the noise off).
    #[serde(default = "unit")]
    pub amplitude: f64,
}

fn unit() -> f64 {
    1.0
}

impl NoiseSpec {
    pub fn new(g: f64, alpha: f64, flavor: NoiseFlavor) -> Self {
        Self {
            g,
            alpha,
            modes: None,
            flavor,
            seed: 0,
            amplitude: 1.0,
        }
    }

    pub fn with_modes(mut self, modes: usize) -> Self {
        self.modes = Some(modes);
        self
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g > 0.0 && self.g < 1.0) {
            return Err(SnsError::InvalidConfig(format!(
                "noise roughness g must lie in (0, 1), got {}",
                self.g
            )));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(SnsError::InvalidConfig(format!(
                "noise decay alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(SnsError::InvalidConfig(format!(
                "noise amplitude must be >= 0, got {}",
                self.amplitude
            )));
        }
        if self.modes == Some(0) {
            return Err(SnsError::InvalidConfig("noise needs at least one mode".into()));
        }
        Ok(())
    }

    /// `a_j` for a mode with physical `|k|²`.
    pub fn coefficient(&self, ksq: f64) -> f64 {
        self.amplitude * (1.0 + ksq).powf(-0.5 * self.alpha)
    }

    /// The `J^{-g}`-weighted covariance is summable over the full lattice.
    pub fn gamma_summable(&self, dim: usize) -> bool {
        self.alpha + self.g > 0.5 * dim as f64
    }

    /// The unweighted covariance is not trace class in `H`.
    pub fn is_rough(&self, dim: usize) -> bool {
        self.alpha <= 0.5 * dim as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_roundtrip_and_defaults() {
        let s: NoiseSpec = serde_json::from_str(r#"{"g":0.5,"alpha":0.75,"J":12}"#).unwrap();
        assert_eq!(s.modes, Some(12));
        assert_eq!(s.flavor, NoiseFlavor::LipschitzMultiplicative);
        assert_eq!(s.amplitude, 1.0);
        let back: NoiseSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<NoiseSpec>(r#"{"g":0.5,"alpha":1,"bogus":1}"#).is_err());
    }

    #[test]
    fn validation_and_regimes() {
        assert!(NoiseSpec::new(1.0, 0.5, NoiseFlavor::Additive).validate().is_err());
        assert!(NoiseSpec::new(0.5, -0.1, NoiseFlavor::Additive).validate().is_err());
        let s = NoiseSpec::new(0.5, 0.75, NoiseFlavor::Additive);
        s.validate().unwrap();
        assert!(s.gamma_summable(2) && s.is_rough(2));
        assert!((NoiseSpec::new(0.5, 1.0, NoiseFlavor::Additive).coefficient(1.0) - 0.5f64.sqrt()).abs() < 1e-15);
    }
}
