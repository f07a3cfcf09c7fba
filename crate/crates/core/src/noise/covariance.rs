//! The diagonal multiplicative covariance `G(v) e_j = σ_j(v) e_j`, its
//! smoothed version `G_n = R_n G`, and γ-radonifying norms.

use num_complex::Complex64;

use super::basis::{NoiseBasis, Parity};
use super::spec::{NoiseFlavor, NoiseSpec};
use crate::error::{Result, SnsError};
use crate::spectral::{with_workspace, SpectralField, TorusGrid, YosidaLevel};

/// Validated noise parameters bound to a grid basis.
#[derive(Clone, Debug)]
pub struct NoiseModel {
    spec: NoiseSpec,
    basis: NoiseBasis,
    coeff: Vec<f64>,
    /// `(1 + |k_j|²)^{-g}`, the weights inside `σ_j`.
    weak: Vec<f64>,
}

impl NoiseModel {
    pub fn new(spec: &NoiseSpec, grid: &TorusGrid) -> Result<Self> {
        spec.validate()?;
        Self::build(spec, grid)
    }

    /// Skips the `g ∈ (0,1)` check; used for norm evaluations at arbitrary
    /// Sobolev indices.
    pub fn new_unchecked(spec: &NoiseSpec, grid: &TorusGrid) -> Result<Self> {
        Self::build(spec, grid)
    }

    fn build(spec: &NoiseSpec, grid: &TorusGrid) -> Result<Self> {
        let basis = NoiseBasis::new(grid, spec.modes)?;
        let coeff = basis.modes().iter().map(|m| spec.coefficient(m.ksq)).collect();
        let weak = basis.weights(-spec.g);
        Ok(Self {
            spec: spec.clone(),
            basis,
            coeff,
            weak,
        })
    }

    pub fn spec(&self) -> &NoiseSpec {
        &self.spec
    }

    pub fn basis(&self) -> &NoiseBasis {
        &self.basis
    }

    pub fn grid(&self) -> &TorusGrid {
        self.basis.grid()
    }

    /// Number of active modes `J`.
    pub fn modes(&self) -> usize {
        self.basis.len()
    }

    /// `a_j`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeff
    }

    /// `σ_j(v)` for every `j`.
    pub fn sigmas(&self, v: &SpectralField) -> Vec<f64> {
        match self.spec.flavor {
            NoiseFlavor::Additive => self.coeff.clone(),
            NoiseFlavor::LipschitzMultiplicative => self
                .basis
                .project_weighted(v, &self.weak)
                .iter()
                .zip(&self.coeff)
                .map(|(p, a)| a * 0.5 * (1.0 + p.tanh()))
                .collect(),
        }
    }

    pub fn sigma(&self, j: usize, v: &SpectralField) -> Result<f64> {
        self.basis.mode(j)?;
        Ok(self.sigmas(v)[j])
    }

    /// `r_n(k_j) = n / (n + |k_j|²)`.
    pub fn yosida_factors(&self, n: YosidaLevel) -> Vec<f64> {
        self.basis.modes().iter().map(|m| n.multiplier(m.ksq)).collect()
    }

    /// `Σ_j σ_j(v) y_j e_j`.
    pub fn apply_g(&self, v: &SpectralField, y: &[f64]) -> Result<SpectralField> {
        self.apply_gn(YosidaLevel::Infinite, v, y)
    }

    /// `R_n Σ_j σ_j(v) y_j e_j`.
    pub fn apply_gn(&self, n: YosidaLevel, v: &SpectralField, y: &[f64]) -> Result<SpectralField> {
        let n = n.validate()?;
        if y.len() != self.modes() {
            return Err(SnsError::LengthMismatch {
                expected: self.modes(),
                got: y.len(),
            });
        }
        let w: Vec<f64> = self
            .sigmas(v)
            .iter()
            .zip(y)
            .zip(self.basis.modes())
            .map(|((s, y), m)| s * y * n.multiplier(m.ksq))
            .collect();
        let mut out = SpectralField::zeros(self.grid());
        self.basis.accumulate(&mut out, &w);
        Ok(out)
    }

    /// `‖G(v)‖_{γ(Y; H^{s,p})}` for `p ∈ {2, 4}`.
    pub fn gamma_norm(&self, v: &SpectralField, s: f64, p: f64) -> Result<f64> {
        self.gamma_norm_n(YosidaLevel::Infinite, v, s, p)
    }

    /// `‖G_n(v)‖_{γ(Y; H^{s,p})}`.
    pub fn gamma_norm_n(&self, n: YosidaLevel, v: &SpectralField, s: f64, p: f64) -> Result<f64> {
        let n = n.validate()?;
        let w: Vec<f64> = self
            .sigmas(v)
            .iter()
            .zip(self.basis.modes())
            .map(|(s, m)| s * n.multiplier(m.ksq))
            .collect();
        self.gamma_norm_of(&w, s, p)
    }

    /// γ-norm of the diagonal operator `e_j ↦ w_j e_j` into `H^{s,p}`.
    pub fn gamma_norm_of(&self, w: &[f64], s: f64, p: f64) -> Result<f64> {
        if p == 2.0 {
            let sum: f64 = w
                .iter()
                .zip(self.basis.modes())
                .map(|(w, m)| w * w * (1.0 + m.ksq).powf(s))
                .sum();
            Ok(sum.sqrt())
        } else if p == 4.0 {
            Ok(self.square_function_l4(w, s))
        } else {
            Err(SnsError::UnsupportedGammaExponent(p))
        }
    }

    /// `‖(Σ_j w_j² |J^s e_j|²)^{1/2}‖_{L⁴}` by grid quadrature.
    ///
    /// `cos² θ = (1 + cos 2θ)/2` turns the square function into a
    /// trigonometric polynomial at wavenumbers `2 k_j`, which one inverse FFT
    /// evaluates exactly on the grid (aliasing is harmless at grid points).
    fn square_function_l4(&self, w: &[f64], s: f64) -> f64 {
        let grid = self.grid();
        let n = grid.n() as i32;
        let d = grid.dim();
        let c2 = self.basis.normalization().powi(2);
        let mut spectrum = vec![Complex64::new(0.0, 0.0); grid.size()];
        let mut mean = 0.0;
        let wrap = |k: &[i32; 3], sign: i32| -> usize {
            (0..d).fold(0usize, |acc, a| {
                acc * n as usize + (sign * 2 * k[a]).rem_euclid(n) as usize
            })
        };
        for (wj, m) in w.iter().zip(self.basis.modes()) {
            let a = wj * wj * (1.0 + m.ksq).powf(s) * c2;
            mean += 0.5 * a;
            let osc = match m.parity {
                Parity::Cos => 0.25 * a,
                Parity::Sin => -0.25 * a,
            };
            spectrum[wrap(&m.k, 1)] += osc;
            spectrum[wrap(&m.k, -1)] += osc;
        }
        with_workspace(grid, |ws| ws.inverse(&mut spectrum));
        let sum4: f64 = spectrum
            .iter()
            .map(|c| {
                let sq = c.re + mean;
                sq * sq
            })
            .sum();
        (sum4 * grid.cell_volume()).powf(0.25)
    }

    /// `L_g = ((1/4) Σ_j a_j² (1 + |k_j|²)^{-2g})^{1/2}`; zero for additive noise.
    pub fn lipschitz_constant(&self) -> f64 {
        match self.spec.flavor {
            NoiseFlavor::Additive => 0.0,
            NoiseFlavor::LipschitzMultiplicative => {
                let g = self.spec.g;
                let sum: f64 = self
                    .coeff
                    .iter()
                    .zip(self.basis.modes())
                    .map(|(a, m)| a * a * (1.0 + m.ksq).powf(-2.0 * g))
                    .sum();
                (0.25 * sum).sqrt()
            }
        }
    }

    /// `‖G(v₁) - G(v₂)‖_{γ(Y;H^{-g})} / ‖v₁ - v₂‖_{H^{-g}}`.
    pub fn lipschitz_ratio(&self, v1: &SpectralField, v2: &SpectralField) -> f64 {
        let g = self.spec.g;
        let s1 = self.sigmas(v1);
        let s2 = self.sigmas(v2);
        let diff: Vec<f64> = s1.iter().zip(&s2).map(|(a, b)| a - b).collect();
        let num = self.gamma_norm_of(&diff, -g, 2.0).unwrap_or(f64::NAN);
        let den = crate::spectral::hs_norm(&(v1 - v2), -g);
        num / den
    }
}

/// Partial sums of the plain and the `J^{-g}`-weighted covariance traces at
/// two truncation levels.
#[derive(Clone, Debug, PartialEq)]
pub struct RoughRegimeCertificate {
    pub small_modes: usize,
    pub large_modes: usize,
    /// `Σ_{j ≤ J} a_j²`.
    pub trace_small: f64,
    pub trace_large: f64,
    /// `‖G‖_{γ(Y;H^{-g})}` at `v = 0`.
    pub gamma_small: f64,
    pub gamma_large: f64,
}

impl RoughRegimeCertificate {
    pub fn trace_growth(&self) -> f64 {
        self.trace_large / self.trace_small - 1.0
    }

    pub fn gamma_change(&self) -> f64 {
        (self.gamma_large - self.gamma_small).abs() / self.gamma_small
    }
}

/// Evaluates both truncations on the smallest grid (in steps of 2x) whose
/// dealiasing band holds `large_modes` basis functions.
pub fn rough_regime_certificate(
    spec: &NoiseSpec,
    dim: usize,
    small_modes: usize,
    large_modes: usize,
) -> Result<RoughRegimeCertificate> {
    let mut n = 8;
    let grid = loop {
        let grid = TorusGrid::new(dim, n)?;
        if NoiseBasis::capacity(&grid) >= large_modes {
            break grid;
        }
        n *= 2;
    };
    let zero = SpectralField::zeros(&grid);
    let eval = |modes: usize| -> Result<(f64, f64)> {
        let model = NoiseModel::new(&spec.clone().with_modes(modes), &grid)?;
        let trace = model.coefficients().iter().map(|a| a * a).sum();
        Ok((trace, model.gamma_norm(&zero, -spec.g, 2.0)?))
    };
    let (trace_small, gamma_small) = eval(small_modes)?;
    let (trace_large, gamma_large) = eval(large_modes)?;
    Ok(RoughRegimeCertificate {
        small_modes,
        large_modes,
        trace_small,
        trace_large,
        gamma_small,
        gamma_large,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{hs_norm, lp_norm_grid, yosida_smoother, RandomFieldSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(flavor: NoiseFlavor, alpha: f64, modes: Option<usize>) -> NoiseModel {
        let g = TorusGrid::new(2, 16).unwrap();
        let mut spec = NoiseSpec::new(0.5, alpha, flavor);
        spec.modes = modes;
        NoiseModel::new(&spec, &g).unwrap()
    }

    #[test]
    fn sigma_examples() {
        let m = model(NoiseFlavor::LipschitzMultiplicative, 0.75, Some(6));
        let zero = SpectralField::zeros(m.grid());
        for j in 0..6 {
            assert!((m.sigma(j, &zero).unwrap() - 0.5 * m.coefficients()[j]).abs() < 1e-15);
        }
        let a = model(NoiseFlavor::Additive, 1.0, Some(1));
        assert!((a.sigma(0, &zero).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(a.sigma(3, &zero).is_err());
    }

    #[test]
    fn apply_g_cases() {
        let m = model(NoiseFlavor::LipschitzMultiplicative, 0.75, Some(10));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v = SpectralField::random_solenoidal(m.grid(), &mut rng, &RandomFieldSpec::default());
        let mut y = vec![0.0; 10];
        y[3] = 1.0;
        let got = m.apply_g(&v, &y).unwrap();
        let want = &m.basis().field(3).unwrap() * m.sigma(3, &v).unwrap();
        assert!((&got - &want).coeff_norm() < 1e-15);
        assert_eq!(m.apply_g(&v, &[0.0; 10]).unwrap().coeff_norm(), 0.0);
        assert!(matches!(m.apply_g(&v, &[1.0; 3]), Err(SnsError::LengthMismatch { .. })));
        let y: Vec<f64> = (0..10).map(|j| (j as f64).cos()).collect();
        let bound = m.coefficients().iter().cloned().fold(0.0, f64::max)
            * y.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(m.apply_g(&v, &y).unwrap().energy().sqrt() <= bound);
        let gn = m.apply_gn(YosidaLevel::Finite(3), &v, &y).unwrap();
        let direct = yosida_smoother(&m.apply_g(&v, &y).unwrap(), YosidaLevel::Finite(3)).unwrap();
        assert!((&gn - &direct).coeff_norm() < 1e-15);
    }

    #[test]
    fn gamma_norm_four_unit_modes() {
        let g = TorusGrid::new(2, 16).unwrap();
        let spec = NoiseSpec::new(0.5, 0.0, NoiseFlavor::Additive).with_modes(4);
        let m = NoiseModel::new(&spec, &g).unwrap();
        let zero = SpectralField::zeros(&g);
        assert!((m.gamma_norm(&zero, -1.0, 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        let one = NoiseModel::new(&spec.clone().with_modes(1), &g).unwrap();
        assert!((one.gamma_norm(&zero, 0.0, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            m.gamma_norm(&zero, 0.0, 3.0),
            Err(SnsError::UnsupportedGammaExponent(_))
        ));
    }

    #[test]
    fn square_function_matches_direct_quadrature() {
        let m = model(NoiseFlavor::LipschitzMultiplicative, 0.75, Some(40));
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let v = SpectralField::random_solenoidal(m.grid(), &mut rng, &RandomFieldSpec::default());
        let sig = m.sigmas(&v);
        let s = -0.5;
        let grid = m.grid();
        let mut sq = vec![0.0; grid.size()];
        for (j, sj) in sig.iter().enumerate() {
            let e = crate::spectral::bessel_potential(&m.basis().field(j).unwrap(), s);
            for vals in e.to_physical().iter() {
                for (x, val) in vals.iter().enumerate() {
                    sq[x] += sj * sj * val * val;
                }
            }
        }
        let root: Vec<f64> = sq.iter().map(|x| x.sqrt()).collect();
        let oracle = lp_norm_grid(grid, &[root], 4.0);
        let got = m.gamma_norm(&v, s, 4.0).unwrap();
        assert!((got - oracle).abs() <= 1e-12 * oracle);
    }

    #[test]
    fn smoothing_dominated_and_convergent() {
        let m = model(NoiseFlavor::LipschitzMultiplicative, 0.75, None);
        let zero = SpectralField::zeros(m.grid());
        for p in [2.0, 4.0] {
            let full = m.gamma_norm(&zero, -0.5, p).unwrap();
            let mut last = f64::INFINITY;
            for n in [1, 4, 16, 64, 256] {
                let gn = m.gamma_norm_n(YosidaLevel::Finite(n), &zero, -0.5, p).unwrap();
                assert!(gn <= full * (1.0 + 1e-12));
                let w: Vec<f64> = m
                    .sigmas(&zero)
                    .iter()
                    .zip(m.yosida_factors(YosidaLevel::Finite(n)))
                    .map(|(s, r)| s * (1.0 - r))
                    .collect();
                let gap = m.gamma_norm_of(&w, -0.5, 2.0).unwrap();
                assert!(gap < last);
                last = gap;
            }
        }
    }

    #[test]
    fn lipschitz_constant_examples() {
        let g = TorusGrid::new(2, 16).unwrap();
        let mut one = NoiseSpec::new(0.5, 0.0, NoiseFlavor::LipschitzMultiplicative).with_modes(1);
        let m = NoiseModel::new(&one, &g).unwrap();
        assert!((m.lipschitz_constant() - 2f64.powf(-1.5)).abs() < 1e-15);
        one.flavor = NoiseFlavor::Additive;
        assert_eq!(NoiseModel::new(&one, &g).unwrap().lipschitz_constant(), 0.0);
    }

    #[test]
    fn sampled_lipschitz_ratios_below_bound() {
        let m = model(NoiseFlavor::LipschitzMultiplicative, 0.75, Some(64));
        let lg = m.lipschitz_constant();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..300 {
            let spec = RandomFieldSpec {
                slope: -3.0,
                ..Default::default()
            };
            let v1 = &SpectralField::random_solenoidal(m.grid(), &mut rng, &spec) * 5.0;
            let v2 = &SpectralField::random_solenoidal(m.grid(), &mut rng, &spec) * 5.0;
            assert!(m.lipschitz_ratio(&v1, &v2) <= lg * (1.0 + 1e-9));
            for j in 0..4 {
                let e = m.basis().field(j).unwrap();
                let d = (m.sigma(j, &v1).unwrap() - m.sigma(j, &v2).unwrap()).abs();
                let bound = 0.5 * m.coefficients()[j] * hs_norm(&e, -0.5) * hs_norm(&(&v1 - &v2), -0.5);
                assert!(d <= bound * (1.0 + 1e-12));
            }
        }
    }
}
