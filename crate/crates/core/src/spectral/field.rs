use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::fourier::with_workspace;
use super::grid::TorusGrid;
use crate::error::{Result, SnsError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A real `d`-component vector field stored by its Fourier coefficients.
///
/// Coefficients are component-major; inside a component they follow the
/// grid's flat row-major index. The mean mode and the Nyquist modes are
/// always zero.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
    solenoidal: bool,
}

/// Which wavenumbers a random field may populate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Band {
    /// The grid's dealiasing band.
    Dealiased,
    /// `max_i |k_i| <= cutoff` (integer wavenumbers).
    Axis(usize),
    /// `|k| <= radius` (integer wavenumbers), intersected with the dealiasing band.
    Radius(f64),
}

/// Law of the random solenoidal fields used by tests and the inequality
/// suites: independent complex Gaussian coefficients with
/// `E|v̂(k)|² ∝ |k|^slope`, projected onto divergence-free vectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomFieldSpec {
    pub slope: f64,
    pub band: Band,
}

impl Default for RandomFieldSpec {
    fn default() -> Self {
        Self {
            slope: -2.0,
            band: Band::Dealiased,
        }
    }
}

impl SpectralField {
    pub fn zeros(grid: &TorusGrid) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![ZERO; grid.dim() * grid.size()],
            solenoidal: true,
        }
    }

    /// Wraps raw coefficients. The mean and Nyquist modes are cleared.
    pub fn from_coefficients(
        grid: &TorusGrid,
        coeffs: Vec<Complex64>,
        solenoidal: bool,
    ) -> Result<Self> {
        let expected = grid.dim() * grid.size();
        if coeffs.len() != expected {
            return Err(SnsError::LengthMismatch {
                expected,
                got: coeffs.len(),
            });
        }
        let mut f = Self {
            grid: grid.clone(),
            coeffs,
            solenoidal,
        };
        f.clear_unretained();
        Ok(f)
    }

    /// Builds a field from grid values, one slice per component.
    pub fn from_physical(grid: &TorusGrid, comps: &[Vec<f64>]) -> Result<Self> {
        if comps.len() != grid.dim() {
            return Err(SnsError::LengthMismatch {
                expected: grid.dim(),
                got: comps.len(),
            });
        }
        for c in comps {
            if c.len() != grid.size() {
                return Err(SnsError::LengthMismatch {
                    expected: grid.size(),
                    got: c.len(),
                });
            }
        }
        let m = grid.size();
        let mut coeffs = vec![ZERO; grid.dim() * m];
        with_workspace(grid, |ws| {
            let mut c = 0;
            while c < comps.len() {
                let (head, tail) = coeffs[c * m..].split_at_mut(m);
                if c + 1 < comps.len() {
                    ws.to_spectral_pair(
                        &comps[c],
                        Some(&comps[c + 1]),
                        head,
                        Some(&mut tail[..m]),
                    );
                    c += 2;
                } else {
                    ws.to_spectral_pair(&comps[c], None, head, None);
                    c += 1;
                }
            }
        });
        let mut f = Self {
            grid: grid.clone(),
            coeffs,
            solenoidal: false,
        };
        f.clear_unretained();
        f.solenoidal = f.divergence_defect() <= 1e-12 * f.coeff_norm().max(1e-300);
        Ok(f)
    }

    /// Samples `f(x)` at the grid points.
    pub fn from_fn(grid: &TorusGrid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let d = grid.dim();
        let mut comps = vec![vec![0.0; grid.size()]; d];
        for idx in 0..grid.size() {
            let v = f(grid.point(idx));
            for c in 0..d {
                comps[c][idx] = v[c];
            }
        }
        Self::from_physical(grid, &comps).expect("shapes match by construction")
    }

    /// Grid values of every component.
    pub fn to_physical(&self) -> Vec<Vec<f64>> {
        let m = self.grid.size();
        let d = self.grid.dim();
        let mut out = vec![vec![0.0; m]; d];
        with_workspace(&self.grid, |ws| {
            let mut c = 0;
            while c < d {
                if c + 1 < d {
                    let (a, b) = out.split_at_mut(c + 1);
                    ws.to_physical_pair(
                        self.component(c),
                        Some(self.component(c + 1)),
                        &mut a[c],
                        Some(&mut b[0]),
                    );
                    c += 2;
                } else {
                    ws.to_physical_pair(self.component(c), None, &mut out[c], None);
                    c += 1;
                }
            }
        });
        out
    }

    /// Random divergence-free field, normalized to unit `H` norm (zero if the
    /// band is empty).
    pub fn random_solenoidal<R: Rng + ?Sized>(
        grid: &TorusGrid,
        rng: &mut R,
        spec: &RandomFieldSpec,
    ) -> Self {
        let d = grid.dim();
        let m = grid.size();
        let mut f = Self::zeros(grid);
        for idx in 0..m {
            if !in_band(grid, idx, spec.band) {
                continue;
            }
            let nidx = grid.neg_index(idx);
            if nidx < idx {
                continue;
            }
            let kv = grid.wavevector(idx);
            let ksq = grid.ksq(idx);
            let amp = ksq.powf(spec.slope / 4.0);
            let mut c = [ZERO; 3];
            for cc in c.iter_mut().take(d) {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *cc = Complex64::new(re, im) * amp;
            }
            let dot: Complex64 = (0..d).map(|i| c[i] * kv[i]).sum();
            for i in 0..d {
                c[i] -= dot * (kv[i] / ksq);
                f.coeffs[i * m + idx] = c[i];
                f.coeffs[i * m + nidx] = c[i].conj();
            }
        }
        let e = f.energy();
        if e > 0.0 {
            f = &f * (1.0 / e.sqrt());
        }
        f
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn is_solenoidal(&self) -> bool {
        self.solenoidal
    }

    pub(crate) fn set_solenoidal(&mut self, s: bool) {
        self.solenoidal = s;
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let m = self.grid.size();
        &self.coeffs[c * m..(c + 1) * m]
    }

    /// Coefficient vector at integer wavenumber `k` (zero if not representable).
    pub fn mode(&self, k: &[i32]) -> Vec<Complex64> {
        match self.grid.index_of(k) {
            Some(idx) => (0..self.dim()).map(|c| self.component(c)[idx]).collect(),
            None => vec![ZERO; self.dim()],
        }
    }

    /// Sets `v̂(k) = amp` and `v̂(-k) = conj(amp)`, keeping the field real.
    /// The solenoidal tag is recomputed.
    pub fn set_mode(&mut self, k: &[i32], amp: &[Complex64]) -> Result<()> {
        let idx = self
            .grid
            .index_of(k)
            .filter(|&i| self.grid.is_retained(i))
            .ok_or_else(|| SnsError::InvalidConfig(format!("wavenumber {k:?} is not retained")))?;
        if amp.len() != self.dim() {
            return Err(SnsError::LengthMismatch {
                expected: self.dim(),
                got: amp.len(),
            });
        }
        let m = self.grid.size();
        let nidx = self.grid.neg_index(idx);
        for (c, &a) in amp.iter().enumerate() {
            self.coeffs[c * m + idx] = a;
            self.coeffs[c * m + nidx] = a.conj();
        }
        self.solenoidal = self.divergence_defect() <= 1e-12 * self.coeff_norm().max(1e-300);
        Ok(())
    }

    /// `(Σ |v̂|²)^{1/2}` over all coefficients and components.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖v‖²_{L²}` by Parseval.
    pub fn energy(&self) -> f64 {
        self.grid.volume() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// `max_k |k·v̂(k)|`.
    pub fn divergence_defect(&self) -> f64 {
        let m = self.grid.size();
        let d = self.dim();
        (0..m)
            .map(|idx| {
                let kv = self.grid.wavevector(idx);
                (0..d)
                    .map(|c| self.coeffs[c * m + idx] * kv[c])
                    .sum::<Complex64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }

    /// `max_k |v̂(-k) - conj v̂(k)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let m = self.grid.size();
        let mut worst: f64 = 0.0;
        for c in 0..self.dim() {
            let comp = self.component(c);
            for idx in 0..m {
                let diff = comp[self.grid.neg_index(idx)] - comp[idx].conj();
                worst = worst.max(diff.norm());
            }
        }
        worst
    }

    /// Largest `max_i |k_i|` carrying a nonzero coefficient.
    pub fn band_limit(&self) -> usize {
        let m = self.grid.size();
        let mut worst = 0usize;
        for c in 0..self.dim() {
            for idx in 0..m {
                if self.coeffs[c * m + idx] != ZERO {
                    let k = self.grid.integer_wavenumber(idx);
                    let r = k.iter().map(|x| x.unsigned_abs() as usize).max().unwrap_or(0);
                    worst = worst.max(r);
                }
            }
        }
        worst
    }

    /// Multiplies every coefficient by `f(|k|²)` (physical wavenumbers).
    pub fn apply_multiplier(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        out.apply_multiplier_in_place(f);
        out
    }

    pub fn apply_multiplier_in_place(&mut self, f: impl Fn(f64) -> f64) {
        let m = self.grid.size();
        let table: Vec<f64> = (0..m)
            .map(|idx| {
                if self.grid.is_retained(idx) {
                    f(self.grid.ksq(idx))
                } else {
                    0.0
                }
            })
            .collect();
        for comp in self.coeffs.chunks_mut(m) {
            for (c, &w) in comp.iter_mut().zip(&table) {
                *c *= w;
            }
        }
    }

    /// Keeps only the dealiasing band.
    pub fn dealiased(&self) -> Self {
        let mut out = self.clone();
        let m = self.grid.size();
        for comp in out.coeffs.chunks_mut(m) {
            for (idx, c) in comp.iter_mut().enumerate() {
                if !self.grid.in_dealias_band(idx) {
                    *c = ZERO;
                }
            }
        }
        out
    }

    /// `self + a * other`.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) {
        assert!(self.grid == other.grid, "axpy on mismatched grids");
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * a;
        }
        self.solenoidal &= other.solenoidal;
    }

    fn clear_unretained(&mut self) {
        let m = self.grid.size();
        let grid = self.grid.clone();
        let retained = &grid.tables().retained;
        for comp in self.coeffs.chunks_mut(m) {
            for (c, &keep) in comp.iter_mut().zip(retained) {
                if !keep {
                    *c = ZERO;
                }
            }
        }
    }
}

pub(crate) fn in_band(grid: &TorusGrid, idx: usize, band: Band) -> bool {
    if !grid.in_dealias_band(idx) {
        return false;
    }
    let k = grid.integer_wavenumber(idx);
    match band {
        Band::Dealiased => true,
        Band::Axis(cut) => k.iter().all(|x| x.unsigned_abs() as usize <= cut),
        Band::Radius(r) => {
            let r2: i64 = k.iter().map(|&x| (x as i64) * (x as i64)).sum();
            (r2 as f64) <= r * r + 1e-9
        }
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;

    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;

    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;

    fn mul(self, rhs: f64) -> SpectralField {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c *= rhs;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn physical_roundtrip_is_identity() {
        let g = TorusGrid::new(2, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = SpectralField::random_solenoidal(&g, &mut rng, &RandomFieldSpec::default());
        let back = SpectralField::from_physical(&g, &f.to_physical()).unwrap();
        assert!((&back - &f).coeff_norm() < 1e-14);
    }

    #[test]
    fn random_fields_are_real_and_solenoidal() {
        for d in [2, 3] {
            let g = TorusGrid::new(d, 8).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let f = SpectralField::random_solenoidal(
                &g,
                &mut rng,
                &RandomFieldSpec {
                    slope: 0.0,
                    band: Band::Dealiased,
                },
            );
            assert!(f.hermitian_defect() < 1e-15);
            assert!(f.divergence_defect() < 1e-14);
            assert!((f.energy() - 1.0).abs() < 1e-12);
            assert!(f.band_limit() <= g.dealias_cutoff());
        }
    }

    #[test]
    fn shear_mode_energy() {
        let g = TorusGrid::new(2, 16).unwrap();
        let f = SpectralField::from_fn(&g, |x| [x[1].sin(), 0.0, 0.0]);
        let want = 2.0 * std::f64::consts::PI.powi(2);
        assert!((f.energy() - want).abs() < 1e-12);
        assert!(f.divergence_defect() < 1e-15);
    }
}
