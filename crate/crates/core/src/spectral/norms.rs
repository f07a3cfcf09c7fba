//! Bessel-potential norms `‖J^s v‖_{L^p}`.
//!
//! For vector fields the pointwise value is the Euclidean length `|v(x)|`.

use serde::{Deserialize, Serialize};

use super::field::SpectralField;
use super::grid::TorusGrid;
use super::operators::bessel_potential;
use crate::error::{Result, SnsError};

/// Sobolev index `s` and integrability exponent `p` of `H^{s,p}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub s: f64,
    pub p: f64,
}

impl NormSpec {
    pub fn new(s: f64, p: f64) -> Self {
        Self { s, p }
    }

    pub fn hilbert(s: f64) -> Self {
        Self { s, p: 2.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(SnsError::InvalidExponent(self.p));
        }
        Ok(())
    }
}

/// `‖v‖_{H^{s,p}}`: Parseval for `p = 2`, grid quadrature otherwise.
pub fn sobolev_norm(field: &SpectralField, spec: NormSpec) -> Result<f64> {
    spec.validate()?;
    if spec.p == 2.0 {
        Ok(hs_norm(field, spec.s))
    } else {
        sobolev_norm_quadrature(field, spec)
    }
}

/// Always evaluates `J^s v` on the grid and integrates `|·|^p` with equal
/// weights, including for `p = 2`.
pub fn sobolev_norm_quadrature(field: &SpectralField, spec: NormSpec) -> Result<f64> {
    spec.validate()?;
    let lifted = bessel_potential(field, spec.s);
    Ok(lp_norm_grid(field.grid(), &lifted.to_physical(), spec.p))
}

/// `(Σ_x |v(x)|^p (L/N)^d)^{1/p}` for component grid values.
pub fn lp_norm_grid(grid: &TorusGrid, comps: &[Vec<f64>], p: f64) -> f64 {
    let m = grid.size();
    let mut acc = 0.0;
    for x in 0..m {
        let sq: f64 = comps.iter().map(|c| c[x] * c[x]).sum();
        acc += if p == 4.0 {
            sq * sq
        } else if p == 2.0 {
            sq
        } else {
            sq.powf(0.5 * p)
        };
    }
    (acc * grid.cell_volume()).powf(1.0 / p)
}

/// `‖v‖_{H^s}` by Parseval.
pub fn hs_norm(field: &SpectralField, s: f64) -> f64 {
    hs_norm_sq(field, s).sqrt()
}

pub fn hs_norm_sq(field: &SpectralField, s: f64) -> f64 {
    let grid = field.grid();
    let m = grid.size();
    let tables = grid.tables();
    let mut acc = 0.0;
    for comp in field.coeffs().chunks(m) {
        for (idx, c) in comp.iter().enumerate() {
            let a = c.norm_sqr();
            if a == 0.0 {
                continue;
            }
            let w = if s == 0.0 {
                1.0
            } else {
                (1.0 + tables.ksq[idx]).powf(s)
            };
            acc += a * w;
        }
    }
    acc * grid.volume()
}

/// `‖∇v‖²_{L²}`.
pub fn gradient_norm_sq(field: &SpectralField) -> f64 {
    let grid = field.grid();
    let m = grid.size();
    let tables = grid.tables();
    let mut acc = 0.0;
    for comp in field.coeffs().chunks(m) {
        for (c, k2) in comp.iter().zip(&tables.ksq) {
            acc += c.norm_sqr() * k2;
        }
    }
    acc * grid.volume()
}

/// `‖v‖_{L^4}` on the grid.
pub fn l4_norm(field: &SpectralField) -> f64 {
    lp_norm_grid(field.grid(), &field.to_physical(), 4.0)
}

/// `‖·‖_{H^{s,p}}` on one grid with the Bessel multiplier tabulated once.
#[derive(Clone, Debug)]
pub struct NormEvaluator {
    grid: TorusGrid,
    spec: NormSpec,
    weights: Vec<f64>,
}

impl NormEvaluator {
    pub fn new(grid: &TorusGrid, spec: NormSpec) -> Result<Self> {
        spec.validate()?;
        let weights = (0..grid.size())
            .map(|idx| {
                if !grid.is_retained(idx) {
                    0.0
                } else if spec.s == 0.0 {
                    1.0
                } else {
                    (1.0 + grid.ksq(idx)).powf(0.5 * spec.s)
                }
            })
            .collect();
        Ok(Self {
            grid: grid.clone(),
            spec,
            weights,
        })
    }

    pub fn spec(&self) -> NormSpec {
        self.spec
    }

    pub fn eval(&self, field: &SpectralField) -> Result<f64> {
        if field.grid() != &self.grid {
            return Err(SnsError::GridMismatch);
        }
        let m = self.grid.size();
        if self.spec.p == 2.0 {
            let mut acc = 0.0;
            for comp in field.coeffs().chunks(m) {
                for (c, w) in comp.iter().zip(&self.weights) {
                    acc += c.norm_sqr() * w * w;
                }
            }
            return Ok((acc * self.grid.volume()).sqrt());
        }
        let mut lifted = field.clone();
        if self.spec.s != 0.0 {
            for comp in lifted.coeffs_mut().chunks_mut(m) {
                for (c, w) in comp.iter_mut().zip(&self.weights) {
                    *c *= w;
                }
            }
        }
        Ok(lp_norm_grid(&self.grid, &lifted.to_physical(), self.spec.p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::field::RandomFieldSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn shear() -> SpectralField {
        let g = TorusGrid::new(2, 16).unwrap();
        SpectralField::from_fn(&g, |x| [x[1].sin(), 0.0, 0.0])
    }

    #[test]
    fn shear_norms_closed_form() {
        let f = shear();
        let l2 = (2.0 * PI * PI).sqrt();
        assert!((sobolev_norm(&f, NormSpec::new(0.0, 2.0)).unwrap() - l2).abs() < 1e-12);
        assert!((sobolev_norm(&f, NormSpec::new(1.0, 2.0)).unwrap() - 2f64.sqrt() * l2).abs() < 1e-12);
        // ∫ sin⁴ over the square: 2π · 3π/4
        let l4 = (2.0 * PI * 0.75 * PI).powf(0.25);
        assert!((sobolev_norm(&f, NormSpec::new(0.0, 4.0)).unwrap() - l4).abs() < 1e-10);
    }

    #[test]
    fn rejects_small_exponent() {
        assert!(matches!(
            sobolev_norm(&shear(), NormSpec::new(0.0, 0.5)),
            Err(SnsError::InvalidExponent(_))
        ));
    }

    #[test]
    fn parseval_matches_quadrature_and_h1_splits() {
        let g = TorusGrid::new(2, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = SpectralField::random_solenoidal(&g, &mut rng, &RandomFieldSpec::default());
        let a = sobolev_norm(&f, NormSpec::hilbert(0.5)).unwrap();
        let b = sobolev_norm_quadrature(&f, NormSpec::hilbert(0.5)).unwrap();
        assert!((a - b).abs() <= 1e-10 * a);
        let h1 = hs_norm_sq(&f, 1.0);
        let split = f.energy() + gradient_norm_sq(&f);
        assert!((h1 - split).abs() <= 1e-12 * h1);
        assert!(hs_norm(&f, -0.3) <= hs_norm(&f, 0.2));
    }

    #[test]
    fn evaluator_agrees_with_direct_norms() {
        let g = TorusGrid::new(2, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = SpectralField::random_solenoidal(&g, &mut rng, &RandomFieldSpec::default());
        for spec in [NormSpec::new(0.3, 4.0), NormSpec::hilbert(-0.5), NormSpec::new(0.0, 3.0)] {
            let a = NormEvaluator::new(&g, spec).unwrap().eval(&f).unwrap();
            let b = sobolev_norm(&f, spec).unwrap();
            assert!((a - b).abs() <= 1e-12 * b);
        }
    }
}
