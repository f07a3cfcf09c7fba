//! Direct convolution evaluation of the advection term.

use num_complex::Complex64;

use crate::error::{Result, SnsError};
use crate::spectral::{leray_project_in_place, SpectralField};

/// `Π((u·∇) v)` summed mode pair by mode pair, `Σ_{p+q=k} (û(p)·iq) v̂(q)`,
/// kept on the dealiasing band. Inputs must satisfy `max_i |k_i| ≤ N/4` so
/// that no sum `p + q` leaves the grid.
pub fn brute_force_b_oracle(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    if u.grid() != v.grid() {
        return Err(SnsError::GridMismatch);
    }
    let grid = u.grid().clone();
    let limit = grid.n() / 4;
    if u.band_limit() > limit || v.band_limit() > limit {
        return Err(SnsError::BandLimitViolated { limit });
    }
    let d = grid.dim();
    let m = grid.size();
    let support = |f: &SpectralField| -> Vec<usize> {
        (0..m)
            .filter(|&i| (0..d).any(|c| f.component(c)[i] != Complex64::new(0.0, 0.0)))
            .collect()
    };
    let su = support(u);
    let sv = support(v);
    let mut out = vec![Complex64::new(0.0, 0.0); d * m];
    for &p in &su {
        let kp = grid.integer_wavenumber(p);
        let up: Vec<Complex64> = (0..d).map(|c| u.component(c)[p]).collect();
        for &q in &sv {
            let kq = grid.integer_wavenumber(q);
            let sum: Vec<i32> = (0..d).map(|i| kp[i] + kq[i]).collect();
            let Some(k) = grid.index_of(&sum) else { continue };
            if !grid.in_dealias_band(k) {
                continue;
            }
            let wq = grid.wavevector(q);
            let adv: Complex64 = (0..d).map(|i| up[i] * Complex64::new(0.0, wq[i])).sum();
            for j in 0..d {
                out[j * m + k] += adv * v.component(j)[q];
            }
        }
    }
    let mut f = SpectralField::from_coefficients(&grid, out, false)?;
    leray_project_in_place(&mut f);
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{bilinear_b, Band, RandomFieldSpec, TorusGrid};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn low(grid: &TorusGrid, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = RandomFieldSpec {
            slope: -1.0,
            band: Band::Axis(grid.n() / 4),
        };
        SpectralField::random_solenoidal(grid, &mut rng, &spec)
    }

    #[test]
    fn agrees_with_pseudospectral_product() {
        for (d, n) in [(2, 16), (3, 8)] {
            let g = TorusGrid::new(d, n).unwrap();
            let (u, v) = (low(&g, 1), low(&g, 2));
            let a = bilinear_b(&u, &v).unwrap();
            let b = brute_force_b_oracle(&u, &v).unwrap();
            let err = (&a - &b).coeff_norm() / b.coeff_norm();
            assert!(err < 1e-12, "d={d}: {err}");
        }
    }

    #[test]
    fn shear_self_advection_vanishes() {
        let g = TorusGrid::new(2, 16).unwrap();
        let mut u = SpectralField::zeros(&g);
        // sin x₂ in the first component
        u.set_mode(&[0, 1], &[Complex64::new(0.0, -0.5), Complex64::new(0.0, 0.0)]).unwrap();
        assert_eq!(brute_force_b_oracle(&u, &u).unwrap().coeff_norm(), 0.0);
    }

    #[test]
    fn rejects_wide_band() {
        let g = TorusGrid::new(2, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let wide = SpectralField::random_solenoidal(&g, &mut rng, &RandomFieldSpec::default());
        assert!(matches!(
            brute_force_b_oracle(&wide, &wide),
            Err(SnsError::BandLimitViolated { limit: 4 })
        ));
    }
}
