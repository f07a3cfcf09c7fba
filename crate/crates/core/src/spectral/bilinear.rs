//! Pseudospectral evaluation of the advection term `B(u, v) = Π((u·∇) v)`.

use num_complex::Complex64;

use super::field::SpectralField;
use super::fourier::with_workspace;
use super::operators::leray_project_in_place;
use crate::error::{Result, SnsError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `Π((u·∇) v)` with the dealiasing mask applied to both inputs and to the
/// product. Inputs of any band are accepted; only their dealiased part is used.
pub fn bilinear_b(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    if u.grid() != v.grid() {
        return Err(SnsError::GridMismatch);
    }
    let grid = u.grid().clone();
    let d = grid.dim();
    let m = grid.size();
    let tables = grid.tables();

    // Spectra to evaluate on the grid: u_0..u_{d-1}, then ∂_i v_j at d + i*d + j.
    let mask = &tables.dealias;
    let mut spectra: Vec<Vec<Complex64>> = Vec::with_capacity(d + d * d);
    for c in 0..d {
        spectra.push(
            u.component(c)
                .iter()
                .zip(mask)
                .map(|(&x, &keep)| if keep { x } else { ZERO })
                .collect(),
        );
    }
    for i in 0..d {
        for j in 0..d {
            spectra.push(
                v.component(j)
                    .iter()
                    .zip(mask)
                    .zip(&tables.kvec)
                    .map(|((&x, &keep), k)| {
                        if keep {
                            Complex64::new(-x.im * k[i], x.re * k[i])
                        } else {
                            ZERO
                        }
                    })
                    .collect(),
            );
        }
    }

    let mut out = vec![ZERO; d * m];
    with_workspace(&grid, |ws| {
        let mut phys = vec![vec![0.0; m]; spectra.len()];
        let mut c = 0;
        while c < spectra.len() {
            if c + 1 < spectra.len() {
                let (a, b) = phys.split_at_mut(c + 1);
                ws.to_physical_pair(&spectra[c], Some(&spectra[c + 1]), &mut a[c], Some(&mut b[0]));
                c += 2;
            } else {
                ws.to_physical_pair(&spectra[c], None, &mut phys[c], None);
                c += 1;
            }
        }
        let mut prod = vec![vec![0.0; m]; d];
        for (j, pj) in prod.iter_mut().enumerate() {
            for i in 0..d {
                for ((p, &ui), &g) in pj.iter_mut().zip(&phys[i]).zip(&phys[d + i * d + j]) {
                    *p += ui * g;
                }
            }
        }
        let mut j = 0;
        while j < d {
            let (head, tail) = out[j * m..].split_at_mut(m);
            if j + 1 < d {
                ws.to_spectral_pair(&prod[j], Some(&prod[j + 1]), head, Some(&mut tail[..m]));
                j += 2;
            } else {
                ws.to_spectral_pair(&prod[j], None, head, None);
                j += 1;
            }
        }
    });
    for comp in out.chunks_mut(m) {
        for (c, &keep) in comp.iter_mut().zip(mask) {
            if !keep {
                *c = ZERO;
            }
        }
    }
    let mut field = SpectralField::from_coefficients(&grid, out, false)?;
    leray_project_in_place(&mut field);
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::field::{Band, RandomFieldSpec};
    use crate::spectral::grid::TorusGrid;
    use crate::spectral::operators::l2_inner;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shear_self_advection_vanishes() {
        let g = TorusGrid::new(2, 32).unwrap();
        let u = SpectralField::from_fn(&g, |x| [x[1].sin(), 0.0, 0.0]);
        assert!(bilinear_b(&u, &u).unwrap().coeff_norm() < 1e-15);
    }

    #[test]
    fn crossed_shears_stay_on_unit_diagonal() {
        let g = TorusGrid::new(2, 32).unwrap();
        let u = SpectralField::from_fn(&g, |x| [x[1].sin(), 0.0, 0.0]);
        let v = SpectralField::from_fn(&g, |x| [0.0, x[0].sin(), 0.0]);
        let b = bilinear_b(&u, &v).unwrap();
        assert!(b.coeff_norm() > 0.1);
        let m = g.size();
        for c in 0..2 {
            for idx in 0..m {
                let k = g.integer_wavenumber(idx);
                if k[0].abs() != 1 || k[1].abs() != 1 {
                    assert!(b.coeffs()[c * m + idx].norm() < 1e-14);
                }
            }
        }
        assert!(l2_inner(&b, &v).abs() < 1e-10);
        assert!(b.divergence_defect() < 1e-13);
    }

    #[test]
    fn trilinear_antisymmetry_3d() {
        let g = TorusGrid::new(3, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spec = RandomFieldSpec {
            slope: -1.0,
            band: Band::Dealiased,
        };
        let u = SpectralField::random_solenoidal(&g, &mut rng, &spec);
        let v = SpectralField::random_solenoidal(&g, &mut rng, &spec);
        let z = SpectralField::random_solenoidal(&g, &mut rng, &spec);
        let a = l2_inner(&bilinear_b(&u, &v).unwrap(), &z);
        let b = l2_inner(&bilinear_b(&u, &z).unwrap(), &v);
        assert!((a + b).abs() <= 1e-10 * a.abs().max(1.0));
    }

    #[test]
    fn rejects_grid_mismatch() {
        let a = SpectralField::zeros(&TorusGrid::new(2, 16).unwrap());
        let b = SpectralField::zeros(&TorusGrid::new(2, 32).unwrap());
        assert!(matches!(bilinear_b(&a, &b), Err(SnsError::GridMismatch)));
    }
}
