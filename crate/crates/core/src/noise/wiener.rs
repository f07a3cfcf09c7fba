//! Increments of the cylindrical Wiener process on the truncated basis.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, SnsError};
use crate::meta::BlobHasher;

/// Fills `out` with the increments of step `step`: i.i.d. `N(0, dt)`, one per
/// mode. Step `s` reads ChaCha stream `s` of `seed`, so any step can be
/// regenerated on its own.
pub fn fill_increments(seed: u64, step: usize, dt: f64, out: &mut [f64]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(step as u64);
    let scale = dt.sqrt();
    for x in out.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *x = z * scale;
    }
}

/// Seed of path `path` in an ensemble rooted at `base` (splitmix64).
pub fn path_seed(base: u64, path: u64) -> u64 {
    let mut z = base
        .wrapping_add(path.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Source of increments for a solver: generated lazily from a seed, or
/// replayed from a stored path.
#[derive(Clone, Debug)]
pub enum IncrementSource {
    Seeded { seed: u64, dt: f64, modes: usize },
    Stored(WienerPath),
}

impl IncrementSource {
    pub fn dt(&self) -> f64 {
        match self {
            Self::Seeded { dt, .. } => *dt,
            Self::Stored(p) => p.dt,
        }
    }

    pub fn modes(&self) -> usize {
        match self {
            Self::Seeded { modes, .. } => *modes,
            Self::Stored(p) => p.modes,
        }
    }

    pub fn fill(&self, step: usize, out: &mut [f64]) -> Result<()> {
        match self {
            Self::Seeded { seed, dt, .. } => {
                fill_increments(*seed, step, *dt, out);
                Ok(())
            }
            Self::Stored(p) => {
                if step >= p.steps {
                    return Err(SnsError::IndexOutOfRange {
                        index: step,
                        len: p.steps,
                    });
                }
                out.copy_from_slice(p.increment(step));
                Ok(())
            }
        }
    }
}

/// Materialized increments, row-major over `(step, mode)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WienerPath {
    pub dt: f64,
    pub steps: usize,
    pub modes: usize,
    pub seed: u64,
    increments: Vec<f64>,
}

impl WienerPath {
    pub fn from_increments(
        dt: f64,
        steps: usize,
        modes: usize,
        seed: u64,
        increments: Vec<f64>,
    ) -> Result<Self> {
        if increments.len() != steps * modes {
            return Err(SnsError::LengthMismatch {
                expected: steps * modes,
                got: increments.len(),
            });
        }
        Ok(Self {
            dt,
            steps,
            modes,
            seed,
            increments,
        })
    }

    pub fn increment(&self, step: usize) -> &[f64] {
        &self.increments[step * self.modes..(step + 1) * self.modes]
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// Sums consecutive blocks of `factor` steps: the same Brownian path seen
    /// with step `factor · dt`.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || self.steps % factor != 0 {
            return Err(SnsError::InvalidConfig(format!(
                "cannot coarsen {} steps by {factor}",
                self.steps
            )));
        }
        let steps = self.steps / factor;
        let mut out = vec![0.0; steps * self.modes];
        for s in 0..self.steps {
            let dst = &mut out[(s / factor) * self.modes..(s / factor + 1) * self.modes];
            for (d, x) in dst.iter_mut().zip(self.increment(s)) {
                *d += x;
            }
        }
        Self::from_increments(self.dt * factor as f64, steps, self.modes, self.seed, out)
    }

    /// Blob hash of the little-endian increment bytes.
    pub fn content_hash(&self) -> String {
        let mut h = BlobHasher::new(8 * self.increments.len() as u64);
        h.update_f64s(&self.increments);
        h.finish()
    }
}

/// `steps × modes` increments of variance `dt`, reproducible from `seed`.
pub fn sample_wiener(modes: usize, dt: f64, steps: usize, seed: u64) -> Result<WienerPath> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SnsError::InvalidConfig(format!("time step must be positive, got {dt}")));
    }
    let mut increments = vec![0.0; steps * modes];
    for (s, row) in increments.chunks_mut(modes.max(1)).enumerate().take(steps) {
        fill_increments(seed, s, dt, row);
    }
    WienerPath::from_increments(dt, steps, modes, seed, increments)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_is_bit_identical() {
        let a = sample_wiener(7, 0.01, 50, 11).unwrap();
        let b = sample_wiener(7, 0.01, 50, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.content_hash(), b.content_hash());
        assert_ne!(a, sample_wiener(7, 0.01, 50, 12).unwrap());
        assert!(sample_wiener(7, 0.0, 5, 1).is_err());
    }

    #[test]
    fn sample_variance_matches_dt() {
        let dt = 0.25;
        let n = 1_000_000;
        let p = sample_wiener(1000, dt, n / 1000, 3).unwrap();
        let var = p.increments().iter().map(|x| x * x).sum::<f64>() / n as f64;
        // Var of the estimator is 2 dt² / n.
        let sd = (2.0 * dt * dt / n as f64).sqrt();
        assert!((var - dt).abs() <= 3.0 * sd, "{var}");
    }

    #[test]
    fn mode_streams_uncorrelated() {
        let steps = 20_000;
        let p = sample_wiener(2, 1.0, steps, 5).unwrap();
        let (mut xy, mut xx, mut yy) = (0.0, 0.0, 0.0);
        for s in 0..steps {
            let r = p.increment(s);
            xy += r[0] * r[1];
            xx += r[0] * r[0];
            yy += r[1] * r[1];
        }
        let rho = xy / (xx * yy).sqrt();
        assert!(rho.abs() <= 3.0 / (steps as f64).sqrt());
    }

    #[test]
    fn coarsen_sums_blocks_and_lazy_matches_stored() {
        let p = sample_wiener(3, 0.5, 8, 9).unwrap();
        let c = p.coarsen(4).unwrap();
        assert_eq!(c.steps, 2);
        assert!((c.increment(1)[2] - (4..8).map(|s| p.increment(s)[2]).sum::<f64>()).abs() < 1e-15);
        assert!(p.coarsen(3).is_err());
        let lazy = IncrementSource::Seeded { seed: 9, dt: 0.5, modes: 3 };
        let mut buf = [0.0; 3];
        lazy.fill(5, &mut buf).unwrap();
        assert_eq!(&buf, p.increment(5));
    }

    #[test]
    fn path_seeds_distinct() {
        let seeds: std::collections::BTreeSet<u64> = (0..1000).map(|i| path_seed(42, i)).collect();
        assert_eq!(seeds.len(), 1000);
    }
}
