//! Real divergence-free trigonometric basis of the noise space.

use num_complex::Complex64;

use crate::error::{Result, SnsError};
use crate::spectral::{SpectralField, TorusGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Cos,
    Sin,
}

#[derive(Clone, Debug)]
pub struct BasisMode {
    pub k: [i32; 3],
    pub idx: usize,
    pub nidx: usize,
    pub ksq: f64,
    pub polarization: [f64; 3],
    pub parity: Parity,
}

/// `e_j(x) = c · p_j · cos(k_j·x)` or `c · p_j · sin(k_j·x)` with
/// `c = (2/L^d)^{1/2}`, `|p_j| = 1` and `p_j ⊥ k_j`.
///
/// Wavenumbers come from the half-space whose first nonzero component is
/// positive, restricted to the dealiasing band, ordered by `|k|²` and then
/// by descending lexicographic order. Each wavenumber contributes `d - 1`
/// polarizations, each as a cosine then a sine.
#[derive(Clone, Debug)]
pub struct NoiseBasis {
    grid: TorusGrid,
    modes: Vec<BasisMode>,
    norm: f64,
}

impl NoiseBasis {
    /// Number of basis functions the grid's dealiasing band can hold.
    pub fn capacity(grid: &TorusGrid) -> usize {
        let band = (0..grid.size()).filter(|&i| grid.in_dealias_band(i)).count();
        band * (grid.dim() - 1)
    }

    pub fn new(grid: &TorusGrid, count: Option<usize>) -> Result<Self> {
        let cap = Self::capacity(grid);
        let count = count.unwrap_or(cap);
        if count > cap {
            return Err(SnsError::InvalidConfig(format!(
                "{count} noise modes requested but the dealiasing band of N={} holds {cap}",
                grid.n()
            )));
        }
        let d = grid.dim();
        let mut ks: Vec<(i64, [i32; 3], usize)> = (0..grid.size())
            .filter(|&i| grid.in_dealias_band(i))
            .filter_map(|i| {
                let k = grid.integer_wavenumber(i);
                let lead = k.iter().take(d).copied().find(|&x| x != 0)?;
                (lead > 0).then(|| (k.iter().map(|&x| (x as i64) * (x as i64)).sum(), k, i))
            })
            .collect();
        ks.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));

        let mut modes = Vec::with_capacity(count);
        'outer: for (_, k, idx) in ks {
            let kv = grid.wavevector(idx);
            for pol in polarizations(d, kv) {
                for parity in [Parity::Cos, Parity::Sin] {
                    if modes.len() == count {
                        break 'outer;
                    }
                    modes.push(BasisMode {
                        k,
                        idx,
                        nidx: grid.neg_index(idx),
                        ksq: grid.ksq(idx),
                        polarization: pol,
                        parity,
                    });
                }
            }
        }
        Ok(Self {
            grid: grid.clone(),
            modes,
            norm: (2.0 / grid.volume()).sqrt(),
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[BasisMode] {
        &self.modes
    }

    pub fn mode(&self, j: usize) -> Result<&BasisMode> {
        self.modes.get(j).ok_or(SnsError::IndexOutOfRange {
            index: j,
            len: self.modes.len(),
        })
    }

    /// `(2/L^d)^{1/2}`.
    pub fn normalization(&self) -> f64 {
        self.norm
    }

    pub fn field(&self, j: usize) -> Result<SpectralField> {
        let mut w = vec![0.0; self.len()];
        self.mode(j)?;
        w[j] = 1.0;
        let mut f = SpectralField::zeros(&self.grid);
        self.accumulate(&mut f, &w);
        Ok(f)
    }

    /// `out += Σ_j weights[j] e_j`. Extra or missing weights are ignored.
    pub fn accumulate(&self, out: &mut SpectralField, weights: &[f64]) {
        assert!(out.grid() == &self.grid, "basis and field grids differ");
        let m = self.grid.size();
        let d = self.grid.dim();
        let coeffs = out.coeffs_mut();
        for (mode, &w) in self.modes.iter().zip(weights) {
            if w == 0.0 {
                continue;
            }
            let half = 0.5 * self.norm * w;
            let (at_k, at_neg) = match mode.parity {
                Parity::Cos => (Complex64::new(half, 0.0), Complex64::new(half, 0.0)),
                Parity::Sin => (Complex64::new(0.0, -half), Complex64::new(0.0, half)),
            };
            for c in 0..d {
                let p = mode.polarization[c];
                coeffs[c * m + mode.idx] += at_k * p;
                coeffs[c * m + mode.nidx] += at_neg * p;
            }
        }
    }

    /// `⟨J^s v, J^s e_j⟩_{L²}` for every basis function.
    pub fn project(&self, v: &SpectralField, s: f64) -> Vec<f64> {
        self.project_weighted(v, &self.weights(s))
    }

    /// `(1 + |k_j|²)^s` per mode.
    pub fn weights(&self, s: f64) -> Vec<f64> {
        self.modes
            .iter()
            .map(|mode| if s == 0.0 { 1.0 } else { (1.0 + mode.ksq).powf(s) })
            .collect()
    }

    /// `project` with the weights from `weights` tabulated by the caller.
    pub fn project_weighted(&self, v: &SpectralField, weights: &[f64]) -> Vec<f64> {
        let m = self.grid.size();
        let d = self.grid.dim();
        let scale = self.grid.volume() * self.norm;
        let coeffs = v.coeffs();
        self.modes
            .iter()
            .zip(weights)
            .map(|(mode, w)| {
                let mut dot = Complex64::new(0.0, 0.0);
                for c in 0..d {
                    dot += coeffs[c * m + mode.idx] * mode.polarization[c];
                }
                let part = match mode.parity {
                    Parity::Cos => dot.re,
                    Parity::Sin => -dot.im,
                };
                scale * w * part
            })
            .collect()
    }
}

/// `e_j` for the grid's full basis.
pub fn basis_field(grid: &TorusGrid, j: usize) -> Result<SpectralField> {
    let cap = NoiseBasis::capacity(grid);
    if j >= cap {
        return Err(SnsError::IndexOutOfRange { index: j, len: cap });
    }
    NoiseBasis::new(grid, Some(j + 1))?.field(j)
}

fn polarizations(d: usize, kv: [f64; 3]) -> Vec<[f64; 3]> {
    let norm = (kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2]).sqrt();
    let k = [kv[0] / norm, kv[1] / norm, kv[2] / norm];
    if d == 2 {
        return vec![[-k[1], k[0], 0.0]];
    }
    // Cross with the axis least aligned with k.
    let axis = (0..3)
        .min_by(|&a, &b| k[a].abs().total_cmp(&k[b].abs()))
        .unwrap_or(0);
    let mut e = [0.0; 3];
    e[axis] = 1.0;
    let p1 = normalize(cross(k, e));
    let p2 = normalize(cross(k, p1));
    vec![p1, p2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}
