//! Hölder seminorms of sampled paths over dyadic lags.

use num_complex::Complex64;

use crate::error::{Result, SnsError};
use crate::spectral::{SpectralField, TorusGrid};

/// Sampled path `t_m ↦ z(t_m)`.
#[derive(Clone, Debug)]
pub struct OUTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<SpectralField>,
}

impl OUTrajectory {
    pub fn new(times: Vec<f64>, states: Vec<SpectralField>) -> Result<Self> {
        if times.len() != states.len() {
            return Err(SnsError::LengthMismatch {
                expected: times.len(),
                got: states.len(),
            });
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SnsError::InvalidConfig("trajectory times must increase".into()));
        }
        if let Some(first) = states.first() {
            if states.iter().any(|s| s.grid() != first.grid()) {
                return Err(SnsError::GridMismatch);
            }
        }
        Ok(Self { times, states })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Packs a field into a real-weighted coefficient vector whose Euclidean
/// length is the `H^s` norm. Only one wavevector of each `±k` pair is kept.
#[derive(Clone, Debug)]
pub struct BandEmbedding {
    grid: TorusGrid,
    indices: Vec<usize>,
    weights: Vec<f64>,
}

impl BandEmbedding {
    /// Embedding over every retained mode.
    pub fn retained(grid: &TorusGrid, s: f64) -> Self {
        Self::build(grid, s, |idx| grid.is_retained(idx))
    }

    /// Embedding over the dealiasing band only; fields with content outside
    /// it are truncated.
    pub fn dealiased(grid: &TorusGrid, s: f64) -> Self {
        Self::build(grid, s, |idx| grid.in_dealias_band(idx))
    }

    fn build(grid: &TorusGrid, s: f64, keep: impl Fn(usize) -> bool) -> Self {
        let scale = (2.0 * grid.volume()).sqrt();
        let indices: Vec<usize> = (0..grid.size())
            .filter(|&i| keep(i) && i < grid.neg_index(i))
            .collect();
        let weights = indices
            .iter()
            .map(|&i| scale * (1.0 + grid.ksq(i)).powf(0.5 * s))
            .collect();
        Self {
            grid: grid.clone(),
            indices,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len() * self.grid.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn embed(&self, f: &SpectralField) -> Result<Vec<Complex64>> {
        if f.grid() != &self.grid {
            return Err(SnsError::GridMismatch);
        }
        let mut out = Vec::with_capacity(self.len());
        for c in 0..self.grid.dim() {
            let comp = f.component(c);
            out.extend(self.indices.iter().zip(&self.weights).map(|(&i, w)| comp[i] * w));
        }
        Ok(out)
    }
}

pub fn embedded_norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn embedded_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// `sup_m ‖s_m‖ + max ‖s_m - s_{m'}‖ / |t_m - t_{m'}|^β` over the pairs
/// `(m, m + 2^k)` for every dyadic lag plus the full-span pair. At `β = 0`
/// only the sup term is returned.
pub fn dyadic_holder(times: &[f64], states: &[Vec<Complex64>], beta: f64) -> Result<f64> {
    if states.len() < 2 || times.len() != states.len() {
        return Err(SnsError::InvalidConfig(format!(
            "a Hölder seminorm needs at least two states, got {}",
            states.len()
        )));
    }
    if !(0.0..1.0).contains(&beta) {
        return Err(SnsError::InvalidExponent(beta));
    }
    let sup = states.iter().map(|s| embedded_norm(s)).fold(0.0, f64::max);
    if beta == 0.0 {
        return Ok(sup);
    }
    let last = states.len() - 1;
    let ratio = |i: usize, j: usize| embedded_distance(&states[i], &states[j]) / (times[j] - times[i]).powf(beta);
    let mut inc = ratio(0, last);
    let mut lag = 1;
    while lag <= last {
        for i in 0..=last - lag {
            inc = inc.max(ratio(i, i + lag));
        }
        lag *= 2;
    }
    Ok(sup + inc)
}

/// `sup_m ‖z(t_m)‖_{H^δ} + max ‖z(t_m) - z(t_{m'})‖_{H^δ} / |t_m - t_{m'}|^β`
/// over dyadic lags.
pub fn holder_seminorm(traj: &OUTrajectory, beta: f64, delta: f64) -> Result<f64> {
    if traj.len() < 2 {
        return Err(SnsError::InvalidConfig(format!(
            "a Hölder seminorm needs at least two states, got {}",
            traj.len()
        )));
    }
    let emb = BandEmbedding::retained(traj.states[0].grid(), delta);
    let states: Vec<_> = traj.states.iter().map(|s| emb.embed(s)).collect::<Result<_>>()?;
    dyadic_holder(&traj.times, &states, beta)
}
