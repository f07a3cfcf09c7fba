//! Moments of the stochastic integral `∫₀ᵗ G(v) dw` with frozen coefficients.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::SolverConfig;
use crate::error::{Result, SnsError};
use crate::noise::{fill_increments, path_seed, NoiseModel};
use crate::stats;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentBoundRow {
    pub t: f64,
    /// Monte Carlo `E‖∫₀ᵗ G(v₀) dw‖^m_{H^{-g}}`.
    pub estimate: f64,
    pub std_error: f64,
    /// `C_m K^m t^{m/2}` with `C_m` fitted at the first time.
    pub prediction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentBoundReport {
    pub m: u32,
    pub paths: usize,
    /// `K = ‖G(v₀)‖_{γ(Y; H^{-g})}`.
    pub gamma_norm: f64,
    pub calibrated_constant: f64,
    pub rows: Vec<MomentBoundRow>,
}

impl MomentBoundReport {
    /// `estimate(t_b) / estimate(t_a)` for row indices `a`, `b`.
    pub fn ratio(&self, a: usize, b: usize) -> f64 {
        self.rows[b].estimate / self.rows[a].estimate
    }
}

/// Since the `e_j` are orthonormal in `L²` and pairwise orthogonal in every
/// `H^s`, `‖Σ_j σ_j W_j(t) e_j‖²_{H^{-g}} = Σ_j σ_j² (1+|k_j|²)^{-g} W_j(t)²`.
/// Path `p` reads the increments of `path_seed(cfg.wiener_seed(), p)`.
pub fn verify_stochastic_moment_bound(
    m: u32,
    paths: usize,
    cfg: &SolverConfig,
    times: &[f64],
) -> Result<MomentBoundReport> {
    if m < 2 || m % 2 != 0 {
        return Err(SnsError::InvalidMoment(m));
    }
    if paths == 0 {
        return Err(SnsError::InvalidConfig("the moment check needs at least one path".into()));
    }
    if times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) || times[0] <= 0.0 {
        return Err(SnsError::InvalidConfig("check times must be positive and increasing".into()));
    }
    let grid = cfg.grid()?;
    let model = NoiseModel::new(&cfg.noise, &grid)?;
    let v0 = cfg.initial_field(&grid)?;
    let g = cfg.noise.g;
    let weights: Vec<f64> = model
        .sigmas(&v0)
        .iter()
        .zip(model.basis().modes())
        .map(|(s, mode)| s * s * (1.0 + mode.ksq).powf(-g))
        .collect();
    let marks = times
        .iter()
        .map(|&t| {
            let r = t / cfg.dt;
            let k = r.round();
            if (r - k).abs() > 1e-9 * k.max(1.0) {
                Err(SnsError::InvalidConfig(format!("check time {t} is not a multiple of dt = {}", cfg.dt)))
            } else {
                Ok(k as usize)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let root = cfg.wiener_seed();
    let half_m = (m / 2) as i32;
    let samples: Vec<Vec<f64>> = (0..paths)
        .into_par_iter()
        .map(|p| {
            let seed = path_seed(root, p as u64);
            let mut w = vec![0.0; model.modes()];
            let mut dw = vec![0.0; model.modes()];
            let mut out = Vec::with_capacity(marks.len());
            let mut step = 0;
            for &mark in &marks {
                while step < mark {
                    fill_increments(seed, step, cfg.dt, &mut dw);
                    w.iter_mut().zip(&dw).for_each(|(a, b)| *a += b);
                    step += 1;
                }
                let sq: f64 = w.iter().zip(&weights).map(|(x, c)| c * x * x).sum();
                out.push(sq.powi(half_m));
            }
            out
        })
        .collect();
    let k_gamma = weights.iter().sum::<f64>().sqrt();
    let mf = m as f64;
    let column = |i: usize| samples.iter().map(|s| s[i]).collect::<Vec<_>>();
    let est0 = stats::mean(&column(0));
    let scale = |t: f64| k_gamma.powf(mf) * t.powf(0.5 * mf);
    let c_m = if scale(times[0]) > 0.0 { est0 / scale(times[0]) } else { 0.0 };
    let rows = times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let xs = column(i);
            MomentBoundRow {
                t,
                estimate: stats::mean(&xs),
                std_error: stats::std_error(&xs),
                prediction: c_m * scale(t),
            }
        })
        .collect();
    Ok(MomentBoundReport {
        m,
        paths,
        gamma_norm: k_gamma,
        calibrated_constant: c_m,
        rows,
    })
}
