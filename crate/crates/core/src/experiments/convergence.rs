//! Yosida levels driven by one Wiener path: pairwise distances and the
//! uniform path statistics of `v_n`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, StatExponents};
use crate::error::{Result, SnsError};
use crate::noise::{path_seed, IncrementSource, NoiseModel};
use crate::nse::{Scheme, Simulation};
use crate::ou::{dyadic_holder, BandEmbedding};
use crate::spectral::{l4_norm, NormEvaluator, NormSpec, SpectralField};
use crate::stats;

/// Column names of the five path statistics, in storage order.
pub const STATISTICS: [&str; 5] = [
    "v_sup_H",
    "v_L2_H_delta",
    "v_L4g_H_half",
    "v_L8d_L4",
    "v_C_gamma_H_minus1",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePath {
    /// Per ladder level, in `STATISTICS` order.
    pub stats: Vec<[f64; 5]>,
    /// `‖v_{n_i} - v_{n_{i+1}}‖_{L²(0,T;H)}` for consecutive levels.
    pub distances: Vec<f64>,
    /// All levels consumed identical increments.
    pub coupled: bool,
}

impl ConvergencePath {
    pub fn distances_decrease(&self) -> bool {
        self.distances.windows(2).all(|w| w[1] < w[0])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub ladder: Vec<u64>,
    pub exponents: StatExponents,
    pub paths: Vec<ConvergencePath>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    pub n_from: u64,
    pub n_to: u64,
    pub mean: f64,
    pub std_error: f64,
    pub paths: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatisticRow {
    pub n: u64,
    pub statistic: String,
    pub mean: f64,
    pub std_error: f64,
    pub q95: f64,
    pub paths: usize,
}

impl ConvergenceStudy {
    pub fn samples(&self, level: usize, stat: usize) -> Vec<f64> {
        self.paths.iter().map(|p| p.stats[level][stat]).collect()
    }

    /// Fraction of paths whose consecutive distances strictly decrease.
    pub fn monotone_fraction(&self) -> f64 {
        let k = self.paths.iter().filter(|p| p.distances_decrease()).count();
        k as f64 / self.paths.len() as f64
    }

    pub fn all_coupled(&self) -> bool {
        self.paths.iter().all(|p| p.coupled)
    }

    pub fn distance_rows(&self) -> Vec<DistanceRow> {
        self.ladder
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let xs: Vec<f64> = self.paths.iter().map(|p| p.distances[i]).collect();
                DistanceRow {
                    n_from: w[0],
                    n_to: w[1],
                    mean: stats::mean(&xs),
                    std_error: stats::std_error(&xs),
                    paths: xs.len(),
                }
            })
            .collect()
    }

    pub fn statistic_rows(&self) -> Vec<StatisticRow> {
        let mut rows = Vec::new();
        for (level, &n) in self.ladder.iter().enumerate() {
            for (stat, name) in STATISTICS.iter().enumerate() {
                let xs = self.samples(level, stat);
                rows.push(StatisticRow {
                    n,
                    statistic: name.to_string(),
                    mean: stats::mean(&xs),
                    std_error: stats::std_error(&xs),
                    q95: stats::quantile(&xs, 0.95),
                    paths: xs.len(),
                });
            }
        }
        rows
    }

    /// `max/min - 1` of the 95% quantile of statistic `stat` over the ladder.
    pub fn quantile_spread(&self, stat: usize) -> f64 {
        let q: Vec<f64> = (0..self.ladder.len())
            .map(|l| stats::quantile(&self.samples(l, stat), 0.95))
            .collect();
        let hi = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = q.iter().copied().fold(f64::INFINITY, f64::min);
        hi / lo - 1.0
    }
}

pub fn run_convergence_in_n(cfg: &ExperimentConfig) -> Result<ConvergenceStudy> {
    cfg.validate()?;
    if cfg.n_ladder.len() < 3 {
        return Err(SnsError::InvalidConfig(format!(
            "the convergence study needs at least 3 ladder levels, got {}",
            cfg.n_ladder.len()
        )));
    }
    let base = &cfg.base;
    let grid = base.grid()?;
    let model = NoiseModel::new(&base.noise, &grid)?;
    let v0 = base.initial_field(&grid)?;
    let ex = cfg.statistics.resolve(base.noise.g, base.dim)?;
    let root = base.wiener_seed();
    let paths = (0..cfg.paths)
        .into_par_iter()
        .map(|p| {
            let source = IncrementSource::Seeded {
                seed: path_seed(root, p as u64),
                dt: base.dt,
                modes: model.modes(),
            };
            coupled_levels(cfg, &model, &v0, source, &ex)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceStudy {
        ladder: cfg.n_ladder.clone(),
        exponents: ex,
        paths,
    })
}

/// Running time integrals of one level.
struct Accumulator {
    prev: [f64; 4],
    sup: f64,
    integrals: [f64; 3],
    times: Vec<f64>,
    states: Vec<Vec<num_complex::Complex64>>,
}

fn coupled_levels(
    cfg: &ExperimentConfig,
    model: &NoiseModel,
    v0: &SpectralField,
    source: IncrementSource,
    ex: &StatExponents,
) -> Result<ConvergencePath> {
    let base = &cfg.base;
    let grid = model.grid();
    let d = grid.dim() as f64;
    let g = base.noise.g;
    let half = 0.5 * (1.0 - g);
    let q3 = 4.0 / (1.0 - g);
    let q4 = 8.0 / d;
    let dt = base.dt;
    let stride = cfg.stride();
    let emb = BandEmbedding::dealiased(grid, -1.0);
    let h_delta = NormEvaluator::new(grid, NormSpec::hilbert(ex.delta))?;
    let h_half = NormEvaluator::new(grid, NormSpec::hilbert(half))?;
    let h_zero = NormEvaluator::new(grid, NormSpec::hilbert(0.0))?;
    let mut sims = cfg
        .ladder()
        .into_iter()
        .map(|n| Simulation::new(base, model, v0, n, source.clone(), Scheme::Split))
        .collect::<Result<Vec<_>>>()?;
    let steps = sims[0].total_steps();
    // Pointwise integrands: ‖v‖²_{H^δ}, ‖v‖^{q3}_{H^{(1-g)/2}}, ‖v‖^{q4}_{L⁴}.
    let integrands = |v: &SpectralField| -> Result<[f64; 4]> {
        Ok([
            h_delta.eval(v)?.powi(2),
            h_half.eval(v)?.powf(q3),
            l4_norm(v).powf(q4),
            h_zero.eval(v)?,
        ])
    };
    let mut acc = sims
        .iter()
        .map(|s| {
            let v = s.v();
            let f = integrands(&v)?;
            Ok(Accumulator {
                prev: f,
                sup: f[3],
                integrals: [0.0; 3],
                times: vec![0.0],
                states: vec![emb.embed(&v)?],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs = sims.len() - 1;
    let mut dist_prev = vec![0.0; pairs];
    let mut dist = vec![0.0; pairs];
    let mut coupled = true;
    for m in 1..=steps {
        for s in sims.iter_mut() {
            s.advance()?;
        }
        let reference = sims[0].last_increments();
        coupled &= sims.iter().all(|s| s.last_increments() == reference);
        let vs: Vec<SpectralField> = sims.iter().map(|s| s.v()).collect();
        let keep = m == steps || m % stride == 0;
        for (a, v) in acc.iter_mut().zip(&vs) {
            let f = integrands(v)?;
            for i in 0..3 {
                a.integrals[i] += 0.5 * dt * (a.prev[i] + f[i]);
            }
            a.sup = a.sup.max(f[3]);
            a.prev = f;
            if keep {
                a.times.push(m as f64 * dt);
                a.states.push(emb.embed(v)?);
            }
        }
        for i in 0..pairs {
            let e = (&vs[i] - &vs[i + 1]).energy();
            dist[i] += 0.5 * dt * (dist_prev[i] + e);
            dist_prev[i] = e;
        }
    }
    let hashes: Vec<String> = sims.iter().map(|s| s.increments_hash()).collect();
    coupled &= hashes.iter().all(|h| h == &hashes[0]);
    let stats = acc
        .iter()
        .map(|a| {
            Ok([
                a.sup,
                a.integrals[0].sqrt(),
                a.integrals[1].powf(1.0 / q3),
                a.integrals[2].powf(1.0 / q4),
                dyadic_holder(&a.times, &a.states, ex.gamma)?,
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergencePath {
        stats,
        distances: dist.iter().map(|x| x.sqrt()).collect(),
        coupled,
    })
}
