//! Empirical tail probabilities of the path statistics against the
//! first-moment (Chebyshev–Markov) majorant.

use serde::{Deserialize, Serialize};

use super::convergence::{run_convergence_in_n, ConvergenceStudy, STATISTICS};
use crate::config::ExperimentConfig;
use crate::error::{Result, SnsError};
use crate::stats;

/// Smallest ensemble accepted by the tail tables.
pub const MIN_TAIL_PATHS: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub statistic: String,
    pub n: u64,
    pub eta: f64,
    /// Empirical `P(X > η)`.
    pub tail: f64,
    pub tail_std_error: f64,
    /// `E X / η` with the sample mean.
    pub majorant: f64,
    pub majorant_std_error: f64,
}

impl TailRow {
    pub fn within_majorant(&self, k_sigma: f64) -> bool {
        self.tail <= self.majorant + k_sigma * self.majorant_std_error
    }
}

/// One row per `(statistic, n, η)`. The `η` grid of a statistic is
/// `eta_multiples` times its mean pooled over the ladder, so it is shared by
/// every level.
pub fn tail_table(study: &ConvergenceStudy, eta_multiples: &[f64]) -> Vec<TailRow> {
    let mut rows = Vec::new();
    for (stat, name) in STATISTICS.iter().enumerate() {
        let pooled: Vec<f64> = (0..study.ladder.len())
            .flat_map(|l| study.samples(l, stat))
            .collect();
        let scale = stats::mean(&pooled);
        for (level, &n) in study.ladder.iter().enumerate() {
            let xs = study.samples(level, stat);
            let mean = stats::mean(&xs);
            let se = stats::std_error(&xs);
            for &mult in eta_multiples {
                let eta = mult * scale;
                let p = stats::tail_fraction(&xs, eta);
                rows.push(TailRow {
                    statistic: name.to_string(),
                    n,
                    eta,
                    tail: p,
                    tail_std_error: (p * (1.0 - p) / xs.len() as f64).sqrt(),
                    majorant: mean / eta,
                    majorant_std_error: se / eta,
                });
            }
        }
    }
    rows
}

/// `sup_n / inf_n` of the tail at each `(statistic, η)` where every level
/// has a positive tail.
pub fn tail_spread(rows: &[TailRow]) -> Vec<(String, f64, f64)> {
    let mut keys: Vec<(String, u64)> = Vec::new();
    for r in rows {
        let key = (r.statistic.clone(), r.eta.to_bits());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .filter_map(|(stat, bits)| {
            let tails: Vec<f64> = rows
                .iter()
                .filter(|r| r.statistic == stat && r.eta.to_bits() == bits)
                .map(|r| r.tail)
                .collect();
            let lo = tails.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = tails.iter().copied().fold(0.0, f64::max);
            (lo > 0.0).then(|| (stat, f64::from_bits(bits), hi / lo))
        })
        .collect()
}

pub fn run_tightness_tables(cfg: &ExperimentConfig) -> Result<(ConvergenceStudy, Vec<TailRow>)> {
    if cfg.paths < MIN_TAIL_PATHS {
        return Err(SnsError::InvalidConfig(format!(
            "tail tables need at least {MIN_TAIL_PATHS} paths, got {}",
            cfg.paths
        )));
    }
    let study = run_convergence_in_n(cfg)?;
    let rows = tail_table(&study, &study.exponents.eta_multiples);
    Ok((study, rows))
}
