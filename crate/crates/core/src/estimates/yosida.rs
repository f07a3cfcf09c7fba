//! Growth of `‖R_n‖_{L(H^s; H^{s+t})}` with the Yosida level.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SnsError};
use crate::spectral::{discrete_multiplier_sup, TorusGrid, YosidaLevel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct YosidaGrowthRow {
    pub n: u64,
    /// Sup of `(1+|k|²)^{t/2} n/(n+|k|²)` over the grid.
    pub discrete: f64,
    /// Same sup over continuous `|k|² = r ≥ 0`.
    pub analytic: f64,
    /// `|k|²` of the continuous maximizer.
    pub maximizer: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct YosidaGrowthReport {
    pub exponent: f64,
    pub resolution: usize,
    pub rows: Vec<YosidaGrowthRow>,
    /// Least-squares slope of `log discrete` against `log n`.
    pub slope: f64,
}

/// `max_{r ≥ 0} (1+r)^{t/2} n/(n+r)` and its maximizer: the interior critical
/// point `r* = (tn - 2)/(2 - t)` when `tn > 2`, else `r = 0`.
pub fn analytic_yosida_sup(t: f64, n: f64) -> (f64, f64) {
    let r = if t * n > 2.0 { (t * n - 2.0) / (2.0 - t) } else { 0.0 };
    ((1.0 + r).powf(0.5 * t) * n / (n + r), r)
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn verify_yosida_growth(t: f64, ladder: &[u64], grid: &TorusGrid) -> Result<YosidaGrowthReport> {
    if !(t > 0.0 && t < 2.0) {
        return Err(SnsError::InvalidExponent(t));
    }
    if ladder.is_empty() {
        return Err(SnsError::InvalidConfig("the Yosida ladder is empty".into()));
    }
    let rows = ladder
        .iter()
        .map(|&n| {
            let level = YosidaLevel::finite(n)?;
            let discrete = discrete_multiplier_sup(grid, |ksq| (1.0 + ksq).powf(0.5 * t) * level.multiplier(ksq));
            let (analytic, maximizer) = analytic_yosida_sup(t, n as f64);
            Ok(YosidaGrowthRow {
                n,
                discrete,
                analytic,
                maximizer,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let slope = if rows.len() >= 2 {
        let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.discrete.ln()).collect();
        fit_slope(&xs, &ys)
    } else {
        f64::NAN
    };
    Ok(YosidaGrowthReport {
        exponent: t,
        resolution: grid.n(),
        rows,
        slope,
    })
}
