//! Stochastic convolution paths and their moment statistics across Yosida levels.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::holder::{dyadic_holder, BandEmbedding, OUTrajectory};
use crate::config::{ExperimentConfig, StatExponents};
use crate::error::{Result, SnsError};
use crate::noise::{path_seed, IncrementSource, NoiseModel};
use crate::nse::stepper::{add_noise, apply_decay, noise_gain, LinearTables};
use crate::spectral::{NormEvaluator, NormSpec, SpectralField, YosidaLevel};
use crate::stats;

/// Time grid and smoothing level of an OU run.
#[derive(Clone, Copy, Debug)]
pub struct OuRun {
    pub nu: f64,
    pub dt: f64,
    pub steps: usize,
    pub n: YosidaLevel,
    /// Keep every `stride`-th state (0 keeps only the endpoints).
    pub stride: usize,
}

/// Runs the OU equation from `z(0) = 0` with `σ` frozen at `v_frozen`.
pub fn simulate_ou(
    model: &NoiseModel,
    v_frozen: &SpectralField,
    run: OuRun,
    source: &IncrementSource,
) -> Result<OUTrajectory> {
    let mut times = vec![0.0];
    let mut states = vec![SpectralField::zeros(model.grid())];
    for_each_ou_state(model, v_frozen, run, source, |m, z| {
        if m == run.steps || (run.stride > 0 && m % run.stride == 0) {
            times.push(m as f64 * run.dt);
            states.push(z.clone());
        }
        Ok(())
    })?;
    OUTrajectory::new(times, states)
}

/// Steps `z` and calls `visit(m, z(t_m))` for `m = 1..=steps`.
fn for_each_ou_state(
    model: &NoiseModel,
    v_frozen: &SpectralField,
    run: OuRun,
    source: &IncrementSource,
    mut visit: impl FnMut(usize, &SpectralField) -> Result<()>,
) -> Result<()> {
    if !(run.dt > 0.0 && run.nu > 0.0) {
        return Err(SnsError::InvalidConfig("OU run needs dt > 0 and nu > 0".into()));
    }
    if source.modes() != model.modes() {
        return Err(SnsError::LengthMismatch {
            expected: model.modes(),
            got: source.modes(),
        });
    }
    let grid = model.grid();
    let tables = LinearTables::new(grid, run.nu, run.dt);
    let gain = noise_gain(model, run.n.validate()?, run.nu, run.dt, true);
    let sig = model.sigmas(v_frozen);
    let mut z = SpectralField::zeros(grid);
    let mut dw = vec![0.0; model.modes()];
    for m in 1..=run.steps {
        source.fill(m - 1, &mut dw)?;
        apply_decay(&tables, &mut z);
        add_noise(model, &mut z, &sig, &gain, &dw);
        visit(m, &z)?;
    }
    Ok(())
}

/// Per-path statistics of `z_n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OuPathStats {
    /// `‖z‖^m_{L^m(0,T; H^{ε,4})}`.
    pub lm_h_eps4: f64,
    /// `‖z‖^m_{C^β([0,T]; H^δ)}`.
    pub holder: f64,
    /// `sup_t ‖z(t)‖_{H^{(1-g)/2}}`.
    pub sup_h_half: f64,
}

/// One row of the OU moment table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub n: String,
    pub statistic: String,
    pub m_or_p: f64,
    pub beta: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub paths: usize,
}

pub const STAT_LM: &str = "z_Lm_H_eps4";
pub const STAT_HOLDER: &str = "z_C_beta_H_delta";
pub const STAT_SUP: &str = "z_sup_H_half";
pub const STAT_GN: &str = "G_n_HS_H";

/// Statistics of one path at level `n`, with `σ` frozen at `v_frozen`.
pub fn ou_path_stats(
    model: &NoiseModel,
    v_frozen: &SpectralField,
    run: OuRun,
    source: &IncrementSource,
    ex: &StatExponents,
) -> Result<OuPathStats> {
    let grid = model.grid();
    let g = model.spec().g;
    let lp = NormEvaluator::new(grid, NormSpec::new(ex.epsilon, 4.0))?;
    let half = NormEvaluator::new(grid, NormSpec::hilbert(0.5 * (1.0 - g)))?;
    let emb = BandEmbedding::dealiased(grid, ex.delta);
    let m = ex.m as i32;
    let mut times = Vec::with_capacity(run.steps + 1);
    let mut states = Vec::with_capacity(run.steps + 1);
    times.push(0.0);
    states.push(emb.embed(&SpectralField::zeros(grid))?);
    let (mut integral, mut prev, mut sup) = (0.0, 0.0, 0.0f64);
    for_each_ou_state(model, v_frozen, run, source, |step, z| {
        let cur = lp.eval(z)?.powi(m);
        integral += 0.5 * run.dt * (prev + cur);
        prev = cur;
        sup = sup.max(half.eval(z)?);
        times.push(step as f64 * run.dt);
        states.push(emb.embed(z)?);
        Ok(())
    })?;
    Ok(OuPathStats {
        lm_h_eps4: integral,
        holder: dyadic_holder(&times, &states, ex.beta)?.powi(m),
        sup_h_half: sup,
    })
}

/// Per-level samples of the moment study.
#[derive(Clone, Debug)]
pub struct OuLevelSamples {
    pub n: YosidaLevel,
    /// `‖G_n(v₀)‖_{HS(Y; H)}`.
    pub gn_hs: f64,
    pub paths: Vec<OuPathStats>,
}

/// Runs every path of every ladder level. Path `p` uses the same increments
/// at every level.
pub fn ou_moment_samples(cfg: &ExperimentConfig) -> Result<(StatExponents, Vec<OuLevelSamples>)> {
    cfg.validate()?;
    if cfg.paths == 0 {
        return Err(SnsError::InvalidConfig("the moment study needs at least one path".into()));
    }
    let base = &cfg.base;
    let grid = base.grid()?;
    let model = NoiseModel::new(&base.noise, &grid)?;
    let ex = cfg.statistics.resolve(base.noise.g, base.dim)?;
    let v0 = base.initial_field(&grid)?;
    let steps = base.steps()?;
    let root = base.wiener_seed();
    let mut levels = Vec::new();
    for n in cfg.ladder() {
        let run = OuRun {
            nu: base.nu,
            dt: base.dt,
            steps,
            n,
            stride: 0,
        };
        let paths = (0..cfg.paths)
            .into_par_iter()
            .map(|p| {
                let source = IncrementSource::Seeded {
                    seed: path_seed(root, p as u64),
                    dt: base.dt,
                    modes: model.modes(),
                };
                ou_path_stats(&model, &v0, run, &source, &ex)
            })
            .collect::<Result<Vec<_>>>()?;
        levels.push(OuLevelSamples {
            n,
            gn_hs: model.gamma_norm_n(n, &v0, 0.0, 2.0)?,
            paths,
        });
    }
    Ok((ex, levels))
}

/// Monte Carlo moments of `z_n` for every level of the ladder: one row per
/// `(n, statistic)`.
pub fn ou_moment_study(cfg: &ExperimentConfig) -> Result<Vec<MomentRow>> {
    let (ex, levels) = ou_moment_samples(cfg)?;
    Ok(moment_rows(&ex, &levels))
}

pub fn moment_rows(ex: &StatExponents, levels: &[OuLevelSamples]) -> Vec<MomentRow> {
    let mut rows = Vec::new();
    for level in levels {
        let paths = level.paths.len();
        let row = |statistic: &str, m_or_p: f64, xs: &[f64]| MomentRow {
            n: level.n.to_string(),
            statistic: statistic.into(),
            m_or_p,
            beta: ex.beta,
            delta: ex.delta,
            epsilon: ex.epsilon,
            estimate: stats::mean(xs),
            std_error: stats::std_error(xs),
            paths,
        };
        let pick = |f: fn(&OuPathStats) -> f64| level.paths.iter().map(f).collect::<Vec<_>>();
        let m = ex.m as f64;
        rows.push(row(STAT_LM, m, &pick(|s| s.lm_h_eps4)));
        rows.push(row(STAT_HOLDER, m, &pick(|s| s.holder)));
        let sup_m: Vec<f64> = level.paths.iter().map(|s| s.sup_h_half.powf(m)).collect();
        rows.push(row(STAT_SUP, m, &sup_m));
        rows.push(MomentRow {
            estimate: level.gn_hs,
            std_error: 0.0,
            ..row(STAT_GN, 2.0, &[])
        });
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SolverConfig;
    use crate::noise::{NoiseFlavor, NoiseSpec};
    use crate::spectral::TorusGrid;

    fn single_mode_model() -> NoiseModel {
        let grid = TorusGrid::new(2, 8).unwrap();
        let spec = NoiseSpec::new(0.5, 0.0, NoiseFlavor::Additive).with_modes(1);
        NoiseModel::new(&spec, &grid).unwrap()
    }

    #[test]
    fn zero_noise_is_semigroup_of_zero() {
        let grid = TorusGrid::new(2, 8).unwrap();
        let spec = NoiseSpec::new(0.5, 0.5, NoiseFlavor::Additive).with_amplitude(0.0);
        let model = NoiseModel::new(&spec, &grid).unwrap();
        let run = OuRun { nu: 1.0, dt: 0.01, steps: 20, n: YosidaLevel::Infinite, stride: 5 };
        let src = IncrementSource::Seeded { seed: 3, dt: 0.01, modes: model.modes() };
        let traj = simulate_ou(&model, &SpectralField::zeros(&grid), run, &src).unwrap();
        assert_eq!(traj.len(), 5);
        assert!(traj.states.iter().all(|s| s.coeff_norm() == 0.0));
    }

    #[test]
    fn single_mode_variance_matches_closed_form() {
        let model = single_mode_model();
        let grid = model.grid().clone();
        let dt = 1.0 / 16.0;
        let run = OuRun { nu: 1.0, dt, steps: 16, n: YosidaLevel::Infinite, stride: 0 };
        let zero = SpectralField::zeros(&grid);
        let e0 = model.basis().field(0).unwrap();
        let paths = 4000;
        let mut xs = Vec::with_capacity(paths);
        for p in 0..paths {
            let src = IncrementSource::Seeded { seed: path_seed(11, p as u64), dt, modes: 1 };
            let traj = simulate_ou(&model, &zero, run, &src).unwrap();
            xs.push(crate::spectral::l2_inner(traj.states.last().unwrap(), &e0));
        }
        let exact = -(-2.0f64).exp_m1() / 2.0;
        let var = stats::mean(&xs.iter().map(|x| x * x).collect::<Vec<_>>());
        // Var of a sample second moment of a Gaussian: 2σ⁴ / paths.
        let se = (2.0 * exact * exact / paths as f64).sqrt();
        assert!((var - exact).abs() < 4.0 * se, "{var} vs {exact}");
        let (skew, kurt) = stats::skew_kurtosis(&xs);
        let n = paths as f64;
        assert!(skew.abs() < 4.0 * (6.0 / n).sqrt());
        assert!(kurt.abs() < 4.0 * (24.0 / n).sqrt());
    }

    #[test]
    fn stationary_variance_limit() {
        // Recursion fixed point equals the continuous stationary variance.
        let model = single_mode_model();
        let dt = 0.05;
        let lam: f64 = 1.0;
        let n = YosidaLevel::Finite(3);
        let gain = noise_gain(&model, n, 1.0, dt, true)[0];
        let decay = (-lam * dt).exp();
        let var = gain * gain * dt / (1.0 - decay * decay);
        let r = n.multiplier(1.0);
        assert!((var - r * r / (2.0 * lam)).abs() < 1e-14);
    }

    #[test]
    fn zero_noise_moments_vanish() {
        let mut base = SolverConfig::desk();
        base.resolution = 8;
        base.horizon = 0.125;
        base.dt = 1.0 / 64.0;
        base.noise.amplitude = 0.0;
        let mut cfg = ExperimentConfig::new(base);
        cfg.paths = 3;
        cfg.n_ladder = vec![1, 4, 16];
        let rows = ou_moment_study(&cfg).unwrap();
        assert_eq!(rows.len(), 12);
        assert!(rows.iter().all(|r| r.estimate == 0.0 && r.std_error == 0.0));
    }

    #[test]
    fn levels_share_increments_and_are_deterministic() {
        let mut base = SolverConfig::desk();
        base.resolution = 8;
        base.horizon = 0.25;
        base.dt = 1.0 / 64.0;
        let mut cfg = ExperimentConfig::new(base);
        cfg.paths = 4;
        cfg.n_ladder = vec![1, 1000000];
        let a = ou_moment_study(&cfg).unwrap();
        let b = ou_moment_study(&cfg).unwrap();
        assert_eq!(a, b);
        // r_n increases with n, so the same increments give a larger z.
        let (_, levels) = ou_moment_samples(&cfg).unwrap();
        for p in 0..4 {
            assert!(levels[0].paths[p].lm_h_eps4 < levels[1].paths[p].lm_h_eps4);
        }
        assert!(levels[0].gn_hs < levels[1].gn_hs);
    }
}
