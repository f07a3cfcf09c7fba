//! Coupled trajectories from nearby initial data, compared in `H^{-g}`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{Result, SnsError};
use crate::estimates::{run_inequality_suite, InequalityId, SuiteParams};
use crate::noise::{path_seed, IncrementSource, NoiseModel};
use crate::nse::{psi_from_norms, young_c_bar, Scheme, Simulation};
use crate::spectral::{NormEvaluator, NormSpec, RandomFieldSpec, SpectralField};
use crate::stats;

/// Samples of the trilinear calibration behind `C̄` when none is configured.
pub const C_BAR_CALIBRATION_SAMPLES: usize = 200;

/// One perturbed solver on one path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessRecord {
    pub path: usize,
    pub delta0: f64,
    pub times: Vec<f64>,
    /// `‖V(t)‖_{H^{-g}}` with `V = v₁ - v₂`.
    pub v_norm: Vec<f64>,
    /// `∫₀ᵗ ψ`, trapezoid rule over every step.
    pub psi_integral: Vec<f64>,
    /// `Q(t) = e^{-∫₀ᵗψ} ‖V(t)‖²_{H^{-g}}`.
    pub weighted: Vec<f64>,
    /// Time at which `‖V‖_{H^{-g}}` first exceeded `n_stop`; later outputs
    /// repeat the values at that time.
    pub stop_time: Option<f64>,
    /// Every step fed both solvers the same increments.
    pub coupled: bool,
    pub increments_hash: String,
}

impl UniquenessRecord {
    pub fn stopped(&self) -> bool {
        self.stop_time.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessRun {
    pub c_bar: f64,
    pub lipschitz: f64,
    pub g: f64,
    pub n_stop: f64,
    pub delta0: Vec<f64>,
    pub paths: usize,
    /// Path-major, then in `delta0` order.
    pub records: Vec<UniquenessRecord>,
}

/// Ensemble mean of the recorded series for one `δ₀` at one output time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessSummaryRow {
    pub delta0: f64,
    pub t: f64,
    pub mean_q: f64,
    pub std_error_q: f64,
    /// Standard error of the paired change of `Q` since the previous output.
    pub std_error_dq: f64,
    pub mean_v_norm: f64,
    pub std_error_v_norm: f64,
    pub stopped_fraction: f64,
}

/// `C̄` of the weight: the configured value or the Young transform of the
/// trilinear calibration on the run grid.
pub fn resolve_c_bar(cfg: &ExperimentConfig) -> Result<f64> {
    if let Some(c) = cfg.uniqueness.c_bar {
        return Ok(c);
    }
    let base = &cfg.base;
    let params = SuiteParams {
        g: base.noise.g,
        alpha: base.noise.alpha,
    };
    let rep = run_inequality_suite(
        InequalityId::UniqTril,
        C_BAR_CALIBRATION_SAMPLES,
        &base.grid()?,
        0,
        params,
    )?;
    Ok(young_c_bar(rep.calibrated_constant, base.noise.g))
}

/// Unit-`H` perturbation direction shared by every path.
pub fn perturbation_field(cfg: &ExperimentConfig) -> Result<SpectralField> {
    let grid = cfg.base.grid()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.uniqueness.perturbation_seed);
    Ok(SpectralField::random_solenoidal(&grid, &mut rng, &RandomFieldSpec::default()))
}

pub fn run_uniqueness_experiment(cfg: &ExperimentConfig) -> Result<UniquenessRun> {
    cfg.validate()?;
    let base = &cfg.base;
    if base.dim != 2 {
        return Err(SnsError::InvalidConfig(format!(
            "the uniqueness experiment runs in d = 2 only, got d = {}",
            base.dim
        )));
    }
    if cfg.uniqueness.delta0.is_empty() {
        return Err(SnsError::InvalidConfig("no perturbation sizes given".into()));
    }
    let grid = base.grid()?;
    let model = NoiseModel::new(&base.noise, &grid)?;
    let v0 = base.initial_field(&grid)?;
    let h = perturbation_field(cfg)?;
    let c_bar = resolve_c_bar(cfg)?;
    let lipschitz = model.lipschitz_constant();
    let g = base.noise.g;
    let root = base.wiener_seed();
    let per_path = (0..cfg.paths)
        .into_par_iter()
        .map(|p| {
            let source = IncrementSource::Seeded {
                seed: path_seed(root, p as u64),
                dt: base.dt,
                modes: model.modes(),
            };
            coupled_path(cfg, &model, &v0, &h, source, p, c_bar, lipschitz)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(UniquenessRun {
        c_bar,
        lipschitz,
        g,
        n_stop: cfg.uniqueness.n_stop,
        delta0: cfg.uniqueness.delta0.clone(),
        paths: cfg.paths,
        records: per_path.into_iter().flatten().collect(),
    })
}

struct Perturbed {
    sim: Simulation,
    rec: UniquenessRecord,
    psi: f64,
    integral: f64,
    /// `(‖V‖, ∫ψ, Q)` at the stopping time.
    frozen: Option<(f64, f64, f64)>,
}

#[allow(clippy::too_many_arguments)]
fn coupled_path(
    cfg: &ExperimentConfig,
    model: &NoiseModel,
    v0: &SpectralField,
    h: &SpectralField,
    source: IncrementSource,
    path: usize,
    c_bar: f64,
    l_g: f64,
) -> Result<Vec<UniquenessRecord>> {
    let base = &cfg.base;
    let g = base.noise.g;
    let n_stop = cfg.uniqueness.n_stop;
    let stride = cfg.stride();
    let grid = model.grid();
    let half = NormEvaluator::new(grid, NormSpec::hilbert(0.5 * (1.0 - g)))?;
    let weak = NormEvaluator::new(grid, NormSpec::hilbert(-g))?;
    let mut reference = Simulation::new(base, model, v0, base.yosida, source.clone(), Scheme::Split)?;
    let steps = reference.total_steps();
    let mut runs = cfg
        .uniqueness
        .delta0
        .iter()
        .map(|&delta0| {
            let mut start = v0.clone();
            start.axpy(delta0, h);
            let sim = Simulation::new(base, model, &start, base.yosida, source.clone(), Scheme::Split)?;
            let v1 = reference.v();
            let v2 = sim.v();
            let psi = psi_from_norms(half.eval(&v1)?, half.eval(&v2)?, l_g, c_bar, g);
            let norm = weak.eval(&(&v1 - &v2))?;
            Ok(Perturbed {
                sim,
                rec: UniquenessRecord {
                    path,
                    delta0,
                    times: vec![0.0],
                    v_norm: vec![norm],
                    psi_integral: vec![0.0],
                    weighted: vec![norm * norm],
                    stop_time: (norm > n_stop).then_some(0.0),
                    coupled: true,
                    increments_hash: String::new(),
                },
                psi,
                integral: 0.0,
                frozen: (norm > n_stop).then_some((norm, 0.0, norm * norm)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    while !reference.is_done() {
        reference.advance()?;
        let m = reference.step_index();
        let t = reference.time();
        let keep = m == steps || m % stride == 0;
        let v1 = reference.v();
        let n1 = half.eval(&v1)?;
        for run in runs.iter_mut() {
            if let Some((norm, integral, q)) = run.frozen {
                if keep {
                    run.rec.times.push(t);
                    run.rec.v_norm.push(norm);
                    run.rec.psi_integral.push(integral);
                    run.rec.weighted.push(q);
                }
                continue;
            }
            run.sim.advance()?;
            run.rec.coupled &= run.sim.last_increments() == reference.last_increments();
            let v2 = run.sim.v();
            let psi = psi_from_norms(n1, half.eval(&v2)?, l_g, c_bar, g);
            run.integral += 0.5 * base.dt * (run.psi + psi);
            run.psi = psi;
            let norm = weak.eval(&(&v1 - &v2))?;
            let q = (-run.integral).exp() * norm * norm;
            if keep {
                run.rec.times.push(t);
                run.rec.v_norm.push(norm);
                run.rec.psi_integral.push(run.integral);
                run.rec.weighted.push(q);
            }
            if norm > n_stop {
                run.frozen = Some((norm, run.integral, q));
                run.rec.stop_time = Some(t);
            }
        }
    }
    Ok(runs
        .into_iter()
        .map(|mut run| {
            run.rec.increments_hash = run.sim.increments_hash();
            if !run.rec.stopped() {
                run.rec.coupled &= run.rec.increments_hash == reference.increments_hash();
            }
            run.rec
        })
        .collect())
}

/// Per-`δ₀` ensemble rows at every output time.
pub fn summarize_uniqueness(run: &UniquenessRun) -> Vec<UniquenessSummaryRow> {
    let mut rows = Vec::new();
    for &delta0 in &run.delta0 {
        let recs: Vec<&UniquenessRecord> = run.records.iter().filter(|r| r.delta0 == delta0).collect();
        let Some(first) = recs.first() else { continue };
        for (k, &t) in first.times.iter().enumerate() {
            let q: Vec<f64> = recs.iter().map(|r| r.weighted[k]).collect();
            let vn: Vec<f64> = recs.iter().map(|r| r.v_norm[k]).collect();
            let dq: Vec<f64> = if k == 0 {
                vec![0.0; recs.len()]
            } else {
                recs.iter().map(|r| r.weighted[k] - r.weighted[k - 1]).collect()
            };
            let stopped = recs
                .iter()
                .filter(|r| r.stop_time.is_some_and(|s| s <= t + 1e-12))
                .count();
            rows.push(UniquenessSummaryRow {
                delta0,
                t,
                mean_q: stats::mean(&q),
                std_error_q: stats::std_error(&q),
                std_error_dq: stats::std_error(&dq),
                mean_v_norm: stats::mean(&vn),
                std_error_v_norm: stats::std_error(&vn),
                stopped_fraction: stopped as f64 / recs.len() as f64,
            });
        }
    }
    rows
}

/// Whether the ensemble mean of `Q` for `delta0` never rises by more than
/// `k_sigma` paired standard errors between consecutive outputs.
pub fn weighted_mean_nonincreasing(rows: &[UniquenessSummaryRow], delta0: f64, k_sigma: f64) -> bool {
    let r: Vec<&UniquenessSummaryRow> = rows.iter().filter(|r| r.delta0 == delta0).collect();
    r.windows(2)
        .all(|w| w[1].mean_q - w[0].mean_q <= k_sigma * w[1].std_error_dq)
}

/// Mean terminal `‖V(T)‖_{H^{-g}}` per `δ₀`, in `delta0` order.
pub fn terminal_norms(rows: &[UniquenessSummaryRow], delta0: &[f64]) -> Vec<f64> {
    delta0
        .iter()
        .map(|&d| {
            rows.iter()
                .filter(|r| r.delta0 == d)
                .last()
                .map_or(f64::NAN, |r| r.mean_v_norm)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{InitialCondition, SolverConfig, UniquenessConfig};

    fn small(delta0: Vec<f64>) -> ExperimentConfig {
        let mut base = SolverConfig::desk();
        base.resolution = 16;
        base.dt = 1.0 / 64.0;
        base.horizon = 0.25;
        base.v0 = InitialCondition::Random {
            seed: 1,
            energy: 1.0,
            slope: -2.0,
            radius: Some(3.0),
        };
        let mut cfg = ExperimentConfig::new(base);
        cfg.paths = 3;
        cfg.record_stride = 4;
        cfg.uniqueness = UniquenessConfig {
            delta0,
            c_bar: Some(1e-3),
            ..Default::default()
        };
        cfg
    }

    #[test]
    fn zero_perturbation_is_bit_identical() {
        let run = run_uniqueness_experiment(&small(vec![0.0])).unwrap();
        assert_eq!(run.records.len(), 3);
        for r in &run.records {
            assert!(r.coupled);
            assert_eq!(r.times.len(), 5);
            assert!(r.v_norm.iter().all(|&x| x == 0.0));
            assert!(r.psi_integral.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn weighted_quantity_starts_at_perturbation_size() {
        let cfg = small(vec![1e-3]);
        let run = run_uniqueness_experiment(&cfg).unwrap();
        let h = perturbation_field(&cfg).unwrap();
        let expect = 1e-6 * crate::spectral::hs_norm(&h, -cfg.base.noise.g).powi(2);
        for r in &run.records {
            assert!((r.weighted[0] - expect).abs() < 1e-12 * expect);
        }
        let rows = summarize_uniqueness(&run);
        assert_eq!(rows.len(), 5);
        assert!(weighted_mean_nonincreasing(&rows, 1e-3, 3.0));
    }

    #[test]
    fn stopping_freezes_the_record() {
        let mut cfg = small(vec![1.0]);
        cfg.uniqueness.n_stop = 1e-9;
        let run = run_uniqueness_experiment(&cfg).unwrap();
        for r in &run.records {
            assert_eq!(r.stop_time, Some(0.0));
            assert!(r.v_norm.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn planar_only() {
        let mut cfg = small(vec![0.0]);
        cfg.base.dim = 3;
        cfg.base.resolution = 8;
        assert!(matches!(run_uniqueness_experiment(&cfg), Err(SnsError::InvalidConfig(_))));
    }
}
