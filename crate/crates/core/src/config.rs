//! Run and experiment configuration (JSON).

use std::f64::consts::PI;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SnsError};
use crate::io::read_field;
use crate::noise::{path_seed, NoiseSpec};
use crate::spectral::{Band, GridSpec, RandomFieldSpec, SpectralField, TorusGrid, YosidaLevel};

fn two_pi() -> f64 {
    2.0 * PI
}

fn two_thirds() -> f64 {
    2.0 / 3.0
}

fn yes() -> bool {
    true
}

fn unit() -> f64 {
    1.0
}

fn default_slope() -> f64 {
    -2.0
}

fn low_k() -> Vec<i32> {
    vec![1, 1]
}

/// Time-constant or piecewise-constant forcing.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingSpec {
    #[default]
    Zero,
    /// `amplitude · p cos(k·x)` with a unit transverse polarization `p`,
    /// normalized to unit `H` norm before scaling.
    LowMode {
        #[serde(default = "unit")]
        amplitude: f64,
        #[serde(default = "low_k")]
        k: Vec<i32>,
    },
    /// A fixed field stored in an SNSF file.
    Field { path: PathBuf },
    /// Piecewise constant in time: `paths[i]` holds on `[times[i], times[i+1])`.
    Series { times: Vec<f64>, paths: Vec<PathBuf> },
}

/// Source of the initial velocity.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    #[default]
    Zero,
    /// `(amplitude · sin(2π x₂/L), 0, ...)`.
    Shear {
        #[serde(default = "unit")]
        amplitude: f64,
    },
    /// Random divergence-free field with `E|v̂(k)|² ∝ |k|^slope` on
    /// `|k| <= radius` (integer wavenumbers), rescaled to `‖v₀‖²_H = energy`.
    Random {
        #[serde(default)]
        seed: u64,
        #[serde(default = "unit")]
        energy: f64,
        #[serde(default = "default_slope")]
        slope: f64,
        #[serde(default)]
        radius: Option<f64>,
    },
    File { path: PathBuf },
}

/// Forcing resolved on a grid.
#[derive(Clone, Debug)]
pub enum Forcing {
    Zero,
    Constant(SpectralField),
    Series { times: Vec<f64>, fields: Vec<SpectralField> },
}

impl Forcing {
    /// Forcing at time `t` (`None` when identically zero).
    pub fn at(&self, t: f64) -> Option<&SpectralField> {
        match self {
            Self::Zero => None,
            Self::Constant(f) => Some(f),
            Self::Series { times, fields } => {
                let i = times.partition_point(|&s| s <= t + 1e-12).saturating_sub(1);
                fields.get(i)
            }
        }
    }
}

/// One solver run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(rename = "d")]
    pub dim: usize,
    #[serde(rename = "N")]
    pub resolution: usize,
    #[serde(rename = "L", default = "two_pi")]
    pub length: f64,
    #[serde(default = "two_thirds")]
    pub dealias_fraction: f64,
    pub nu: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub dt: f64,
    /// Yosida level; `"inf"` or `null` switches the smoothing off.
    #[serde(rename = "n", default = "infinite")]
    pub yosida: YosidaLevel,
    pub noise: NoiseSpec,
    #[serde(default)]
    pub forcing: ForcingSpec,
    #[serde(default)]
    pub v0: InitialCondition,
    #[serde(default)]
    pub seed: u64,
    /// Keep every `record_stride`-th state (0 keeps only the endpoints).
    #[serde(default)]
    pub record_stride: usize,
    /// `false` drops the advection term.
    #[serde(default = "yes")]
    pub nonlinear: bool,
    /// Constant `C` of the energy inequality; calibrated when absent.
    #[serde(default)]
    pub energy_constant: Option<f64>,
    /// Abort once `‖u‖²_H` or `‖z‖²_H` exceeds this value.
    #[serde(default)]
    pub abort_energy: Option<f64>,
}

fn infinite() -> YosidaLevel {
    YosidaLevel::Infinite
}

impl SolverConfig {
    /// Desk-scale defaults: `d = 2`, `N = 64`, `T = 1`, `dt = 2⁻¹⁰`,
    /// `g = 0.5`, `alpha = 0.75`, `ν = 1`.
    pub fn desk() -> Self {
        Self {
            dim: 2,
            resolution: 64,
            length: two_pi(),
            dealias_fraction: two_thirds(),
            nu: 1.0,
            horizon: 1.0,
            dt: 1.0 / 1024.0,
            yosida: YosidaLevel::Infinite,
            noise: NoiseSpec::new(0.5, 0.75, Default::default()),
            forcing: ForcingSpec::Zero,
            v0: InitialCondition::Zero,
            seed: 0,
            record_stride: 0,
            nonlinear: true,
            energy_constant: None,
            abort_energy: None,
        }
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            dim: self.dim,
            n: self.resolution,
            length: self.length,
            dealias_fraction: self.dealias_fraction,
        }
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::from_spec(self.grid_spec())
    }

    /// `T / dt`, which must be a whole number.
    pub fn steps(&self) -> Result<usize> {
        let r = self.horizon / self.dt;
        let n = r.round();
        if !(n >= 1.0) || (r - n).abs() > 1e-9 * n.max(1.0) {
            return Err(SnsError::InvalidConfig(format!(
                "T / dt = {r} is not a positive whole number"
            )));
        }
        Ok(n as usize)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid_spec().validate()?;
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(SnsError::InvalidConfig(format!("nu must be positive, got {}", self.nu)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(SnsError::InvalidConfig(format!("T must be positive, got {}", self.horizon)));
        }
        if !(self.dt > 0.0 && self.dt <= self.horizon) {
            return Err(SnsError::InvalidConfig(format!(
                "dt must lie in (0, T], got {}",
                self.dt
            )));
        }
        self.steps()?;
        self.yosida.validate()?;
        self.noise.validate()?;
        if let Some(c) = self.energy_constant {
            if !(c > 0.0 && c.is_finite()) {
                return Err(SnsError::InvalidConfig(format!("energy_constant must be positive, got {c}")));
            }
        }
        if let ForcingSpec::Series { times, paths } = &self.forcing {
            if times.len() != paths.len() || times.is_empty() {
                return Err(SnsError::InvalidConfig("forcing series needs one time per file".into()));
            }
            if times.windows(2).any(|w| w[1] <= w[0]) {
                return Err(SnsError::InvalidConfig("forcing series times must increase".into()));
            }
        }
        if let ForcingSpec::LowMode { k, .. } = &self.forcing {
            if k.len() != self.dim {
                return Err(SnsError::InvalidConfig(format!(
                    "forcing wavenumber {k:?} does not have {} components",
                    self.dim
                )));
            }
        }
        Ok(())
    }

    /// Base seed of the Wiener increments.
    pub fn wiener_seed(&self) -> u64 {
        path_seed(self.seed, self.noise.seed)
    }

    pub fn initial_field(&self, grid: &TorusGrid) -> Result<SpectralField> {
        initial_field(&self.v0, grid)
    }

    /// Files the run reads besides the config itself.
    pub fn referenced_files(&self) -> Vec<PathBuf> {
        let mut out = Vec::new();
        if let InitialCondition::File { path } = &self.v0 {
            out.push(path.clone());
        }
        match &self.forcing {
            ForcingSpec::Field { path } => out.push(path.clone()),
            ForcingSpec::Series { paths, .. } => out.extend(paths.iter().cloned()),
            _ => {}
        }
        out
    }

    pub fn resolve_forcing(&self, grid: &TorusGrid) -> Result<Forcing> {
        Ok(match &self.forcing {
            ForcingSpec::Zero => Forcing::Zero,
            ForcingSpec::LowMode { amplitude, k } => Forcing::Constant(low_mode(grid, k, *amplitude)?),
            ForcingSpec::Field { path } => Forcing::Constant(load_on(grid, path)?),
            ForcingSpec::Series { times, paths } => Forcing::Series {
                times: times.clone(),
                fields: paths.iter().map(|p| load_on(grid, p)).collect::<Result<_>>()?,
            },
        })
    }
}

fn load_on(grid: &TorusGrid, path: &PathBuf) -> Result<SpectralField> {
    let (f, _) = read_field(path)?;
    if f.grid() != grid {
        return Err(SnsError::InvalidConfig(format!(
            "{} was written on a different grid",
            path.display()
        )));
    }
    Ok(f)
}

fn low_mode(grid: &TorusGrid, k: &[i32], amplitude: f64) -> Result<SpectralField> {
    let idx = grid
        .index_of(k)
        .filter(|&i| grid.in_dealias_band(i))
        .ok_or_else(|| SnsError::InvalidConfig(format!("forcing wavenumber {k:?} is outside the band")))?;
    let kv = grid.wavevector(idx);
    let norm = grid.ksq(idx).sqrt();
    let pol = if grid.dim() == 2 {
        [-kv[1] / norm, kv[0] / norm, 0.0]
    } else {
        let e = if kv[2].abs() < norm * 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
        let c = [
            kv[1] * e[2] - kv[2] * e[1],
            kv[2] * e[0] - kv[0] * e[2],
            kv[0] * e[1] - kv[1] * e[0],
        ];
        let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        [c[0] / n, c[1] / n, c[2] / n]
    };
    let amp: Vec<_> = (0..grid.dim())
        .map(|c| num_complex::Complex64::new(pol[c], 0.0))
        .collect();
    let mut f = SpectralField::zeros(grid);
    f.set_mode(k, &amp)?;
    let e = f.energy();
    Ok(&f * (amplitude / e.sqrt()))
}

pub fn initial_field(ic: &InitialCondition, grid: &TorusGrid) -> Result<SpectralField> {
    match ic {
        InitialCondition::Zero => Ok(SpectralField::zeros(grid)),
        InitialCondition::Shear { amplitude } => {
            let a = *amplitude;
            let w = grid.wavenumber_scale();
            Ok(SpectralField::from_fn(grid, |x| [a * (w * x[1]).sin(), 0.0, 0.0]))
        }
        InitialCondition::Random {
            seed,
            energy,
            slope,
            radius,
        } => {
            if !(*energy >= 0.0) {
                return Err(SnsError::InvalidConfig(format!("initial energy must be >= 0, got {energy}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let band = radius.map(Band::Radius).unwrap_or(Band::Dealiased);
            let f = SpectralField::random_solenoidal(grid, &mut rng, &RandomFieldSpec { slope: *slope, band });
            Ok(&f * energy.sqrt())
        }
        InitialCondition::File { path } => {
            let f = load_on(grid, path)?;
            if !f.is_solenoidal() {
                return Err(SnsError::InvalidConfig(format!(
                    "initial field {} is not divergence free",
                    path.display()
                )));
            }
            Ok(f)
        }
    }
}

/// Exponents of the ensemble statistics.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatisticsConfig {
    /// Moment order `m` of the noise-part statistics.
    #[serde(default)]
    pub m: Option<u32>,
    /// Extra spatial regularity `ε` of the `L^m(0,T;H^{ε,4})` statistic.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Hölder exponent in time; default `(1-g)/4`.
    #[serde(default)]
    pub beta: Option<f64>,
    /// Sobolev index of the Hölder statistic; default `(1-g)/4`.
    #[serde(default)]
    pub delta: Option<f64>,
    /// Threshold grid for the tail tables, as multiples of each statistic's
    /// sample mean.
    #[serde(default)]
    pub eta_multiples: Option<Vec<f64>>,
}

/// Resolved statistics exponents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatExponents {
    pub m: u32,
    pub epsilon: f64,
    pub beta: f64,
    pub delta: f64,
    /// Hölder exponent of the velocity statistic, `min(β, 1 - d/4)`.
    pub gamma: f64,
    pub eta_multiples: Vec<f64>,
}

impl StatisticsConfig {
    pub fn resolve(&self, g: f64, dim: usize) -> Result<StatExponents> {
        let m = self.m.unwrap_or(2);
        if m < 2 || m % 2 != 0 {
            return Err(SnsError::InvalidMoment(m));
        }
        let beta = self.beta.unwrap_or((1.0 - g) / 4.0);
        let delta = self.delta.unwrap_or((1.0 - g) / 4.0);
        let epsilon = self.epsilon.unwrap_or(0.0);
        if !(0.0..1.0).contains(&beta) {
            return Err(SnsError::InvalidConfig(format!("beta must lie in [0, 1), got {beta}")));
        }
        if epsilon < 0.0 || g + epsilon >= 1.0 {
            return Err(SnsError::InvalidConfig(format!(
                "epsilon must satisfy 0 <= epsilon < 1 - g, got {epsilon}"
            )));
        }
        Ok(StatExponents {
            m,
            epsilon,
            beta,
            delta,
            gamma: beta.min(1.0 - dim as f64 / 4.0),
            eta_multiples: self
                .eta_multiples
                .clone()
                .unwrap_or_else(|| vec![0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0]),
        })
    }
}

fn default_n_stop() -> f64 {
    1e6
}

fn default_ladder() -> Vec<u64> {
    vec![1, 4, 16, 64, 256]
}

fn default_paths() -> usize {
    100
}

/// Settings of the coupled-trajectory uniqueness study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniquenessConfig {
    /// Perturbation sizes `δ₀`; one perturbed solver per entry.
    pub delta0: Vec<f64>,
    /// `C̄` of the weight; calibrated from the trilinear suite when absent.
    #[serde(default)]
    pub c_bar: Option<f64>,
    /// Truncation threshold on `‖V‖_{H^{-g}}`.
    #[serde(default = "default_n_stop")]
    pub n_stop: f64,
    /// Seed of the unit perturbation field.
    #[serde(default)]
    pub perturbation_seed: u64,
}

impl Default for UniquenessConfig {
    fn default() -> Self {
        Self {
            delta0: vec![0.0],
            c_bar: None,
            n_stop: default_n_stop(),
            perturbation_seed: 0,
        }
    }
}

/// Ensemble experiment on top of a base run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub base: SolverConfig,
    #[serde(default = "default_ladder")]
    pub n_ladder: Vec<u64>,
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default)]
    pub uniqueness: UniquenessConfig,
    #[serde(default)]
    pub statistics: StatisticsConfig,
    /// States kept every this many steps for the time-Hölder statistics
    /// (0 picks 1).
    #[serde(default)]
    pub record_stride: usize,
}

impl ExperimentConfig {
    pub fn new(base: SolverConfig) -> Self {
        Self {
            base,
            n_ladder: default_ladder(),
            paths: default_paths(),
            uniqueness: UniquenessConfig::default(),
            statistics: StatisticsConfig::default(),
            record_stride: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.n_ladder.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SnsError::InvalidConfig("n_ladder must be strictly increasing".into()));
        }
        if self.n_ladder.first() == Some(&0) {
            return Err(SnsError::ZeroYosidaLevel);
        }
        if self.paths == 0 {
            return Err(SnsError::InvalidConfig("paths must be positive".into()));
        }
        if self.uniqueness.delta0.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return Err(SnsError::InvalidConfig("perturbation sizes must be >= 0".into()));
        }
        if !(self.uniqueness.n_stop > 0.0) {
            return Err(SnsError::InvalidConfig("n_stop must be positive".into()));
        }
        if let Some(c) = self.uniqueness.c_bar {
            if !(c > 0.0 && c.is_finite()) {
                return Err(SnsError::InvalidConfig(format!("c_bar must be positive, got {c}")));
            }
        }
        self.statistics.resolve(self.base.noise.g, self.base.dim)?;
        Ok(())
    }

    pub fn ladder(&self) -> Vec<YosidaLevel> {
        self.n_ladder.iter().map(|&n| YosidaLevel::Finite(n)).collect()
    }

    pub fn stride(&self) -> usize {
        self.record_stride.max(1)
    }
}
