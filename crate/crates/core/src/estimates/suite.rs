//! Random-instance checks of the functional inequalities behind the estimates.
//!
//! Every instance draws divergence-free fields whose shell energy spectrum
//! scales like `|k|^slope`, i.e. `E|v̂(k)|² ∝ |k|^{slope-(d-1)}`, with
//! `slope ~ U[-3, 0]`, on `max_i |k_i| ≤ c/2` where `c` is the dealiasing
//! cutoff. On that band the pseudospectral `B` and the grid quadrature of
//! quartic integrands are exact, so both sides are evaluated without
//! truncation error.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SnsError};
use crate::noise::{path_seed, NoiseFlavor, NoiseModel, NoiseSpec};
use crate::spectral::{
    bilinear_b, discrete_multiplier_sup, gradient_norm_sq, hs_norm, l2_inner, l4_norm,
    sobolev_inner, sobolev_norm, stokes_semigroup, Band, NormSpec, RandomFieldSpec, SpectralField,
    TorusGrid, YosidaLevel,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InequalityId {
    /// `‖B(u,v)‖_{H^{-1-g}} + ‖B(v,u)‖_{H^{-1-g}} ≤ C ‖u‖^{(1-g)/2}_{H^{-g}} ‖u‖^{(1+g)/2}_{H^{1-g}} ‖v‖_{H^{(1-g)/2}}`.
    #[serde(rename = "BIL_GL")]
    BilGl,
    /// `‖B(u,v)‖_{H^{-1}} ≤ ‖u‖_{L⁴} ‖v‖_{L⁴}`.
    #[serde(rename = "BIL_L4")]
    BilL4,
    /// `|⟨B(u,v),w⟩| ≤ ‖u‖_{L⁴} ‖∇v‖_{L²} ‖w‖_{L⁴}`.
    #[serde(rename = "TRIL44")]
    Tril44,
    /// `‖v‖_{L⁴} ≤ C ‖v‖^{1-d/4}_{L²} ‖∇v‖^{d/4}_{L²}`.
    #[serde(rename = "GN")]
    Gn,
    /// `‖u‖_{H^{(1-g)/2}} ≤ C ‖u‖^{(1-g)/2}_{H^{-g}} ‖u‖^{(1+g)/2}_{H^{1-g}}`.
    #[serde(rename = "INTERP")]
    Interp,
    /// `‖e^{-tA} v‖_{H^{s',p}} ≤ M (1 + t^{-(s'-s)/2}) ‖v‖_{H^{s,p}}`.
    #[serde(rename = "SEMI")]
    Semi,
    /// `‖v‖_{H^{s,p}} ≤ C ‖v‖_{H^{r,2}}`, `1/p = 1/2 - (r-s)/d`.
    #[serde(rename = "SOBEMB")]
    SobEmb,
    /// `‖G_n(v)‖_{γ(Y;H)} ≤ ‖R_n‖_{L(H;H^g)} ‖G(v)‖_{γ(Y;H^{-g})}`.
    #[serde(rename = "GN_HS")]
    GnHs,
    /// `|⟨J^{-g}B(V,w), J^{-g}V⟩| ≤ C ‖V‖^{(1-g)/2}_{H^{-g}} ‖V‖^{(3+g)/2}_{H^{1-g}} ‖w‖_{H^{(1-g)/2}}`.
    #[serde(rename = "UNIQ_TRIL")]
    UniqTril,
}

impl InequalityId {
    pub const ALL: [InequalityId; 9] = [
        Self::BilGl,
        Self::BilL4,
        Self::Tril44,
        Self::Gn,
        Self::Interp,
        Self::Semi,
        Self::SobEmb,
        Self::GnHs,
        Self::UniqTril,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::BilGl => "BIL_GL",
            Self::BilL4 => "BIL_L4",
            Self::Tril44 => "TRIL44",
            Self::Gn => "GN",
            Self::Interp => "INTERP",
            Self::Semi => "SEMI",
            Self::SobEmb => "SOBEMB",
            Self::GnHs => "GN_HS",
            Self::UniqTril => "UNIQ_TRIL",
        }
    }

    /// The bound holds with constant one.
    pub fn constant_free(self) -> bool {
        matches!(self, Self::BilL4 | Self::Tril44 | Self::GnHs)
    }

    /// Bounds only established in two dimensions.
    pub fn planar_only(self) -> bool {
        matches!(self, Self::BilGl | Self::UniqTril)
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InequalityId {
    type Err = SnsError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| SnsError::UnknownInequality(s.to_string()))
    }
}

/// Exponents shared by the suite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuiteParams {
    pub g: f64,
    /// Noise coefficient decay used by `GN_HS`.
    pub alpha: f64,
}

impl Default for SuiteParams {
    fn default() -> Self {
        Self { g: 0.5, alpha: 0.75 }
    }
}

/// One row of the verification report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub inequality_id: String,
    pub samples: usize,
    /// Largest `LHS / RHS` with the constant removed.
    pub max_ratio: f64,
    pub calibrated_constant: f64,
    pub resolution: usize,
    pub seed: u64,
    pub dimension: usize,
    pub g: f64,
    /// Axis cutoff of the random fields.
    pub band: usize,
    pub constant_free: bool,
    /// Largest ratio of the duality step `|⟨B(u,v),φ⟩| ≤ ‖B(u,v)‖_{H^{-1-g}} ‖φ‖_{H^{1+g}}`
    /// (`BIL_GL` only).
    pub auxiliary_max_ratio: Option<f64>,
    /// Set when the bound is only claimed in two dimensions and the grid is
    /// three-dimensional.
    pub exploratory: bool,
}

/// Axis cutoff of the suite's random fields.
pub fn suite_band(grid: &TorusGrid) -> usize {
    (grid.dealias_cutoff() / 2).max(1)
}

fn random_field(grid: &TorusGrid, rng: &mut ChaCha8Rng, band: usize) -> SpectralField {
    let slope: f64 = rng.random_range(-3.0..=0.0);
    SpectralField::random_solenoidal(
        grid,
        rng,
        &RandomFieldSpec {
            slope: slope - (grid.dim() as f64 - 1.0),
            band: Band::Axis(band),
        },
    )
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else {
        0.0
    }
}

struct Instance {
    ratio: f64,
    aux: Option<f64>,
}

fn instance(
    id: InequalityId,
    grid: &TorusGrid,
    params: SuiteParams,
    model: Option<&NoiseModel>,
    seed: u64,
) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let band = suite_band(grid);
    let d = grid.dim() as f64;
    let g = params.g;
    let plain = |r| Instance { ratio: r, aux: None };
    Ok(match id {
        InequalityId::BilGl => {
            let u = random_field(grid, &mut rng, band);
            let v = random_field(grid, &mut rng, band);
            let phi = random_field(grid, &mut rng, band);
            let buv = bilinear_b(&u, &v)?;
            let bvu = bilinear_b(&v, &u)?;
            let lhs = hs_norm(&buv, -1.0 - g) + hs_norm(&bvu, -1.0 - g);
            let rhs = hs_norm(&u, -g).powf(0.5 * (1.0 - g))
                * hs_norm(&u, 1.0 - g).powf(0.5 * (1.0 + g))
                * hs_norm(&v, 0.5 * (1.0 - g));
            let dual = l2_inner(&buv, &phi).abs();
            Instance {
                ratio: ratio(lhs, rhs),
                aux: Some(ratio(dual, hs_norm(&buv, -1.0 - g) * hs_norm(&phi, 1.0 + g))),
            }
        }
        InequalityId::BilL4 => {
            let u = random_field(grid, &mut rng, band);
            let v = random_field(grid, &mut rng, band);
            let lhs = hs_norm(&bilinear_b(&u, &v)?, -1.0);
            plain(ratio(lhs, l4_norm(&u) * l4_norm(&v)))
        }
        InequalityId::Tril44 => {
            let u = random_field(grid, &mut rng, band);
            let v = random_field(grid, &mut rng, band);
            let w = random_field(grid, &mut rng, band);
            let lhs = l2_inner(&bilinear_b(&u, &v)?, &w).abs();
            plain(ratio(lhs, l4_norm(&u) * gradient_norm_sq(&v).sqrt() * l4_norm(&w)))
        }
        InequalityId::Gn => {
            let v = random_field(grid, &mut rng, band);
            let rhs = v.energy().sqrt().powf(1.0 - d / 4.0) * gradient_norm_sq(&v).sqrt().powf(d / 4.0);
            plain(ratio(l4_norm(&v), rhs))
        }
        InequalityId::Interp => {
            let u = random_field(grid, &mut rng, band);
            let rhs = hs_norm(&u, -g).powf(0.5 * (1.0 - g)) * hs_norm(&u, 1.0 - g).powf(0.5 * (1.0 + g));
            plain(ratio(hs_norm(&u, 0.5 * (1.0 - g)), rhs))
        }
        InequalityId::Semi => {
            let v = random_field(grid, &mut rng, band);
            let t = 10f64.powf(rng.random_range(-3.0..=0.0));
            let gap = rng.random_range(0.05..=2.0);
            let s = rng.random_range(-1.0..=1.0);
            let p = if rng.random_bool(0.5) { 2.0 } else { 4.0 };
            let smoothed = stokes_semigroup(&v, t, 1.0)?;
            let lhs = sobolev_norm(&smoothed, NormSpec::new(s + gap, p))?;
            let rhs = (1.0 + t.powf(-0.5 * gap)) * sobolev_norm(&v, NormSpec::new(s, p))?;
            plain(ratio(lhs, rhs))
        }
        InequalityId::SobEmb => {
            let v = random_field(grid, &mut rng, band);
            let p = [3.0, 4.0, 6.0][rng.random_range(0..3)];
            let s = rng.random_range(-0.5..=0.5);
            let r = s + d * (0.5 - 1.0 / p);
            let lhs = sobolev_norm(&v, NormSpec::new(s, p))?;
            plain(ratio(lhs, hs_norm(&v, r)))
        }
        InequalityId::GnHs => {
            let model = model.ok_or_else(|| SnsError::InvalidConfig("GN_HS needs a noise model".into()))?;
            let v = random_field(grid, &mut rng, band);
            let v = &v * 10f64.powf(rng.random_range(-1.0..=1.0));
            let n = YosidaLevel::Finite(4u64.pow(rng.random_range(0..6)));
            let lhs = model.gamma_norm_n(n, &v, 0.0, 2.0)?;
            let rn = discrete_multiplier_sup(grid, |ksq| (1.0 + ksq).powf(0.5 * g) * n.multiplier(ksq));
            plain(ratio(lhs, rn * model.gamma_norm(&v, -g, 2.0)?))
        }
        InequalityId::UniqTril => {
            let big_v = random_field(grid, &mut rng, band);
            let w = random_field(grid, &mut rng, band);
            let lhs = sobolev_inner(&bilinear_b(&big_v, &w)?, &big_v, -g).abs();
            let rhs = hs_norm(&big_v, -g).powf(0.5 * (1.0 - g))
                * hs_norm(&big_v, 1.0 - g).powf(0.5 * (3.0 + g))
                * hs_norm(&w, 0.5 * (1.0 - g));
            plain(ratio(lhs, rhs))
        }
    })
}

/// Evaluates `id` on `samples` random instances; instance `i` is seeded by
/// `path_seed(seed, i)`, so the report does not depend on thread count.
pub fn run_inequality_suite(
    id: InequalityId,
    samples: usize,
    grid: &TorusGrid,
    seed: u64,
    params: SuiteParams,
) -> Result<EstimateReport> {
    if samples == 0 {
        return Err(SnsError::InvalidConfig("the inequality suite needs at least one sample".into()));
    }
    if !(params.g > 0.0 && params.g < 1.0) {
        return Err(SnsError::InvalidConfig(format!("g must lie in (0, 1), got {}", params.g)));
    }
    let model = match id {
        InequalityId::GnHs => Some(NoiseModel::new(
            &NoiseSpec::new(params.g, params.alpha, NoiseFlavor::LipschitzMultiplicative),
            grid,
        )?),
        _ => None,
    };
    let results = (0..samples)
        .into_par_iter()
        .map(|i| instance(id, grid, params, model.as_ref(), path_seed(seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let max_ratio = results.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let aux = results
        .iter()
        .filter_map(|r| r.aux)
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))));
    if !max_ratio.is_finite() {
        return Err(SnsError::NumericalAbort {
            step: 0,
            quantity: format!("{id} ratio"),
            value: max_ratio,
        });
    }
    Ok(EstimateReport {
        inequality_id: id.to_string(),
        samples,
        max_ratio,
        calibrated_constant: max_ratio,
        resolution: grid.n(),
        seed,
        dimension: grid.dim(),
        g: params.g,
        band: suite_band(grid),
        constant_free: id.constant_free(),
        auxiliary_max_ratio: aux,
        exploratory: id.planar_only() && grid.dim() != 2,
    })
}

/// Calibrated constant of the Gagliardo–Nirenberg bound on `grid`.
pub fn calibrate_gn_constant(grid: &TorusGrid, samples: usize, seed: u64) -> Result<f64> {
    Ok(run_inequality_suite(InequalityId::Gn, samples, grid, seed, SuiteParams::default())?.calibrated_constant)
}
