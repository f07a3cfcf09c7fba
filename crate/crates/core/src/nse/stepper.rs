//! Exponential-integrator steps for the split scheme `v = z + u` and for the
//! direct Euler–Maruyama scheme.

use num_complex::Complex64;

use crate::config::{Forcing, SolverConfig};
use crate::error::{Result, SnsError};
use crate::meta::BlobHasher;
use crate::noise::{IncrementSource, NoiseModel};
use crate::spectral::{bilinear_b, SpectralField, TorusGrid, YosidaLevel};

/// Per-wavenumber tables of the linear flow `e^{-ν|k|² s}` over one step.
#[derive(Clone, Debug)]
pub(crate) struct LinearTables {
    pub nu: f64,
    /// `ν|k|²`.
    pub rate: Vec<f64>,
    /// `e^{-ν|k|² dt}`.
    pub decay: Vec<f64>,
    /// `∫₀^dt e^{-ν|k|² s} ds = φ₁(-ν|k|² dt) dt`.
    pub e1: Vec<f64>,
    /// `∫₀^dt e^{-2ν|k|² s} ds`.
    pub e2: Vec<f64>,
}

impl LinearTables {
    pub fn new(grid: &TorusGrid, nu: f64, dt: f64) -> Self {
        let m = grid.size();
        let mut t = Self {
            nu,
            rate: vec![0.0; m],
            decay: vec![0.0; m],
            e1: vec![0.0; m],
            e2: vec![0.0; m],
        };
        for idx in 0..m {
            if !grid.is_retained(idx) {
                continue;
            }
            let lam = nu * grid.ksq(idx);
            t.rate[idx] = lam;
            t.decay[idx] = (-lam * dt).exp();
            t.e1[idx] = -(-lam * dt).exp_m1() / lam;
            t.e2[idx] = -(-2.0 * lam * dt).exp_m1() / (2.0 * lam);
        }
        t
    }
}

/// Energy bookkeeping of one `u` step with frozen forcing `F`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepEnergy {
    /// `∫ ‖u‖²_{L²} ds` over the step.
    pub energy_integral: f64,
    /// `∫ ‖∇u‖²_{L²} ds` over the step.
    pub dissipation: f64,
    /// `∫ ⟨F, u⟩ ds` over the step.
    pub work: f64,
    /// `‖u₊‖² - ‖u‖² + 2ν ∫‖∇u‖² - 2 ∫⟨F, u⟩`.
    pub residual: f64,
}

/// `u ← e^{-νA dt} u + φ₁(-νA dt) dt · F`, returning exact step integrals of
/// the frozen-forcing flow `y(s) = α e^{-λs} + β`, `β = F/λ`.
pub(crate) fn advance_linear(
    tables: &LinearTables,
    dt: f64,
    u: &mut SpectralField,
    forcing: Option<&[Complex64]>,
) -> StepEnergy {
    let grid = u.grid().clone();
    let m = grid.size();
    let vol = grid.volume();
    let ksq = &grid.tables().ksq;
    let mut out = StepEnergy::default();
    let (mut before, mut after) = (0.0, 0.0);
    for (c, comp) in u.coeffs_mut().chunks_mut(m).enumerate() {
        for idx in 0..m {
            let lam = tables.rate[idx];
            if lam == 0.0 {
                continue;
            }
            let y0 = comp[idx];
            let f = forcing.map(|f| f[c * m + idx]).unwrap_or_default();
            let beta = f / lam;
            let alpha = y0 - beta;
            let sq = alpha.norm_sqr() * tables.e2[idx]
                + 2.0 * (alpha * beta.conj()).re * tables.e1[idx]
                + beta.norm_sqr() * dt;
            let integral = alpha * tables.e1[idx] + beta * dt;
            out.energy_integral += sq;
            out.dissipation += ksq[idx] * sq;
            out.work += (f.conj() * integral).re;
            let y1 = y0 * tables.decay[idx] + f * tables.e1[idx];
            before += y0.norm_sqr();
            after += y1.norm_sqr();
            comp[idx] = y1;
        }
    }
    out.energy_integral *= vol;
    out.dissipation *= vol;
    out.work *= vol;
    out.residual = vol * (after - before) + 2.0 * tables.nu * out.dissipation - 2.0 * out.work;
    out
}

fn drift(v: &SpectralField, f: Option<&SpectralField>, nonlinear: bool) -> Result<Option<Vec<Complex64>>> {
    let mut acc: Option<Vec<Complex64>> = f.map(|f| f.coeffs().to_vec());
    if nonlinear {
        let b = bilinear_b(v, v)?;
        match acc.as_mut() {
            Some(a) => a.iter_mut().zip(b.coeffs()).for_each(|(x, y)| *x -= y),
            None => acc = Some(b.coeffs().iter().map(|y| -y).collect()),
        }
    }
    Ok(acc)
}

/// One step of the deterministic `u` equation with `v = u + z`:
/// `û ← e^{-ν|k|²dt} û + φ₁(-ν|k|²dt) dt (f̂ - B̂(v, v))`.
pub fn step_u(
    u: &SpectralField,
    z: &SpectralField,
    f_t: Option<&SpectralField>,
    dt: f64,
    nu: f64,
) -> Result<SpectralField> {
    check_step(dt, nu)?;
    if u.grid() != z.grid() || f_t.is_some_and(|f| f.grid() != u.grid()) {
        return Err(SnsError::GridMismatch);
    }
    let tables = LinearTables::new(u.grid(), nu, dt);
    let v = u + z;
    let force = drift(&v, f_t, true)?;
    let mut out = u.clone();
    advance_linear(&tables, dt, &mut out, force.as_deref());
    out.set_solenoidal(true);
    Ok(out)
}

/// Frozen-coefficient exponential Euler step of the OU equation with exact
/// per-mode variance.
pub fn ou_step(
    model: &NoiseModel,
    z: &SpectralField,
    v_frozen: &SpectralField,
    dw: &[f64],
    dt: f64,
    nu: f64,
    n: YosidaLevel,
) -> Result<SpectralField> {
    check_step(dt, nu)?;
    check_increments(model, dw)?;
    let tables = LinearTables::new(z.grid(), nu, dt);
    let gain = noise_gain(model, n.validate()?, nu, dt, true);
    let sig = model.sigmas(v_frozen);
    let mut out = z.clone();
    apply_decay(&tables, &mut out);
    add_noise(model, &mut out, &sig, &gain, dw);
    Ok(out)
}

/// Single-equation step: exponential integrator on `A`, explicit `B`, and
/// plain Euler–Maruyama noise `G_n(v) ΔW`.
#[allow(clippy::too_many_arguments)]
pub fn step_v_direct(
    model: &NoiseModel,
    v: &SpectralField,
    f_t: Option<&SpectralField>,
    dw: &[f64],
    dt: f64,
    nu: f64,
    n: YosidaLevel,
    nonlinear: bool,
) -> Result<SpectralField> {
    check_step(dt, nu)?;
    check_increments(model, dw)?;
    let tables = LinearTables::new(v.grid(), nu, dt);
    let gain = noise_gain(model, n.validate()?, nu, dt, false);
    let sig = model.sigmas(v);
    let force = drift(v, f_t, nonlinear)?;
    let mut out = v.clone();
    advance_linear(&tables, dt, &mut out, force.as_deref());
    add_noise(model, &mut out, &sig, &gain, dw);
    out.set_solenoidal(true);
    Ok(out)
}

fn check_step(dt: f64, nu: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SnsError::InvalidConfig(format!("time step must be positive, got {dt}")));
    }
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(SnsError::InvalidConfig(format!("viscosity must be positive, got {nu}")));
    }
    Ok(())
}

fn check_increments(model: &NoiseModel, dw: &[f64]) -> Result<()> {
    if dw.len() != model.modes() {
        return Err(SnsError::LengthMismatch {
            expected: model.modes(),
            got: dw.len(),
        });
    }
    Ok(())
}

/// `r_n(k_j)`, times `((1 - e^{-2λ_j dt}) / (2λ_j dt))^{1/2}` for the exact
/// OU variance.
pub(crate) fn noise_gain(model: &NoiseModel, n: YosidaLevel, nu: f64, dt: f64, exact: bool) -> Vec<f64> {
    model
        .basis()
        .modes()
        .iter()
        .map(|m| {
            let r = n.multiplier(m.ksq);
            if exact {
                let lam = nu * m.ksq;
                let var = -(-2.0 * lam * dt).exp_m1() / (2.0 * lam * dt);
                r * var.sqrt()
            } else {
                r
            }
        })
        .collect()
}

pub(crate) fn apply_decay(tables: &LinearTables, f: &mut SpectralField) {
    let m = tables.decay.len();
    for comp in f.coeffs_mut().chunks_mut(m) {
        for (c, d) in comp.iter_mut().zip(&tables.decay) {
            *c *= d;
        }
    }
}

pub(crate) fn add_noise(model: &NoiseModel, f: &mut SpectralField, sig: &[f64], gain: &[f64], dw: &[f64]) {
    let w: Vec<f64> = sig
        .iter()
        .zip(gain)
        .zip(dw)
        .map(|((s, g), x)| s * g * x)
        .collect();
    model.basis().accumulate(f, &w);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// `z` by the exact-variance OU step, `u` by the deterministic step.
    Split,
    /// One Euler–Maruyama equation for `v`; `z` stays zero.
    Direct,
}

/// A running trajectory.
#[derive(Clone)]
pub struct Simulation {
    grid: TorusGrid,
    model: NoiseModel,
    tables: LinearTables,
    gain: Vec<f64>,
    forcing: Forcing,
    source: IncrementSource,
    scheme: Scheme,
    nonlinear: bool,
    dt: f64,
    steps: usize,
    step: usize,
    u: SpectralField,
    z: SpectralField,
    dw: Vec<f64>,
    hasher: BlobHasher,
    abort_energy: f64,
}

impl Simulation {
    /// Builds a trajectory for `cfg` at Yosida level `n`, starting from `v0`.
    pub fn new(
        cfg: &SolverConfig,
        model: &NoiseModel,
        v0: &SpectralField,
        n: YosidaLevel,
        source: IncrementSource,
        scheme: Scheme,
    ) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.grid()?;
        if model.grid() != &grid || v0.grid() != &grid {
            return Err(SnsError::GridMismatch);
        }
        if source.modes() != model.modes() {
            return Err(SnsError::LengthMismatch {
                expected: model.modes(),
                got: source.modes(),
            });
        }
        if (source.dt() - cfg.dt).abs() > 1e-15 * cfg.dt {
            return Err(SnsError::InvalidConfig(format!(
                "increments have step {} but the run uses {}",
                source.dt(),
                cfg.dt
            )));
        }
        let steps = cfg.steps()?;
        Ok(Self {
            tables: LinearTables::new(&grid, cfg.nu, cfg.dt),
            gain: noise_gain(model, n.validate()?, cfg.nu, cfg.dt, scheme == Scheme::Split),
            forcing: cfg.resolve_forcing(&grid)?,
            model: model.clone(),
            source,
            scheme,
            nonlinear: cfg.nonlinear,
            dt: cfg.dt,
            steps,
            step: 0,
            u: v0.clone(),
            z: SpectralField::zeros(&grid),
            dw: vec![0.0; model.modes()],
            hasher: BlobHasher::new((steps * model.modes() * 8) as u64),
            abort_energy: cfg.abort_energy.unwrap_or(f64::INFINITY),
            grid,
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn total_steps(&self) -> usize {
        self.steps
    }

    pub fn is_done(&self) -> bool {
        self.step >= self.steps
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn u(&self) -> &SpectralField {
        &self.u
    }

    pub fn z(&self) -> &SpectralField {
        &self.z
    }

    pub fn v(&self) -> SpectralField {
        &self.u + &self.z
    }

    pub fn model(&self) -> &NoiseModel {
        &self.model
    }

    pub fn forcing_at(&self, t: f64) -> Option<&SpectralField> {
        self.forcing.at(t)
    }

    /// Increments consumed by the most recent step.
    pub fn last_increments(&self) -> &[f64] {
        &self.dw
    }

    /// Hash of every increment consumed so far (complete once the run ends).
    pub fn increments_hash(&self) -> String {
        self.hasher.clone().finish_partial()
    }

    /// Advances one step. The nonlinearity and the noise coefficients are
    /// frozen at the current `v = u + z`.
    pub fn advance(&mut self) -> Result<StepEnergy> {
        if self.is_done() {
            return Err(SnsError::InvalidConfig("trajectory already reached T".into()));
        }
        let t = self.time();
        self.source.fill(self.step, &mut self.dw)?;
        self.hasher.update_f64s(&self.dw);
        let v = self.v();
        let sig = self.model.sigmas(&v);
        let force = drift(&v, self.forcing.at(t), self.nonlinear)?;
        let energy = advance_linear(&self.tables, self.dt, &mut self.u, force.as_deref());
        match self.scheme {
            Scheme::Split => {
                apply_decay(&self.tables, &mut self.z);
                add_noise(&self.model, &mut self.z, &sig, &self.gain, &self.dw);
            }
            Scheme::Direct => add_noise(&self.model, &mut self.u, &sig, &self.gain, &self.dw),
        }
        self.u.set_solenoidal(true);
        self.step += 1;
        let eu = self.u.energy();
        let ez = self.z.energy();
        for (name, value) in [("|u|_L2^2", eu), ("|z|_L2^2", ez)] {
            if !value.is_finite() || value > self.abort_energy {
                return Err(SnsError::NumericalAbort {
                    step: self.step,
                    quantity: name.into(),
                    value,
                });
            }
        }
        Ok(energy)
    }
}
