use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SnsError};

/// Largest resolution accepted for three-dimensional grids.
pub const MAX_N_3D: usize = 64;

/// Plain description of a periodic grid, used for configuration files and
/// equality checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default = "default_dealias")]
    pub dealias_fraction: f64,
}

fn default_length() -> f64 {
    2.0 * PI
}

fn default_dealias() -> f64 {
    2.0 / 3.0
}

impl GridSpec {
    pub fn new(dim: usize, n: usize) -> Self {
        Self {
            dim,
            n,
            length: default_length(),
            dealias_fraction: default_dealias(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(SnsError::InvalidGrid(format!(
                "dimension must be 2 or 3, got {}",
                self.dim
            )));
        }
        if self.n < 8 || self.n % 2 != 0 {
            return Err(SnsError::InvalidGrid(format!(
                "modes per axis must be even and >= 8, got {}",
                self.n
            )));
        }
        if self.dim == 3 && self.n > MAX_N_3D {
            return Err(SnsError::InvalidGrid(format!(
                "3D grids are limited to N <= {MAX_N_3D}, got {}",
                self.n
            )));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(SnsError::InvalidGrid(format!(
                "period must be positive, got {}",
                self.length
            )));
        }
        if !(self.dealias_fraction > 0.0 && self.dealias_fraction <= 1.0) {
            return Err(SnsError::InvalidGrid(format!(
                "dealias fraction must lie in (0, 1], got {}",
                self.dealias_fraction
            )));
        }
        Ok(())
    }
}

/// Precomputed wavenumber tables for one grid. Indices are row-major over
/// FFT order on every axis, axis 0 slowest.
pub(crate) struct GridTables {
    pub spec: GridSpec,
    pub size: usize,
    pub scale: f64,
    pub int_k: Vec<[i32; 3]>,
    pub kvec: Vec<[f64; 3]>,
    pub ksq: Vec<f64>,
    /// k != 0 and no axis sits on the Nyquist index.
    pub retained: Vec<bool>,
    /// Retained and inside the dealiasing band.
    pub dealias: Vec<bool>,
    /// Index of -k.
    pub neg: Vec<u32>,
}

/// Periodic box `[0, L)^d` with `N` Fourier modes per axis.
///
/// Wavenumbers are `k ∈ {-N/2+1, …, N/2}^d` (integer labels; the physical
/// wavevector is `2π k / L`). The mean mode and every Nyquist mode are kept
/// at zero by all field constructors, so Hermitian symmetry is well defined
/// on the remaining ones.
#[derive(Clone)]
pub struct TorusGrid {
    tables: Arc<GridTables>,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid")
            .field("dim", &self.dim())
            .field("n", &self.n())
            .field("length", &self.length())
            .field("dealias_fraction", &self.dealias_fraction())
            .finish()
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.tables, &other.tables) || self.tables.spec == other.tables.spec
    }
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        Self::from_spec(GridSpec::new(dim, n))
    }

    pub fn from_spec(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            tables: Arc::new(GridTables::build(spec)),
        })
    }

    pub fn with_length(self, length: f64) -> Result<Self> {
        Self::from_spec(GridSpec {
            length,
            ..self.spec()
        })
    }

    pub fn with_dealias_fraction(self, dealias_fraction: f64) -> Result<Self> {
        Self::from_spec(GridSpec {
            dealias_fraction,
            ..self.spec()
        })
    }

    pub fn spec(&self) -> GridSpec {
        self.tables.spec
    }

    pub fn dim(&self) -> usize {
        self.tables.spec.dim
    }

    pub fn n(&self) -> usize {
        self.tables.spec.n
    }

    pub fn length(&self) -> f64 {
        self.tables.spec.length
    }

    pub fn dealias_fraction(&self) -> f64 {
        self.tables.spec.dealias_fraction
    }

    /// Number of grid points (and Fourier modes) per component.
    pub fn size(&self) -> usize {
        self.tables.size
    }

    /// `L^d`.
    pub fn volume(&self) -> f64 {
        self.length().powi(self.dim() as i32)
    }

    /// Quadrature weight of one physical grid point, `(L/N)^d`.
    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.size() as f64
    }

    /// `2π / L`.
    pub fn wavenumber_scale(&self) -> f64 {
        self.tables.scale
    }

    /// Largest integer wavenumber kept by the dealiasing mask.
    pub fn dealias_cutoff(&self) -> usize {
        dealias_cutoff(&self.tables.spec)
    }

    pub fn integer_wavenumber(&self, idx: usize) -> [i32; 3] {
        self.tables.int_k[idx]
    }

    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        self.tables.kvec[idx]
    }

    /// Physical `|k|²` at a flat index.
    pub fn ksq(&self, idx: usize) -> f64 {
        self.tables.ksq[idx]
    }

    pub fn is_retained(&self, idx: usize) -> bool {
        self.tables.retained[idx]
    }

    pub fn in_dealias_band(&self, idx: usize) -> bool {
        self.tables.dealias[idx]
    }

    pub fn neg_index(&self, idx: usize) -> usize {
        self.tables.neg[idx] as usize
    }

    /// Flat index of an integer wavenumber, if representable.
    pub fn index_of(&self, k: &[i32]) -> Option<usize> {
        let n = self.n() as i32;
        if k.len() != self.dim() {
            return None;
        }
        let mut idx = 0usize;
        for &ki in k {
            if ki <= -n / 2 || ki > n / 2 {
                return None;
            }
            let i = ki.rem_euclid(n) as usize;
            idx = idx * self.n() + i;
        }
        Some(idx)
    }

    pub(crate) fn tables(&self) -> &GridTables {
        &self.tables
    }

    /// Physical coordinates of grid point `idx`.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let n = self.n();
        let h = self.length() / n as f64;
        let mut rem = idx;
        let mut x = [0.0; 3];
        for axis in (0..self.dim()).rev() {
            x[axis] = (rem % n) as f64 * h;
            rem /= n;
        }
        x
    }
}

fn dealias_cutoff(spec: &GridSpec) -> usize {
    let c = (spec.dealias_fraction * spec.n as f64 / 2.0 + 1e-9).floor() as usize;
    c.min(spec.n / 2 - 1)
}

impl GridTables {
    fn build(spec: GridSpec) -> Self {
        let n = spec.n;
        let d = spec.dim;
        let size = n.pow(d as u32);
        let scale = 2.0 * PI / spec.length;
        let cutoff = dealias_cutoff(&spec) as i32;
        let half = (n / 2) as i32;
        let mut int_k = Vec::with_capacity(size);
        let mut kvec = Vec::with_capacity(size);
        let mut ksq = Vec::with_capacity(size);
        let mut retained = Vec::with_capacity(size);
        let mut dealias = Vec::with_capacity(size);
        let mut neg = Vec::with_capacity(size);
        for idx in 0..size {
            let mut rem = idx;
            let mut k = [0i32; 3];
            let mut negi = [0usize; 3];
            for axis in (0..d).rev() {
                let i = rem % n;
                rem /= n;
                k[axis] = if i <= n / 2 { i as i32 } else { i as i32 - n as i32 };
                negi[axis] = (n - i) % n;
            }
            let kv = [
                k[0] as f64 * scale,
                k[1] as f64 * scale,
                k[2] as f64 * scale,
            ];
            let nyq = k.iter().take(d).any(|&ki| ki == half);
            let zero = k.iter().all(|&ki| ki == 0);
            let keep = !nyq && !zero;
            let band = keep && k.iter().take(d).all(|&ki| ki.abs() <= cutoff);
            let mut nidx = 0usize;
            for &ni in negi.iter().take(d) {
                nidx = nidx * n + ni;
            }
            int_k.push(k);
            kvec.push(kv);
            ksq.push(kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2]);
            retained.push(keep);
            dealias.push(band);
            neg.push(nidx as u32);
        }
        Self {
            spec,
            size,
            scale,
            int_k,
            kvec,
            ksq,
            retained,
            dealias,
            neg,
        }
    }
}
