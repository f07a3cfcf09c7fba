//! Multi-dimensional FFTs on the torus grid.
//!
//! Convention: a physical field is `v(x) = Σ_k v̂(k) e^{i k·x}`, so the forward
//! transform carries the `1/N^d` factor and the inverse is unnormalized.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::TorusGrid;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// FFT plans and scratch buffers for one grid. Not shared between threads;
/// every worker owns its own.
pub struct FourierWorkspace {
    grid: TorusGrid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    lines: Vec<Complex64>,
    buf: Vec<Complex64>,
}

#[derive(Clone, Copy)]
enum Dir {
    Forward,
    Inverse,
}

impl FourierWorkspace {
    pub fn new(grid: &TorusGrid) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.n();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Self {
            grid: grid.clone(),
            fwd,
            inv,
            scratch: vec![ZERO; scratch_len],
            lines: vec![ZERO; grid.size()],
            buf: vec![ZERO; grid.size()],
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    fn transform(&mut self, data: &mut [Complex64], dir: Dir) {
        let n = self.grid.n();
        let d = self.grid.dim();
        debug_assert_eq!(data.len(), self.grid.size());
        let plan = match dir {
            Dir::Forward => self.fwd.clone(),
            Dir::Inverse => self.inv.clone(),
        };
        // contiguous axis
        plan.process_with_scratch(data, &mut self.scratch);
        for axis in 0..d - 1 {
            let stride = n.pow((d - 1 - axis) as u32);
            let block = n * stride;
            for chunk in data.chunks_mut(block) {
                let lines = &mut self.lines[..block];
                for m in 0..n {
                    let row = &chunk[m * stride..(m + 1) * stride];
                    for (i, &c) in row.iter().enumerate() {
                        lines[i * n + m] = c;
                    }
                }
                plan.process_with_scratch(lines, &mut self.scratch);
                for m in 0..n {
                    let row = &mut chunk[m * stride..(m + 1) * stride];
                    for (i, c) in row.iter_mut().enumerate() {
                        *c = lines[i * n + m];
                    }
                }
            }
        }
    }

    /// In-place forward transform, normalized so that `data` becomes `v̂`.
    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.transform(data, Dir::Forward);
        let s = 1.0 / self.grid.size() as f64;
        for c in data.iter_mut() {
            *c *= s;
        }
    }

    /// In-place inverse transform (spectral coefficients to grid values).
    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.transform(data, Dir::Inverse);
    }

    /// Evaluates one or two Hermitian spectra on the physical grid with a
    /// single complex transform.
    pub fn to_physical_pair(
        &mut self,
        a: &[Complex64],
        b: Option<&[Complex64]>,
        out_a: &mut [f64],
        out_b: Option<&mut [f64]>,
    ) {
        let mut buf = std::mem::take(&mut self.buf);
        match b {
            Some(b) => {
                for ((o, &x), &y) in buf.iter_mut().zip(a).zip(b) {
                    *o = Complex64::new(x.re - y.im, x.im + y.re);
                }
            }
            None => buf.copy_from_slice(a),
        }
        self.inverse(&mut buf);
        for (o, c) in out_a.iter_mut().zip(&buf) {
            *o = c.re;
        }
        if let Some(out_b) = out_b {
            for (o, c) in out_b.iter_mut().zip(&buf) {
                *o = c.im;
            }
        }
        self.buf = buf;
    }

    /// Transforms one or two real grid functions to their spectra with a
    /// single complex transform.
    pub fn to_spectral_pair(
        &mut self,
        a: &[f64],
        b: Option<&[f64]>,
        out_a: &mut [Complex64],
        out_b: Option<&mut [Complex64]>,
    ) {
        let mut buf = std::mem::take(&mut self.buf);
        match b {
            Some(b) => {
                for ((o, &x), &y) in buf.iter_mut().zip(a).zip(b) {
                    *o = Complex64::new(x, y);
                }
            }
            None => {
                for (o, &x) in buf.iter_mut().zip(a) {
                    *o = Complex64::new(x, 0.0);
                }
            }
        }
        self.forward(&mut buf);
        match out_b {
            Some(out_b) => {
                let neg = &self.grid.tables().neg;
                for idx in 0..buf.len() {
                    let c = buf[idx];
                    let cm = buf[neg[idx] as usize].conj();
                    out_a[idx] = (c + cm) * 0.5;
                    let diff = c - cm;
                    // (c - conj c(-k)) / 2i
                    out_b[idx] = Complex64::new(diff.im * 0.5, -diff.re * 0.5);
                }
            }
            None => out_a.copy_from_slice(&buf),
        }
        self.buf = buf;
    }
}

thread_local! {
    static WORKSPACES: RefCell<Vec<FourierWorkspace>> = const { RefCell::new(Vec::new()) };
}

/// Runs `f` with a cached per-thread workspace for `grid`. Re-entrant calls
/// get a fresh workspace.
pub fn with_workspace<R>(grid: &TorusGrid, f: impl FnOnce(&mut FourierWorkspace) -> R) -> R {
    let cached = WORKSPACES.with(|cell| {
        let mut list = cell.borrow_mut();
        list.iter()
            .position(|w| w.grid == *grid)
            .map(|i| list.swap_remove(i))
    });
    let mut ws = cached.unwrap_or_else(|| FourierWorkspace::new(grid));
    let out = f(&mut ws);
    WORKSPACES.with(|cell| {
        let mut list = cell.borrow_mut();
        if list.len() >= 8 {
            list.remove(0);
        }
        list.push(ws);
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn forward_recovers_single_mode() {
        let g = TorusGrid::new(2, 8).unwrap();
        let mut ws = FourierWorkspace::new(&g);
        let mut data: Vec<Complex64> = (0..g.size())
            .map(|i| {
                let x = g.point(i);
                Complex64::new((x[0] + 2.0 * x[1]).cos(), 0.0)
            })
            .collect();
        ws.forward(&mut data);
        let k = g.index_of(&[1, 2]).unwrap();
        let km = g.index_of(&[-1, -2]).unwrap();
        for (i, c) in data.iter().enumerate() {
            let want = if i == k || i == km { 0.5 } else { 0.0 };
            assert!((c.re - want).abs() < 1e-14 && c.im.abs() < 1e-14, "{i} {c}");
        }
    }

    #[test]
    fn pair_transforms_roundtrip_3d() {
        let g = TorusGrid::new(3, 8).unwrap();
        let mut ws = FourierWorkspace::new(&g);
        let a: Vec<f64> = (0..g.size())
            .map(|i| {
                let x = g.point(i);
                (x[0] - x[2]).sin() + 0.3 * (2.0 * x[1]).cos()
            })
            .collect();
        let b: Vec<f64> = (0..g.size())
            .map(|i| {
                let x = g.point(i);
                (x[1] + x[2] + 0.25 * PI).cos()
            })
            .collect();
        let mut ha = vec![ZERO; g.size()];
        let mut hb = vec![ZERO; g.size()];
        ws.to_spectral_pair(&a, Some(&b), &mut ha, Some(&mut hb));
        let mut ra = vec![0.0; g.size()];
        let mut rb = vec![0.0; g.size()];
        ws.to_physical_pair(&ha, Some(&hb), &mut ra, Some(&mut rb));
        for i in 0..g.size() {
            assert!((ra[i] - a[i]).abs() < 1e-13);
            assert!((rb[i] - b[i]).abs() < 1e-13);
        }
    }
}
