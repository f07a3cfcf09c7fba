//! Diagonal Fourier-multiplier operators and the Leray projector.

use std::fmt;

use num_complex::Complex64;
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use super::field::SpectralField;
use crate::error::{Result, SnsError};

/// Resolvent smoothing level `n` of `R_n = n (n I + A)^{-1}`; `Infinite`
/// means no smoothing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum YosidaLevel {
    Finite(u64),
    Infinite,
}

impl YosidaLevel {
    pub fn finite(n: u64) -> Result<Self> {
        if n == 0 {
            Err(SnsError::ZeroYosidaLevel)
        } else {
            Ok(Self::Finite(n))
        }
    }

    /// Multiplier `n / (n + |k|²)`.
    #[inline]
    pub fn multiplier(self, ksq: f64) -> f64 {
        match self {
            Self::Finite(n) => {
                let n = n as f64;
                n / (n + ksq)
            }
            Self::Infinite => 1.0,
        }
    }

    pub fn validate(self) -> Result<Self> {
        match self {
            Self::Finite(0) => Err(SnsError::ZeroYosidaLevel),
            other => Ok(other),
        }
    }
}

impl fmt::Display for YosidaLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(n) => write!(f, "{n}"),
            Self::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for YosidaLevel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(n) => s.serialize_u64(*n),
            Self::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for YosidaLevel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = YosidaLevel;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a positive integer, \"inf\" or null")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<YosidaLevel, E> {
                YosidaLevel::finite(v).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<YosidaLevel, E> {
                if v <= 0 {
                    Err(E::custom("Yosida level must be positive"))
                } else {
                    Ok(YosidaLevel::Finite(v as u64))
                }
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<YosidaLevel, E> {
                match v {
                    "inf" | "infinity" | "none" => Ok(YosidaLevel::Infinite),
                    other => other
                        .parse::<u64>()
                        .map_err(E::custom)
                        .and_then(|n| YosidaLevel::finite(n).map_err(E::custom)),
                }
            }

            fn visit_unit<E: de::Error>(self) -> std::result::Result<YosidaLevel, E> {
                Ok(YosidaLevel::Infinite)
            }

            fn visit_none<E: de::Error>(self) -> std::result::Result<YosidaLevel, E> {
                Ok(YosidaLevel::Infinite)
            }
        }
        d.deserialize_any(V)
    }
}

/// Leray projector `Π`: removes the component of `v̂(k)` along `k`.
pub fn leray_project(field: &SpectralField) -> SpectralField {
    let mut out = field.clone();
    leray_project_in_place(&mut out);
    out
}

pub fn leray_project_in_place(field: &mut SpectralField) {
    let grid = field.grid().clone();
    let tables = grid.tables();
    let d = grid.dim();
    let m = grid.size();
    let coeffs = field.coeffs_mut();
    for idx in 0..m {
        if !tables.retained[idx] {
            continue;
        }
        let kv = tables.kvec[idx];
        let inv = 1.0 / tables.ksq[idx];
        let mut dot = Complex64::new(0.0, 0.0);
        for c in 0..d {
            dot += coeffs[c * m + idx] * kv[c];
        }
        let dot = dot * inv;
        for c in 0..d {
            coeffs[c * m + idx] -= dot * kv[c];
        }
    }
    field.set_solenoidal(true);
}

/// Bessel potential `J^s = (I - Δ)^{s/2}`.
pub fn bessel_potential(field: &SpectralField, s: f64) -> SpectralField {
    if s == 0.0 {
        return field.clone();
    }
    field.apply_multiplier(|ksq| (1.0 + ksq).powf(0.5 * s))
}

/// Stokes semigroup `e^{-t ν A}`.
pub fn stokes_semigroup(field: &SpectralField, t: f64, nu: f64) -> Result<SpectralField> {
    if t < 0.0 || t.is_nan() {
        return Err(SnsError::NegativeTime(t));
    }
    if !(nu > 0.0) {
        return Err(SnsError::InvalidConfig(format!(
            "viscosity must be positive, got {nu}"
        )));
    }
    Ok(field.apply_multiplier(|ksq| (-nu * ksq * t).exp()))
}

/// Yosida smoother `R_n = n (n I + A)^{-1}`.
pub fn yosida_smoother(field: &SpectralField, n: YosidaLevel) -> Result<SpectralField> {
    let n = n.validate()?;
    Ok(field.apply_multiplier(|ksq| n.multiplier(ksq)))
}

/// `Σ_k (1+|k|²)^{s/2} â(k) · conj((1+|k|²)^{-s/2} b̂(k))`, real part, times the
/// volume: the `H^{s} - H^{-s}` bracket, which equals the `L²` pairing.
pub fn duality_pairing(a: &SpectralField, b: &SpectralField, s: f64) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(SnsError::GridMismatch);
    }
    let grid = a.grid();
    let m = grid.size();
    let mut acc = 0.0;
    for c in 0..grid.dim() {
        let ac = a.component(c);
        let bc = b.component(c);
        for idx in 0..m {
            if !grid.is_retained(idx) {
                continue;
            }
            let w = 1.0 + grid.ksq(idx);
            let up = w.powf(0.5 * s);
            let down = w.powf(-0.5 * s);
            acc += ((ac[idx] * up) * (bc[idx] * down).conj()).re;
        }
    }
    Ok(acc * grid.volume())
}

/// Plain `L²` inner product (no multiplier work).
pub fn l2_inner(a: &SpectralField, b: &SpectralField) -> f64 {
    assert!(a.grid() == b.grid(), "inner product on mismatched grids");
    let vol = a.grid().volume();
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| (x * y.conj()).re)
        .sum::<f64>()
        * vol
}

/// `H^s` inner product `(J^s a, J^s b)_{L²}`.
pub fn sobolev_inner(a: &SpectralField, b: &SpectralField, s: f64) -> f64 {
    assert!(a.grid() == b.grid(), "inner product on mismatched grids");
    let grid = a.grid();
    let m = grid.size();
    let weights: Vec<f64> = (0..m).map(|i| (1.0 + grid.ksq(i)).powf(s)).collect();
    let mut acc = 0.0;
    for c in 0..grid.dim() {
        for ((x, y), w) in a.component(c).iter().zip(b.component(c)).zip(&weights) {
            acc += (x * y.conj()).re * w;
        }
    }
    acc * grid.volume()
}

/// Sup over retained grid wavenumbers of a radial multiplier `f(|k|²)`.
pub fn discrete_multiplier_sup(grid: &super::grid::TorusGrid, f: impl Fn(f64) -> f64) -> f64 {
    let mut seen = std::collections::BTreeSet::new();
    let mut best = f64::NEG_INFINITY;
    for idx in 0..grid.size() {
        if !grid.is_retained(idx) {
            continue;
        }
        let k = grid.integer_wavenumber(idx);
        let key: i64 = k.iter().map(|&x| (x as i64) * (x as i64)).sum();
        if seen.insert(key) {
            best = best.max(f(grid.ksq(idx)));
        }
    }
    best
}
