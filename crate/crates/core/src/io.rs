//! SNSF binary container.
//!
//! Layout: the bytes `SNSF`, a little-endian `u32` header length, a JSON
//! header, then the payload as little-endian `f64`s. Field payloads hold
//! `(re, im)` pairs, component-major, each component in row-major FFT index
//! order. Wiener payloads hold the increments row-major over `(step, mode)`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SnsError};
use crate::noise::WienerPath;
use crate::spectral::{GridSpec, SpectralField, TorusGrid};

pub const MAGIC: &[u8; 4] = b"SNSF";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SnsfHeader {
    Field {
        d: usize,
        #[serde(rename = "N")]
        n: usize,
        #[serde(rename = "L")]
        length: f64,
        components: usize,
        time: f64,
        solenoidal: bool,
    },
    Wiener {
        dt: f64,
        steps: usize,
        modes: usize,
        seed: u64,
    },
}

pub fn write_container<W: Write>(mut w: W, header: &SnsfHeader, payload: &[f64]) -> Result<()> {
    let json = serde_json::to_vec(header)?;
    w.write_all(MAGIC)?;
    w.write_all(&(json.len() as u32).to_le_bytes())?;
    w.write_all(&json)?;
    let mut buf = Vec::with_capacity(8 * payload.len());
    for x in payload {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_container<R: Read>(mut r: R) -> Result<(SnsfHeader, Vec<f64>)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| SnsError::Format("truncated magic".into()))?;
    if &magic != MAGIC {
        return Err(SnsError::Format(format!("bad magic {magic:?}")));
    }
    let mut len = [0u8; 4];
    r.read_exact(&mut len)
        .map_err(|_| SnsError::Format("truncated header length".into()))?;
    let mut json = vec![0u8; u32::from_le_bytes(len) as usize];
    r.read_exact(&mut json)
        .map_err(|_| SnsError::Format("truncated header".into()))?;
    let header: SnsfHeader = serde_json::from_slice(&json)
        .map_err(|e| SnsError::Format(format!("header: {e}")))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(SnsError::Format("payload is not a whole number of f64".into()));
    }
    let payload = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok((header, payload))
}

pub fn field_to_bytes(field: &SpectralField, time: f64) -> Result<Vec<u8>> {
    let grid = field.grid();
    let header = SnsfHeader::Field {
        d: grid.dim(),
        n: grid.n(),
        length: grid.length(),
        components: grid.dim(),
        time,
        solenoidal: field.is_solenoidal(),
    };
    let payload: Vec<f64> = field.coeffs().iter().flat_map(|c| [c.re, c.im]).collect();
    let mut out = Vec::new();
    write_container(&mut out, &header, &payload)?;
    Ok(out)
}

/// Decodes a field container; returns the field and its time stamp.
pub fn field_from_bytes(bytes: &[u8]) -> Result<(SpectralField, f64)> {
    let (header, payload) = read_container(bytes)?;
    match header {
        SnsfHeader::Field {
            d,
            n,
            length,
            components,
            time,
            solenoidal,
        } => {
            if components != d {
                return Err(SnsError::Format(format!(
                    "{components} components on a {d}-dimensional grid"
                )));
            }
            let mut spec = GridSpec::new(d, n);
            spec.length = length;
            let grid = TorusGrid::from_spec(spec)?;
            let expected = 2 * d * grid.size();
            if payload.len() != expected {
                return Err(SnsError::Format(format!(
                    "payload holds {} values, expected {expected}",
                    payload.len()
                )));
            }
            let coeffs = payload
                .chunks_exact(2)
                .map(|p| Complex64::new(p[0], p[1]))
                .collect();
            let mut field = SpectralField::from_coefficients(&grid, coeffs, solenoidal)?;
            if solenoidal {
                field.set_solenoidal(field.divergence_defect() <= 1e-10 * field.coeff_norm().max(1e-300));
            }
            Ok((field, time))
        }
        SnsfHeader::Wiener { .. } => Err(SnsError::Format("expected a field, found a Wiener path".into())),
    }
}

pub fn write_field(path: &Path, field: &SpectralField, time: f64) -> Result<()> {
    let bytes = field_to_bytes(field, time)?;
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<(SpectralField, f64)> {
    let bytes = std::fs::read(path).map_err(|e| {
        SnsError::InvalidConfig(format!("cannot read field file {}: {e}", path.display()))
    })?;
    field_from_bytes(&bytes)
}

pub fn write_wiener(path: &Path, w: &WienerPath) -> Result<()> {
    let header = SnsfHeader::Wiener {
        dt: w.dt,
        steps: w.steps,
        modes: w.modes,
        seed: w.seed,
    };
    write_container(BufWriter::new(File::create(path)?), &header, w.increments())
}

pub fn read_wiener(path: &Path) -> Result<WienerPath> {
    let (header, payload) = read_container(BufReader::new(File::open(path)?))?;
    match header {
        SnsfHeader::Wiener {
            dt,
            steps,
            modes,
            seed,
        } => WienerPath::from_increments(dt, steps, modes, seed, payload)
            .map_err(|e| SnsError::Format(e.to_string())),
        SnsfHeader::Field { .. } => Err(SnsError::Format("expected a Wiener path, found a field".into())),
    }
}
