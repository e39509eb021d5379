//! Binary checkpoint container.
//!
//! Layout:
//!
//! ```text
//! b"HLX1"                      magic
//! u32 (LE)                     header length in bytes
//! header                       UTF-8 JSON, see `Header`
//! f64 pairs (LE)               (re, im) of every coefficient, u components
//!                              then b components, each N^dim entries in
//!                              row-major FFT order (axis 0 slowest)
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::MhdState;
use crate::spectral::{Grid, SpectralField, TorusSpec};

pub const MAGIC: &[u8; 4] = b"HLX1";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub version: u32,
    pub torus: TorusSpec,
    pub t: f64,
    pub fields: Vec<String>,
    pub components: usize,
    pub layout: String,
    pub encoding: String,
}

impl Header {
    fn for_state(state: &MhdState) -> Self {
        Header {
            version: VERSION,
            torus: *state.grid().spec(),
            t: state.t,
            fields: vec!["u".into(), "b".into()],
            components: state.grid().dim(),
            layout: "row-major, axis 0 slowest, FFT index order".into(),
            encoding: "complex128 little-endian (re, im)".into(),
        }
    }
}

pub fn write_checkpoint<W: Write>(state: &MhdState, mut w: W) -> Result<()> {
    let header = serde_json::to_vec(&Header::for_state(state))?;
    w.write_all(MAGIC)?;
    w.write_all(&(header.len() as u32).to_le_bytes())?;
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(16 * state.grid().len());
    for field in [&state.u, &state.b] {
        for comp in field.components() {
            buf.clear();
            for c in comp {
                buf.extend_from_slice(&c.re.to_le_bytes());
                buf.extend_from_slice(&c.im.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
    }
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<MhdState> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode(&bytes)
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::Corrupt(msg.into())
}

fn decode(bytes: &[u8]) -> Result<MhdState> {
    if bytes.len() < 8 || &bytes[..4] != MAGIC {
        return Err(corrupt("missing HLX1 magic"));
    }
    let hlen = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
    let body = bytes
        .get(8..8 + hlen)
        .ok_or_else(|| corrupt("truncated header"))?;
    let header: Header =
        serde_json::from_slice(body).map_err(|e| corrupt(format!("bad header: {e}")))?;
    if header.version != VERSION {
        return Err(corrupt(format!("unsupported version {}", header.version)));
    }
    header
        .torus
        .validate()
        .map_err(|e| corrupt(format!("bad torus: {e}")))?;
    if header.components != header.torus.dim || header.fields != ["u", "b"] {
        return Err(corrupt("unexpected field layout"));
    }
    let grid = Grid::new(header.torus)?;
    let n = grid.len();
    let data = &bytes[8 + hlen..];
    let expected = 2 * header.components * n * 16;
    if data.len() != expected {
        return Err(corrupt(format!(
            "expected {expected} data bytes, found {}",
            data.len()
        )));
    }
    let mut comps: Vec<Vec<Complex64>> = data
        .chunks_exact(16 * n)
        .map(|chunk| {
            chunk
                .chunks_exact(16)
                .map(|c| {
                    let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                    let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                    Complex64::new(re, im)
                })
                .collect()
        })
        .collect();
    if comps.iter().flatten().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(corrupt("non-finite coefficient"));
    }
    let b = comps.split_off(header.components);
    let u = SpectralField::from_coefficients(&grid, comps)?;
    let b = SpectralField::from_coefficients(&grid, b)?;
    MhdState::new(u, b, header.t)
}

pub fn save(state: &MhdState, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_checkpoint(state, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<MhdState> {
    let bytes = fs::read(path)?;
    decode(&bytes)
}
