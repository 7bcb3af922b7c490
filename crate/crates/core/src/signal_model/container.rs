//! Snapshot serialization.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! magic   b"SDSN"
//! version u32 = 1
//! P, N, Q u64
//! slots   N x u64
//! noise   f64
//! payload Q x N x (re f64, im f64), row-major
//! ```

use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::SlowTimeSnapshots;
use crate::array_design::EmissionPattern;
use crate::error::{Error, Module, Result};

const MAGIC: &[u8; 4] = b"SDSN";
const VERSION: u32 = 1;

pub fn write_snapshots_binary<W: Write>(snap: &SlowTimeSnapshots, mut w: W) -> Result<()> {
    let pat = snap.pattern();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for v in [pat.window_size(), pat.len(), snap.q()] {
        w.write_all(&(v as u64).to_le_bytes())?;
    }
    for &s in pat.slots() {
        w.write_all(&(s as u64).to_le_bytes())?;
    }
    w.write_all(&snap.noise_power().to_le_bytes())?;
    let data = snap.data();
    for k in 0..data.nrows() {
        for j in 0..data.ncols() {
            let v = data[(k, j)];
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
    }
    Ok(())
}

fn format_err(reason: impl Into<String>) -> Error {
    Error::Format {
        module: Module::SignalModel,
        reason: reason.into(),
    }
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Reads a container written by [`write_snapshots_binary`].
///
/// `pattern` must be the pattern the data was recorded with; its window and
/// slots are checked against the header.
pub fn read_snapshots_binary<R: Read>(
    pattern: &EmissionPattern,
    mut r: R,
) -> Result<SlowTimeSnapshots> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(format_err("bad magic, not a snapshot container"));
    }
    let mut vb = [0u8; 4];
    r.read_exact(&mut vb)?;
    let version = u32::from_le_bytes(vb);
    if version != VERSION {
        return Err(format_err(format!(
            "unsupported container version {version}"
        )));
    }
    let p = read_u64(&mut r)? as usize;
    let n = read_u64(&mut r)? as usize;
    let q = read_u64(&mut r)? as usize;
    let slots = (0..n)
        .map(|_| read_u64(&mut r).map(|s| s as usize))
        .collect::<Result<Vec<_>>>()?;
    if p != pattern.window_size() || slots != pattern.slots() {
        return Err(format_err("header slots do not match the supplied pattern"));
    }
    let noise = read_f64(&mut r)?;
    let mut data = DMatrix::zeros(q, n);
    for k in 0..q {
        for j in 0..n {
            let re = read_f64(&mut r)?;
            let im = read_f64(&mut r)?;
            data[(k, j)] = Complex64::new(re, im);
        }
    }
    SlowTimeSnapshots::new(pattern.clone(), data, noise)
}

/// Long-format CSV: `snapshot,slot,re,im`.
pub fn snapshots_to_csv(snap: &SlowTimeSnapshots) -> String {
    let mut out = String::from("snapshot,slot,re,im\n");
    let data = snap.data();
    for k in 0..data.nrows() {
        for (j, s) in snap.pattern().slots().iter().enumerate() {
            let v = data[(k, j)];
            out.push_str(&format!("{k},{s},{:e},{:e}\n", v.re, v.im));
        }
    }
    out
}
