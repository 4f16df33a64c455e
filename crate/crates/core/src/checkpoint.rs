//! Trajectory checkpoints: one little-endian binary record per stored time
//! plus a JSON manifest.
//!
//! Record layout (all little-endian):
//!
//! | bytes | content |
//! |-------|---------|
//! | 8 | magic `KPLBREC1` |
//! | 4 | scheme id (`u32`) |
//! | 4 | reserved, zero |
//! | 8 + 8 | `nx`, `ny` (`u64`) |
//! | 8 + 8 | `lx`, `ly` (`f64`) |
//! | 8 | `t` (`f64`) |
//! | 16 per mode | `(re, im)` pairs in row-major `(kx, ky)` order |

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::GridSpec;
use crate::solver::{NodeRecord, Scheme, SolveConfig, Trajectory};

const MAGIC: &[u8; 8] = b"KPLBREC1";
const HEADER_LEN: usize = 8 + 4 + 4 + 16 + 16 + 8;
pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordEntry {
    pub file: String,
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub scheme: Scheme,
    pub config: SolveConfig,
    pub records: Vec<RecordEntry>,
    pub nodes: Vec<NodeRecord>,
    /// Hash of the experiment configuration that produced the run, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

/// Encode one field as a binary record.
pub fn encode_record(field: &Field, scheme: Scheme) -> Vec<u8> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * field.coeffs().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&scheme.id().to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&(grid.nx() as u64).to_le_bytes());
    out.extend_from_slice(&(grid.ny() as u64).to_le_bytes());
    out.extend_from_slice(&grid.lx().to_le_bytes());
    out.extend_from_slice(&grid.ly().to_le_bytes());
    out.extend_from_slice(&field.t().to_le_bytes());
    for c in field.coeffs().iter() {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    out
}

/// Header of a binary record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecordHeader {
    pub scheme: Scheme,
    pub grid: GridSpec,
    pub t: f64,
}

fn take<const N: usize>(bytes: &[u8], at: &mut usize) -> [u8; N] {
    let out: [u8; N] = bytes[*at..*at + N].try_into().expect("length checked");
    *at += N;
    out
}

/// Decode a record into its header and coefficients.
pub fn decode_record(bytes: &[u8]) -> Result<(RecordHeader, Vec<Complex64>)> {
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
        return Err(Error::Checkpoint("missing record magic".into()));
    }
    let mut at = 8;
    let id = u32::from_le_bytes(take(bytes, &mut at));
    let scheme = Scheme::from_id(id).ok_or_else(|| Error::Checkpoint(format!("unknown scheme id {id}")))?;
    let _reserved = take::<4>(bytes, &mut at);
    let nx = u64::from_le_bytes(take(bytes, &mut at)) as usize;
    let ny = u64::from_le_bytes(take(bytes, &mut at)) as usize;
    let lx = f64::from_le_bytes(take(bytes, &mut at));
    let ly = f64::from_le_bytes(take(bytes, &mut at));
    let t = f64::from_le_bytes(take(bytes, &mut at));
    let expected = HEADER_LEN + 16 * nx * ny;
    if bytes.len() != expected {
        return Err(Error::Checkpoint(format!(
            "record has {} bytes, header implies {expected}",
            bytes.len()
        )));
    }
    let coeffs = bytes[HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    Ok((
        RecordHeader {
            scheme,
            grid: GridSpec::new(nx, ny, lx, ly),
            t,
        },
        coeffs,
    ))
}

/// Write `traj` into `dir` (created if needed), tagging the manifest with `config_hash`.
pub fn write_trajectory(traj: &Trajectory, dir: &Path, config_hash: Option<&str>) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let scheme = traj.config.scheme;
    let mut records = Vec::with_capacity(traj.len());
    for (n, field) in traj.fields.iter().enumerate() {
        let file = format!("record_{n:05}.bin");
        let path = dir.join(&file);
        fs::write(&path, encode_record(field, scheme)).map_err(|e| Error::io(&path, e))?;
        records.push(RecordEntry { file, t: field.t() });
    }
    let manifest = Manifest {
        format: "kplab-trajectory".into(),
        version: 1,
        scheme,
        config: traj.config.clone(),
        records,
        nodes: traj.nodes.clone(),
        config_hash: config_hash.map(str::to_owned),
    };
    let path = dir.join(MANIFEST);
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

/// Read a trajectory written by [`write_trajectory`].
pub fn read_trajectory(dir: &Path) -> Result<Trajectory> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    if manifest.format != "kplab-trajectory" || manifest.version != 1 {
        return Err(Error::Checkpoint(format!(
            "unsupported manifest {} v{}",
            manifest.format, manifest.version
        )));
    }
    let grid = manifest.config.grid.build()?;
    let mut fields = Vec::with_capacity(manifest.records.len());
    for entry in &manifest.records {
        let path = dir.join(&entry.file);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let (header, coeffs) = decode_record(&bytes)?;
        if header.grid != manifest.config.grid || header.scheme != manifest.scheme {
            return Err(Error::Checkpoint(format!("{} disagrees with the manifest", entry.file)));
        }
        if header.t.to_bits() != entry.t.to_bits() {
            return Err(Error::Checkpoint(format!("{} time differs from the manifest", entry.file)));
        }
        let arr = ndarray::Array2::from_shape_vec(grid.shape(), coeffs)
            .map_err(|e| Error::Checkpoint(e.to_string()))?;
        fields.push(Field::from_coeffs(&grid, header.t, arr)?);
    }
    Ok(Trajectory {
        config: manifest.config,
        times: fields.iter().map(Field::t).collect(),
        fields,
        nodes: manifest.nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_record_is_refused() {
        let grid = GridSpec::new(8, 8, 1.0, 1.0).build().unwrap();
        let bytes = encode_record(&Field::zeros(&grid, 0.5), Scheme::ImexNonlinear);
        assert!(decode_record(&bytes[..bytes.len() - 1]).is_err());
        let (h, c) = decode_record(&bytes).unwrap();
        assert_eq!(h.t, 0.5);
        assert_eq!(h.scheme, Scheme::ImexNonlinear);
        assert_eq!(c.len(), 64);
    }
}
