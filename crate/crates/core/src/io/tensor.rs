//! Binary tensor files.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! "MPT1" | rank: u32 | dims[rank]: u32 | payload: f32 × ∏dims (row-major, last dim fastest)
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::target_codec::{DisplacementField, Heatmap, DISPLACEMENT_CHANNELS};

pub const MAGIC: &[u8; 4] = b"MPT1";
pub const MAX_RANK: usize = 4;

fn element_count(dims: &[usize]) -> Option<usize> {
    dims.iter().try_fold(1usize, |acc, d| acc.checked_mul(*d))
}

/// Serializes a tensor to bytes.
pub fn encode_tensor(dims: &[usize], values: &[f32]) -> Result<Vec<u8>> {
    if dims.is_empty() || dims.len() > MAX_RANK {
        return Err(Error::InvalidInput(format!(
            "rank {} outside [1, {MAX_RANK}]",
            dims.len()
        )));
    }
    if let Some(d) = dims.iter().find(|d| **d > u32::MAX as usize) {
        return Err(Error::InvalidInput(format!("dimension {d} does not fit in u32")));
    }
    let count = element_count(dims).ok_or_else(|| Error::InvalidInput("element count overflows".into()))?;
    if count != values.len() {
        return Err(Error::InvalidInput(format!(
            "dims {dims:?} hold {count} values, got {}",
            values.len()
        )));
    }
    let mut out = Vec::with_capacity(8 + 4 * dims.len() + 4 * count);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for d in dims {
        out.extend_from_slice(&(*d as u32).to_le_bytes());
    }
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

fn read_u32(bytes: &[u8], at: usize) -> Option<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_le_bytes(b.try_into().expect("4-byte slice")))
}

/// Parses a tensor from bytes.
pub fn decode_tensor(bytes: &[u8]) -> Result<(Vec<usize>, Vec<f32>)> {
    if bytes.len() < 8 {
        return Err(Error::MalformedHeader(format!(
            "{} bytes is shorter than the header",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::MalformedHeader(format!(
            "bad magic {:?}",
            String::from_utf8_lossy(&bytes[..4])
        )));
    }
    let rank = read_u32(bytes, 4).expect("length checked") as usize;
    if rank == 0 || rank > MAX_RANK {
        return Err(Error::MalformedHeader(format!("rank {rank} outside [1, {MAX_RANK}]")));
    }
    let mut dims = Vec::with_capacity(rank);
    for k in 0..rank {
        let d = read_u32(bytes, 8 + 4 * k)
            .ok_or_else(|| Error::MalformedHeader(format!("truncated dims ({rank} expected)")))?;
        dims.push(d as usize);
    }
    let header = 8 + 4 * rank;
    let expected = element_count(&dims)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::MalformedHeader(format!("dims {dims:?} overflow")))?;
    let payload = &bytes[header..];
    if payload.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            found: payload.len(),
        });
    }
    let values = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")))
        .collect();
    Ok((dims, values))
}

pub fn write_tensor(path: impl AsRef<Path>, dims: &[usize], values: &[f32]) -> Result<()> {
    let bytes = encode_tensor(dims, values)?;
    fs::write(path, bytes)?;
    Ok(())
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<(Vec<usize>, Vec<f32>)> {
    decode_tensor(&fs::read(path)?)
}

/// Writes a heatmap as a `[rows, cols, 1]` tensor.
pub fn write_heatmap(path: impl AsRef<Path>, heat: &Heatmap) -> Result<()> {
    let values: Vec<f32> = heat.data.iter().map(|v| *v as f32).collect();
    write_tensor(path, &heat.shape(), &values)
}

/// Reads a `[rows, cols, 1]` (or `[rows, cols]`) tensor as a heatmap.
pub fn read_heatmap(path: impl AsRef<Path>) -> Result<Heatmap> {
    let (dims, values) = read_tensor(path)?;
    match dims.as_slice() {
        [h, w, 1] | [h, w] => Heatmap::from_vec(*w, *h, values.into_iter().map(f64::from).collect()),
        _ => Err(Error::ShapeMismatch {
            expected: vec![0, 0, 1],
            found: dims,
        }),
    }
}

/// Writes a displacement field as a `[rows, cols, 16]` tensor.
pub fn write_displacements(path: impl AsRef<Path>, disp: &DisplacementField) -> Result<()> {
    let values: Vec<f32> = disp.data.iter().map(|v| *v as f32).collect();
    write_tensor(path, &disp.shape(), &values)
}

pub fn read_displacements(path: impl AsRef<Path>) -> Result<DisplacementField> {
    let (dims, values) = read_tensor(path)?;
    match dims.as_slice() {
        [h, w, c] if *c == DISPLACEMENT_CHANNELS => {
            DisplacementField::from_vec(*w, *h, values.into_iter().map(f64::from).collect())
        }
        _ => Err(Error::ShapeMismatch {
            expected: vec![0, 0, DISPLACEMENT_CHANNELS],
            found: dims,
        }),
    }
}
