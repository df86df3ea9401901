//! Binary CPPN weights file.
//!
//! Layout, all little-endian: magic `CPPN`, `u16` version, `u16` layer
//! count, then per layer `u32` rows, `u32` cols and `rows * cols` `f64`
//! values in row-major order (bias in the last column).

use std::path::Path;

use acl_core::procgen::{CppnWeights, DenseLayer};

use crate::error::{BenchError, BenchResult};

pub const MAGIC: [u8; 4] = *b"CPPN";
pub const VERSION: u16 = 1;

pub fn encode(weights: &CppnWeights) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + weights.layers.len() * 8 + weights.parameter_count() * 8);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(weights.layers.len() as u16).to_le_bytes());
    for layer in &weights.layers {
        out.extend_from_slice(&(layer.rows as u32).to_le_bytes());
        out.extend_from_slice(&(layer.cols as u32).to_le_bytes());
        for v in &layer.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self) -> BenchResult<[u8; N]> {
        let end = self.pos + N;
        let chunk = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| BenchError::Weights(format!("truncated at byte {}", self.pos)))?;
        self.pos = end;
        Ok(chunk.try_into().expect("length checked"))
    }
}

/// Parses a weights file and checks the network shape.
pub fn decode(bytes: &[u8]) -> BenchResult<CppnWeights> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take::<4>()? != MAGIC {
        return Err(BenchError::Weights("missing CPPN magic".into()));
    }
    let version = u16::from_le_bytes(r.take()?);
    if version != VERSION {
        return Err(BenchError::Weights(format!("unsupported version {version}")));
    }
    let count = u16::from_le_bytes(r.take()?) as usize;
    let mut layers = Vec::with_capacity(count);
    for _ in 0..count {
        let rows = u32::from_le_bytes(r.take()?) as usize;
        let cols = u32::from_le_bytes(r.take()?) as usize;
        let n = rows
            .checked_mul(cols)
            .filter(|n| *n <= bytes.len() / 8)
            .ok_or_else(|| BenchError::Weights(format!("layer {rows}x{cols} is larger than the file")))?;
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            data.push(f64::from_le_bytes(r.take()?));
        }
        layers.push(DenseLayer { rows, cols, data });
    }
    if r.pos != bytes.len() {
        return Err(BenchError::Weights(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    let weights = CppnWeights { layers };
    weights.validate()?;
    Ok(weights)
}

pub fn write_file(path: &Path, weights: &CppnWeights) -> BenchResult<()> {
    std::fs::write(path, encode(weights)).map_err(|e| BenchError::io(path, e))
}

pub fn read_file(path: &Path) -> BenchResult<CppnWeights> {
    let bytes = std::fs::read(path).map_err(|e| BenchError::io(path, e))?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let w = CppnWeights::canonical();
        let bytes = encode(&w);
        assert_eq!(bytes.len(), 8 + 5 * 8 + 8 * w.parameter_count());
        assert_eq!(decode(&bytes).unwrap(), w);
    }

    #[test]
    fn header_fields() {
        let bytes = encode(&CppnWeights::canonical());
        assert_eq!(&bytes[..4], b"CPPN");
        assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), 1);
        assert_eq!(u16::from_le_bytes([bytes[6], bytes[7]]), 5);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 64);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 5);
    }

    #[test]
    fn rejects_corruption() {
        let bytes = encode(&CppnWeights::canonical());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad).is_err());
        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(decode(&bad).is_err());
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        let mut long = bytes.clone();
        long.push(0);
        assert!(decode(&long).is_err());
        // shape mismatch: claim 6 columns in the first layer
        let mut bad = bytes;
        bad[12] = 6;
        assert!(decode(&bad).is_err());
    }
}
