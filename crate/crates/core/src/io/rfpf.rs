//! RFPF: a 24-byte little-endian header followed by row-major `f64` values.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "RFPF"
//!      4     4  version (u32, = 1)
//!      8     8  n rows (u64)
//!     16     8  d columns (u64)
//!     24  8·n·d values (f64, row-major)
//! ```

use crate::error::{Result, RfpError};
use crate::linalg::FeatureBlock;

pub const MAGIC: &[u8; 4] = b"RFPF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 24;

pub fn encode(block: &FeatureBlock) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * block.data().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(block.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(block.cols() as u64).to_le_bytes());
    for v in block.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<FeatureBlock> {
    if bytes.len() < HEADER_LEN {
        return Err(RfpError::Format("RFPF file shorter than its header".into()));
    }
    if &bytes[0..4] != MAGIC {
        return Err(RfpError::Format("bad RFPF magic".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(RfpError::Format(format!("unsupported RFPF version {version}")));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let d = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let expected = n
        .checked_mul(d)
        .and_then(|c| c.checked_mul(8))
        .and_then(|c| c.checked_add(HEADER_LEN as u64));
    if expected != Some(bytes.len() as u64) {
        return Err(RfpError::Format(format!(
            "RFPF length {} does not match header {n}x{d}",
            bytes.len()
        )));
    }
    let data = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    FeatureBlock::new(n as usize, d as usize, data)
}
