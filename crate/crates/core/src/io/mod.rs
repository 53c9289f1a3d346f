//! File formats: RFPF binary features, CSV features, run manifests.

pub mod csv;
pub mod manifest;
pub mod rfpf;

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use crate::error::{Result, RfpError};
use crate::graph::{load_edge_list, Graph};
use crate::linalg::FeatureBlock;

pub use manifest::RunManifest;

/// Writes `bytes` to `path` through a temporary file in the same directory
/// followed by a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| RfpError::Io(e.to_string()))?;
    Ok(())
}

pub fn read_graph(path: &Path) -> Result<Graph> {
    let file = File::open(path).map_err(|e| RfpError::Io(format!("{}: {e}", path.display())))?;
    load_edge_list(BufReader::new(file))
}

/// Reads a feature block, detecting RFPF by its magic bytes and falling back
/// to CSV.
pub fn read_features(path: &Path) -> Result<FeatureBlock> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| RfpError::Io(format!("{}: {e}", path.display())))?;
    if bytes.starts_with(rfpf::MAGIC) {
        rfpf::decode(&bytes)
    } else {
        let text = String::from_utf8(bytes).map_err(|_| RfpError::Format("feature file is not UTF-8".into()))?;
        csv::decode(&text)
    }
}
