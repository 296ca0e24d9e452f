//! Binary snapshot and surrogate files, design tables and atomic writes.
//!
//! All numbers are little-endian; floats are IEEE 754 binary64. Writing,
//! reading and writing again yields identical bytes.

mod design;
mod snapshot;
mod surrogate;
mod wire;

pub use design::{parse_design_table, read_design_table, render_design_table, write_design_table};
pub use snapshot::{SnapshotSet, SNAPSHOT_MAGIC};
pub use surrogate::{
    decode_surrogate, encode_surrogate, load_surrogate, save_surrogate, SURROGATE_MAGIC,
};

use std::io::Write;
use std::path::Path;

use crate::error::{Result, RomError};

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| RomError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| RomError::io(path, e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| RomError::io(path, e))?;
    tmp.persist(path).map_err(|e| RomError::io(path, e.error))?;
    Ok(())
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| RomError::io(path, e))
}
