use std::path::Path;

use nalgebra::DMatrix;

use super::wire::{Reader, Writer};
use super::{read_file, write_atomic};
use crate::error::{Result, RomError};
use crate::fom::Dataset;
use crate::linalg::SnapshotMatrix;

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"ROMSNAP1";

/// Contents of a snapshot file: a design table (`n x p`) and one `N x n`
/// block per state channel. `ny = nx = 0` marks unstructured states.
///
/// Layout: magic, then `u32` N, n, n_channels, p, n_y, n_x, then the design
/// table row by row, then each channel block column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    pub design: Vec<Vec<f64>>,
    pub channels: Vec<DMatrix<f64>>,
    pub ny: usize,
    pub nx: usize,
}

impl SnapshotSet {
    pub fn new(
        design: Vec<Vec<f64>>,
        channels: Vec<DMatrix<f64>>,
        ny: usize,
        nx: usize,
    ) -> Result<Self> {
        let s = SnapshotSet {
            design,
            channels,
            ny,
            nx,
        };
        s.validate().map_err(|e| match e {
            RomError::Format(m) => RomError::arg(m),
            other => other,
        })?;
        Ok(s)
    }

    pub fn from_dataset(ds: &Dataset) -> Self {
        SnapshotSet {
            design: ds.design.clone(),
            channels: vec![ds.u.data().clone(), ds.v.data().clone()],
            ny: ds.ny,
            nx: ds.nx,
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.design.len();
        let p = self.design.first().map_or(0, |r| r.len());
        if self.channels.is_empty() {
            return Err(RomError::Format("snapshot set has no channels".into()));
        }
        if self.design.iter().any(|r| r.len() != p) {
            return Err(RomError::Format(
                "design rows have differing lengths".into(),
            ));
        }
        let big_n = self.channels[0].nrows();
        if self
            .channels
            .iter()
            .any(|c| c.nrows() != big_n || c.ncols() != n)
        {
            return Err(RomError::Format(format!(
                "every channel must be {big_n} x {n} to match the design table"
            )));
        }
        if (self.ny == 0) != (self.nx == 0) || (self.ny > 0 && self.ny * self.nx != big_n) {
            return Err(RomError::Format(format!(
                "grid {}x{} does not match state dimension {big_n}",
                self.ny, self.nx
            )));
        }
        Ok(())
    }

    pub fn state_dim(&self) -> usize {
        self.channels[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.design.len()
    }

    pub fn is_empty(&self) -> bool {
        self.design.is_empty()
    }

    pub fn param_dim(&self) -> usize {
        self.design.first().map_or(0, |r| r.len())
    }

    pub fn is_structured(&self) -> bool {
        self.ny > 0
    }

    /// One snapshot matrix per channel, sharing the design table.
    pub fn snapshot_matrices(&self) -> Result<Vec<SnapshotMatrix>> {
        self.channels
            .iter()
            .map(|c| SnapshotMatrix::new(c.clone(), self.design.clone()))
            .collect()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        self.validate()?;
        let mut w = Writer::default();
        w.bytes(SNAPSHOT_MAGIC);
        for v in [
            self.state_dim(),
            self.len(),
            self.channels.len(),
            self.param_dim(),
            self.ny,
            self.nx,
        ] {
            w.len(v)?;
        }
        for row in &self.design {
            w.f64s(row);
        }
        for c in &self.channels {
            w.f64s(c.as_slice());
        }
        Ok(w.buf)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes, "snapshot file");
        if r.bytes(8).ok() != Some(SNAPSHOT_MAGIC.as_slice()) {
            return Err(RomError::Format("not a snapshot file (bad magic)".into()));
        }
        let big_n = r.len()?;
        let n = r.len()?;
        let n_channels = r.len()?;
        let p = r.len()?;
        let ny = r.len()?;
        let nx = r.len()?;
        let expected = (n as u128 * p as u128 + n_channels as u128 * big_n as u128 * n as u128) * 8;
        if expected != r.remaining() as u128 {
            return Err(RomError::Format(format!(
                "snapshot header promises {expected} payload bytes, file holds {}",
                r.remaining()
            )));
        }
        let design = (0..n).map(|_| r.f64s(p)).collect::<Result<Vec<_>>>()?;
        let channels = (0..n_channels)
            .map(|_| Ok(DMatrix::from_vec(big_n, n, r.f64s(big_n * n)?)))
            .collect::<Result<Vec<_>>>()?;
        r.finish()?;
        let s = SnapshotSet {
            design,
            channels,
            ny,
            nx,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes()?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&read_file(path)?)
    }
}
