use nalgebra::DMatrix;

use crate::error::{Result, RomError};

/// Column-stacked full-order states (`N` rows, `n` columns) together with the
/// design parameters each column was computed at.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMatrix {
    data: DMatrix<f64>,
    params: Vec<Vec<f64>>,
}

impl SnapshotMatrix {
    pub fn new(data: DMatrix<f64>, params: Vec<Vec<f64>>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(RomError::arg("snapshot matrix must have N >= 1 and n >= 1"));
        }
        if params.len() != data.ncols() {
            return Err(RomError::arg(format!(
                "{} parameter vectors for {} snapshot columns",
                params.len(),
                data.ncols()
            )));
        }
        let p = params[0].len();
        if let Some(i) = params.iter().position(|mu| mu.len() != p) {
            return Err(RomError::arg(format!(
                "parameter vector {i} has dimension {} (expected {p})",
                params[i].len()
            )));
        }
        for (j, col) in data.column_iter().enumerate() {
            if col.iter().any(|v| !v.is_finite()) {
                return Err(RomError::InvalidData(format!(
                    "snapshot column {j} is not finite"
                )));
            }
        }
        if params.iter().flatten().any(|v| !v.is_finite()) {
            return Err(RomError::InvalidData("non-finite design parameter".into()));
        }
        Ok(SnapshotMatrix { data, params })
    }

    /// Builds a matrix from a list of state vectors of equal length.
    pub fn from_columns(columns: &[Vec<f64>], params: Vec<Vec<f64>>) -> Result<Self> {
        let n = columns.len();
        if n == 0 {
            return Err(RomError::arg("no snapshot columns"));
        }
        let rows = columns[0].len();
        if let Some(j) = columns.iter().position(|c| c.len() != rows) {
            return Err(RomError::arg(format!(
                "snapshot column {j} has the wrong length"
            )));
        }
        let data = DMatrix::from_fn(rows, n, |i, j| columns[j][i]);
        Self::new(data, params)
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn params(&self) -> &[Vec<f64>] {
        &self.params
    }

    /// State dimension `N`.
    pub fn state_dim(&self) -> usize {
        self.data.nrows()
    }

    /// Number of snapshots `n`.
    pub fn len(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.data.ncols() == 0
    }

    /// Parameter dimension `p`.
    pub fn param_dim(&self) -> usize {
        self.params[0].len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.data.column(j).iter().copied().collect()
    }

    /// New matrix holding the selected columns, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(RomError::arg("empty column selection"));
        }
        if let Some(&j) = indices.iter().find(|&&j| j >= self.len()) {
            return Err(RomError::arg(format!("column index {j} out of range")));
        }
        let data = self.data.select_columns(indices);
        let params = indices.iter().map(|&j| self.params[j].clone()).collect();
        Ok(SnapshotMatrix { data, params })
    }

    pub fn into_parts(self) -> (DMatrix<f64>, Vec<Vec<f64>>) {
        (self.data, self.params)
    }
}
