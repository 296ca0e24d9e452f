use nalgebra::{DMatrix, DVector};

use super::snapshot::SnapshotMatrix;
use super::svd::{orthonormality_defect, truncated_svd};
use crate::error::{Result, RomError};

/// Rank-`k` POD basis: the leading left singular vectors of a snapshot matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PodBasis {
    vectors: DMatrix<f64>,
    singular_values: Vec<f64>,
}

impl PodBasis {
    /// Extracts the first `k` left singular vectors of the snapshots.
    pub fn from_snapshots(snapshots: &SnapshotMatrix, k: usize) -> Result<Self> {
        let svd = truncated_svd(snapshots.data(), k)?;
        Ok(PodBasis {
            vectors: svd.u,
            singular_values: svd.sigma,
        })
    }

    /// Wraps an existing basis. Columns must be orthonormal to 1e-10 and the
    /// spectrum, if given, sorted nonincreasing and nonnegative.
    pub fn from_parts(vectors: DMatrix<f64>, singular_values: Vec<f64>) -> Result<Self> {
        if vectors.ncols() == 0 || vectors.nrows() < vectors.ncols() {
            return Err(RomError::arg("basis must have 1 <= k <= N columns"));
        }
        let defect = orthonormality_defect(&vectors);
        if defect > 1e-10 {
            return Err(RomError::InvalidData(format!(
                "basis columns are not orthonormal (defect {defect:e})"
            )));
        }
        validate_spectrum(&singular_values, false)?;
        Ok(PodBasis {
            vectors,
            singular_values,
        })
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn rank(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn state_dim(&self) -> usize {
        self.vectors.nrows()
    }

    /// Basis made of the first `k` columns.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.rank() {
            return Err(RomError::arg(format!(
                "rank {k} outside 1..={}",
                self.rank()
            )));
        }
        Ok(PodBasis {
            vectors: self.vectors.columns(0, k).into_owned(),
            singular_values: self.singular_values.clone(),
        })
    }

    /// Expansion coefficients `Psi^T x`.
    pub fn coefficients(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        let x = DVector::from_column_slice(x);
        Ok(self.vectors.tr_mul(&x).iter().copied().collect())
    }

    /// State `Psi a` reconstructed from expansion coefficients.
    pub fn expand(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.rank() {
            return Err(RomError::arg(format!(
                "{} coefficients for a rank-{} basis",
                coeffs.len(),
                self.rank()
            )));
        }
        let a = DVector::from_column_slice(coeffs);
        Ok((&self.vectors * a).iter().copied().collect())
    }

    /// Orthogonal projection `Psi Psi^T x`.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        let a = self.coefficients(x)?;
        self.expand(&a)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.state_dim() {
            return Err(RomError::arg(format!(
                "state of length {len} for a basis with N = {}",
                self.state_dim()
            )));
        }
        Ok(())
    }
}

fn validate_spectrum(sigma: &[f64], require_nonzero: bool) -> Result<()> {
    if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(RomError::InvalidData(
            "singular values must be finite and >= 0".into(),
        ));
    }
    if sigma.windows(2).any(|w| w[1] > w[0]) {
        return Err(RomError::InvalidData(
            "singular values must be nonincreasing".into(),
        ));
    }
    if require_nonzero && sigma.iter().all(|&s| s == 0.0) {
        return Err(RomError::DegenerateSpectrum);
    }
    Ok(())
}

/// Fraction of the singular-value sum captured by the first `k` modes.
pub fn relative_information_content(sigma: &[f64], k: usize) -> Result<f64> {
    validate_spectrum(sigma, true)?;
    if k == 0 || k > sigma.len() {
        return Err(RomError::arg(format!(
            "rank {k} outside 1..={}",
            sigma.len()
        )));
    }
    let total: f64 = sigma.iter().sum();
    let head: f64 = sigma[..k].iter().sum();
    if k == sigma.len() {
        return Ok(1.0);
    }
    Ok((head / total).min(1.0))
}

/// Smallest rank whose relative information content reaches `epsilon`.
pub fn choose_rank(sigma: &[f64], epsilon: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(RomError::arg(format!("threshold {epsilon} outside [0, 1)")));
    }
    validate_spectrum(sigma, true)?;
    for k in 1..=sigma.len() {
        if relative_information_content(sigma, k)? >= epsilon {
            return Ok(k);
        }
    }
    Ok(sigma.len())
}

/// Summed squared relative projection error of every snapshot onto the span
/// of the orthonormal columns of `psi`.
pub fn projection_error_onto(snapshots: &DMatrix<f64>, psi: &DMatrix<f64>) -> Result<f64> {
    if psi.nrows() != snapshots.nrows() {
        return Err(RomError::arg(
            "basis and snapshots differ in state dimension",
        ));
    }
    let coeffs = psi.tr_mul(snapshots);
    let projected = psi * coeffs;
    let mut total = 0.0;
    for j in 0..snapshots.ncols() {
        let x = snapshots.column(j);
        let norm2 = x.norm_squared();
        if norm2 == 0.0 {
            return Err(RomError::ZeroNormColumn { column: j });
        }
        total += (x - projected.column(j)).norm_squared() / norm2;
    }
    Ok(total)
}

/// POD projection error of a snapshot set onto `basis`.
pub fn pod_projection_error(snapshots: &SnapshotMatrix, basis: &PodBasis) -> Result<f64> {
    projection_error_onto(snapshots.data(), basis.vectors())
}
