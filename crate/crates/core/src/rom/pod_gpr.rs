use crate::error::{Result, RomError};
use crate::gpr::{GprConfig, GprModel};
use crate::linalg::{PodBasis, SnapshotMatrix};

/// POD basis plus one Gaussian process per expansion coefficient, for one
/// state channel.
#[derive(Debug, Clone)]
pub struct PodGpr {
    basis: PodBasis,
    models: Vec<GprModel>,
}

/// Fits the coefficient models for every column of `coeffs` (`n x k`,
/// row per sample). Model `j` is seeded with `seed + j`.
pub(crate) fn fit_coefficient_models(
    params: &[Vec<f64>],
    coeffs: &[Vec<f64>],
    k: usize,
    config: &GprConfig,
    seed: u64,
) -> Result<Vec<GprModel>> {
    use rayon::prelude::*;
    (0..k)
        .into_par_iter()
        .map(|j| {
            let y: Vec<f64> = coeffs.iter().map(|a| a[j]).collect();
            GprModel::fit(params, &y, config, seed.wrapping_add(j as u64))
        })
        .collect()
}

/// Offline stage: truncated POD of the training snapshots, coefficients
/// `A = (Psi^T S)^T`, and `k` coefficient regressions.
pub fn pod_gpr_offline(
    train: &SnapshotMatrix,
    k: usize,
    config: &GprConfig,
    seed: u64,
) -> Result<PodGpr> {
    if k == 0 || k > train.len() {
        return Err(RomError::arg(format!(
            "ROM dimension {k} must lie in 1..={} (number of training snapshots)",
            train.len()
        )));
    }
    let basis = PodBasis::from_snapshots(train, k)?;
    let coeffs_mat = basis.vectors().transpose() * train.data();
    let coeffs: Vec<Vec<f64>> = coeffs_mat
        .column_iter()
        .map(|c| c.iter().copied().collect())
        .collect();
    let models = fit_coefficient_models(train.params(), &coeffs, k, config, seed)?;
    Ok(PodGpr { basis, models })
}

impl PodGpr {
    pub fn from_parts(basis: PodBasis, models: Vec<GprModel>) -> Result<Self> {
        if models.len() != basis.rank() {
            return Err(RomError::Format(format!(
                "{} coefficient models for a rank-{} basis",
                models.len(),
                basis.rank()
            )));
        }
        Ok(PodGpr { basis, models })
    }

    pub fn k(&self) -> usize {
        self.models.len()
    }

    pub fn basis(&self) -> &PodBasis {
        &self.basis
    }

    pub fn models(&self) -> &[GprModel] {
        &self.models
    }

    pub fn param_dim(&self) -> usize {
        self.models[0].input_dim()
    }

    /// Leading `k` modes and their models.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.k() {
            return Err(RomError::arg(format!(
                "cannot truncate a rank-{} ROM to {k}",
                self.k()
            )));
        }
        Ok(PodGpr {
            basis: self.basis.truncated(k)?,
            models: self.models[..k].to_vec(),
        })
    }

    pub fn predict_coefficients(&self, mu: &[f64]) -> Result<Vec<f64>> {
        if mu.len() != self.param_dim() {
            return Err(RomError::arg(format!(
                "query has {} parameters, model expects {}",
                mu.len(),
                self.param_dim()
            )));
        }
        self.models.iter().map(|m| m.predict_mean(mu)).collect()
    }

    /// Online stage: `x = Psi a(mu)`.
    pub fn predict(&self, mu: &[f64]) -> Result<Vec<f64>> {
        self.basis.expand(&self.predict_coefficients(mu)?)
    }

    /// Orthogonal projection onto the basis.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.basis.project(x)
    }
}
