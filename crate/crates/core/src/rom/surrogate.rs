use super::cae_gpr::CaeGpr;
use super::pod_gpr::PodGpr;
use crate::error::{Result, RomError};

/// Which offline algorithm produced a surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    PodGpr,
    CaeGpr,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::PodGpr => "pod-gpr",
            Method::CaeGpr => "cae-gpr",
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            Method::PodGpr => 1,
            Method::CaeGpr => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            1 => Ok(Method::PodGpr),
            2 => Ok(Method::CaeGpr),
            t => Err(RomError::Format(format!("unknown surrogate kind tag {t}"))),
        }
    }
}

impl std::str::FromStr for Method {
    type Err = RomError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pod-gpr" => Ok(Method::PodGpr),
            "cae-gpr" => Ok(Method::CaeGpr),
            other => Err(RomError::arg(format!(
                "unknown method '{other}' (pod-gpr or cae-gpr)"
            ))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a surrogate came from. `wall_time_s` and `epochs` record the offline
/// cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub seed: u64,
    pub config_digest: [u8; 32],
    pub wall_time_s: f64,
    pub epochs: u64,
}

#[derive(Debug, Clone)]
pub enum RomModel {
    /// One independent POD-GPR per state channel.
    PodGpr(Vec<PodGpr>),
    /// One multi-channel autoencoder sharing its code across channels.
    CaeGpr(CaeGpr),
}

/// A trained surrogate ready for online prediction.
#[derive(Debug, Clone)]
pub struct RomSurrogate {
    model: RomModel,
    ny: usize,
    nx: usize,
    provenance: Provenance,
}

impl RomSurrogate {
    pub fn new(model: RomModel, ny: usize, nx: usize, provenance: Provenance) -> Result<Self> {
        match &model {
            RomModel::PodGpr(per) => {
                if per.is_empty() {
                    return Err(RomError::arg("surrogate needs at least one channel"));
                }
                let k = per[0].k();
                let n = per[0].basis().state_dim();
                let p = per[0].param_dim();
                if per
                    .iter()
                    .any(|m| m.k() != k || m.basis().state_dim() != n || m.param_dim() != p)
                {
                    return Err(RomError::arg(
                        "per-channel POD-GPR models disagree on k, N or p",
                    ));
                }
                if ny * nx != 0 && ny * nx != n {
                    return Err(RomError::arg("grid does not match the state dimension"));
                }
            }
            RomModel::CaeGpr(cae) => {
                if cae.grid() != (ny, nx) {
                    return Err(RomError::arg("grid does not match the autoencoder input"));
                }
            }
        }
        Ok(RomSurrogate {
            model,
            ny,
            nx,
            provenance,
        })
    }

    pub fn method(&self) -> Method {
        match self.model {
            RomModel::PodGpr(_) => Method::PodGpr,
            RomModel::CaeGpr(_) => Method::CaeGpr,
        }
    }

    pub fn model(&self) -> &RomModel {
        &self.model
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn grid(&self) -> (usize, usize) {
        (self.ny, self.nx)
    }

    pub fn k(&self) -> usize {
        match &self.model {
            RomModel::PodGpr(per) => per[0].k(),
            RomModel::CaeGpr(c) => c.k(),
        }
    }

    pub fn channels(&self) -> usize {
        match &self.model {
            RomModel::PodGpr(per) => per.len(),
            RomModel::CaeGpr(c) => c.channels(),
        }
    }

    pub fn state_dim(&self) -> usize {
        match &self.model {
            RomModel::PodGpr(per) => per[0].basis().state_dim(),
            RomModel::CaeGpr(_) => self.ny * self.nx,
        }
    }

    pub fn param_dim(&self) -> usize {
        match &self.model {
            RomModel::PodGpr(per) => per[0].param_dim(),
            RomModel::CaeGpr(c) => c.param_dim(),
        }
    }

    /// One predicted state per channel.
    pub fn predict(&self, mu: &[f64]) -> Result<Vec<Vec<f64>>> {
        match &self.model {
            RomModel::PodGpr(per) => per.iter().map(|m| m.predict(mu)).collect(),
            RomModel::CaeGpr(c) => c.predict(mu),
        }
    }

    /// Projection of a full state onto the trial subspace or manifold.
    pub fn project(&self, x: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        match &self.model {
            RomModel::PodGpr(per) => {
                if x.len() != per.len() {
                    return Err(RomError::arg(format!(
                        "expected {} channels, got {}",
                        per.len(),
                        x.len()
                    )));
                }
                per.iter().zip(x).map(|(m, xc)| m.project(xc)).collect()
            }
            RomModel::CaeGpr(c) => c.project(x),
        }
    }
}
