use rayon::prelude::*;

use super::cavity::{solve_cavity_report, CavityParams, SolverConfig};
use super::lhs::{lhs_maximin, ParameterSpace};
use crate::error::{Result, RomError};
use crate::linalg::SnapshotMatrix;

/// Names of the design-table columns produced by [`generate_snapshots`].
pub const DESIGN_NAMES: [&str; 3] = ["lx", "ly", "re"];

/// Candidate designs tried by the maximin Latin hypercube.
pub const LHS_CANDIDATES: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateConfig {
    pub nx: usize,
    pub ny: usize,
    pub lid_speed: f64,
    pub solver: SolverConfig,
    pub allow_partial: bool,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig {
            nx: 64,
            ny: 64,
            lid_speed: 1.0,
            solver: SolverConfig::default(),
            allow_partial: false,
        }
    }
}

/// Outcome of one cavity solve in a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveSummary {
    pub index: usize,
    pub iterations: usize,
    pub residual: f64,
    pub error: Option<String>,
}

/// Velocity snapshots for a design: one matrix per channel, columns in
/// design-table order.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub design: Vec<Vec<f64>>,
    pub u: SnapshotMatrix,
    pub v: SnapshotMatrix,
    pub nx: usize,
    pub ny: usize,
    pub summaries: Vec<SolveSummary>,
}

impl Dataset {
    pub fn failures(&self) -> impl Iterator<Item = &SolveSummary> {
        self.summaries.iter().filter(|s| s.error.is_some())
    }
}

/// Solves the cavity at each `(lx, ly, re)` point, in parallel, keeping
/// design order. Any failure rejects the dataset unless `allow_partial` is
/// set, in which case failed points are dropped from the design.
pub fn solve_design(design: &[Vec<f64>], config: &GenerateConfig) -> Result<Dataset> {
    if design.is_empty() {
        return Err(RomError::arg("empty design"));
    }
    if let Some(i) = design.iter().position(|mu| mu.len() != 3) {
        return Err(RomError::arg(format!(
            "design point {i} is not (lx, ly, re)"
        )));
    }
    let outcomes: Vec<Result<(Vec<f64>, Vec<f64>, usize, f64)>> = design
        .par_iter()
        .map(|mu| {
            let params = CavityParams::new(mu[0], mu[1], mu[2], config.nx, config.ny)?
                .with_lid_speed(config.lid_speed)?;
            let r = solve_cavity_report(&params, &config.solver)?;
            let residual = r.residuals.last().copied().unwrap_or(0.0);
            Ok((r.fields.u, r.fields.v, r.iterations, residual))
        })
        .collect();

    let mut summaries = Vec::with_capacity(design.len());
    let mut kept = Vec::new();
    let mut first_error = None;
    let (mut us, mut vs) = (Vec::new(), Vec::new());
    for (index, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok((u, v, iterations, residual)) => {
                summaries.push(SolveSummary {
                    index,
                    iterations,
                    residual,
                    error: None,
                });
                kept.push(design[index].clone());
                us.push(u);
                vs.push(v);
            }
            Err(e) => {
                let (iterations, residual) = match &e {
                    RomError::Convergence {
                        iterations,
                        residual,
                    } => (*iterations, *residual),
                    _ => (0, f64::NAN),
                };
                summaries.push(SolveSummary {
                    index,
                    iterations,
                    residual,
                    error: Some(e.to_string()),
                });
                first_error.get_or_insert(e);
            }
        }
    }
    let failed: Vec<usize> = summaries
        .iter()
        .filter(|s| s.error.is_some())
        .map(|s| s.index)
        .collect();
    if let Some(first) = first_error {
        if !config.allow_partial || kept.is_empty() {
            return Err(RomError::DesignFailures {
                indices: failed,
                first: Box::new(first),
            });
        }
    }
    Ok(Dataset {
        u: SnapshotMatrix::from_columns(&us, kept.clone())?,
        v: SnapshotMatrix::from_columns(&vs, kept.clone())?,
        design: kept,
        nx: config.nx,
        ny: config.ny,
        summaries,
    })
}

/// Maximin Latin hypercube over `space` followed by [`solve_design`].
pub fn generate_snapshots(
    space: &ParameterSpace,
    n: usize,
    seed: u64,
    config: &GenerateConfig,
) -> Result<Dataset> {
    if space.dim() != 3 {
        return Err(RomError::arg("the cavity design space is (lx, ly, re)"));
    }
    let design = lhs_maximin(space, n, seed, LHS_CANDIDATES)?;
    solve_design(&design, config)
}
