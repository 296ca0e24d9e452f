//! Full-order model: a lid-driven cavity solver and Latin hypercube designs.

mod cavity;
mod dataset;
mod lhs;

pub use cavity::{
    discrete_divergence, reynolds_to_viscosity, solve_cavity, solve_cavity_report,
    vertical_midline_u, CavityParams, FieldPair, SolveReport, SolverConfig,
};
pub use dataset::{
    generate_snapshots, solve_design, Dataset, GenerateConfig, SolveSummary, DESIGN_NAMES,
    LHS_CANDIDATES,
};
pub use lhs::{lhs_maximin, lhs_sample, min_pairwise_distance, strata, ParameterSpace};
