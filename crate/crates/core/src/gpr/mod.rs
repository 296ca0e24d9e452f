//! Gaussian process regression with half-integer Matérn and RBF kernels.

mod kernel;
mod model;
mod standardize;

pub use kernel::{matern_kernel, rbf_kernel, KernelFamily, KernelSpec};
pub use model::{log_marginal_likelihood, GprConfig, GprModel, MAX_JITTER};
pub use standardize::{standardize_inputs, Standardizer};
