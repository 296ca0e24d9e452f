//! Non-intrusive reduced-order modeling of steady parameterized fields.
//!
//! Two surrogate families share one interface: POD-GPR (a linear trial
//! subspace from a truncated SVD) and CAE-GPR (a nonlinear trial manifold
//! from a convolutional autoencoder). In both, one Gaussian process per
//! expansion coefficient maps design parameters to coefficients. The crate
//! also ships a lid-driven-cavity solver and Latin hypercube sampling for
//! generating training snapshots.

pub mod error;
pub mod fom;
pub mod gpr;
pub mod io;
pub mod linalg;
pub mod nn;
pub mod rom;

pub use error::{Result, RomError};
