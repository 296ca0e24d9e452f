//! Offline and online stages of the POD-GPR and CAE-GPR surrogates, error
//! metrics and cross-validation.

mod cae_gpr;
mod cv;
mod metrics;
mod pod_gpr;
mod reshape;
mod scaling;
mod surrogate;

pub use cae_gpr::{cae_gpr_offline, train_autoencoder, CaeGpr, CaeTrainConfig, TrainingHistory};
pub use cv::{
    canonical_order, five_fold_cv, fold_splits, CvConfig, CvReport, CvRow, CvTiming, FoldSplit,
    CSV_HEADER, N_FOLDS, TIMING_HEADER,
};
pub use metrics::{projection_error, rom_error};
pub use pod_gpr::{pod_gpr_offline, PodGpr};
pub use reshape::{inverse_reshape, reshape_batch, reshape_to_grid};
pub use scaling::{minmax_fit_transform, minmax_inverse, ScalingInfo, ScalingMode};
pub use surrogate::{Method, Provenance, RomModel, RomSurrogate};
