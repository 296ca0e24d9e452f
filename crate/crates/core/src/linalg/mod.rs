//! Snapshot matrices, thin SVD and POD bases.

mod pod;
mod snapshot;
mod svd;

pub use pod::{
    choose_rank, pod_projection_error, projection_error_onto, relative_information_content,
    PodBasis,
};
pub use snapshot::SnapshotMatrix;
pub use svd::{orthonormality_defect, symmetric_eigen_jacobi, truncated_svd, TruncatedSvd};
