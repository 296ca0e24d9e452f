//! Thin SVD of tall snapshot matrices through the Gram matrix.
//!
//! For an `N x n` matrix with `n << N` the right singular vectors and the
//! squared singular values are the eigenpairs of the `n x n` Gram matrix
//! `S^T S`, computed here with cyclic Jacobi rotations. Left vectors follow
//! from `U = S V Sigma^-1` and are re-orthonormalized with two passes of
//! modified Gram-Schmidt; directions whose singular value is negligible are
//! completed from the canonical basis.

use nalgebra::DMatrix;

use crate::error::{Result, RomError};

/// Relative size below which a singular value is treated as zero when
/// recovering left singular vectors.
const NULL_SIGMA_RATIO: f64 = 1e-10;

const MAX_JACOBI_SWEEPS: usize = 100;

/// Rank-`k` factors of a thin SVD plus the full singular spectrum.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    /// `N x k`, orthonormal columns.
    pub u: DMatrix<f64>,
    /// All `n` singular values, nonincreasing.
    pub sigma: Vec<f64>,
    /// `n x k`, orthonormal columns.
    pub v: DMatrix<f64>,
}

/// Eigen-decomposition of a symmetric matrix by the cyclic Jacobi method.
///
/// Returns eigenvalues in the order they appear on the rotated diagonal and
/// the matching eigenvectors as columns. No sorting is applied.
pub fn symmetric_eigen_jacobi(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "Jacobi eigensolver needs a square matrix");
    let mut m = a.clone();
    let mut vecs = DMatrix::<f64>::identity(n, n);
    let total: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    if total == 0.0 {
        return (vec![0.0; n], vecs);
    }

    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() <= f64::EPSILON * total {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for r in 0..n {
                    let mrp = m[(r, p)];
                    let mrq = m[(r, q)];
                    m[(r, p)] = c * mrp - s * mrq;
                    m[(r, q)] = s * mrp + c * mrq;
                }
                for r in 0..n {
                    let mpr = m[(p, r)];
                    let mqr = m[(q, r)];
                    m[(p, r)] = c * mpr - s * mqr;
                    m[(q, r)] = s * mpr + c * mqr;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for r in 0..n {
                    let vrp = vecs[(r, p)];
                    let vrq = vecs[(r, q)];
                    vecs[(r, p)] = c * vrp - s * vrq;
                    vecs[(r, q)] = s * vrp + c * vrq;
                }
            }
        }
    }
    let values = (0..n).map(|i| m[(i, i)]).collect();
    (values, vecs)
}

/// Truncated SVD `S ~ U_k diag(sigma_1..sigma_k) V_k^T`.
pub fn truncated_svd(s: &DMatrix<f64>, k: usize) -> Result<TruncatedSvd> {
    let (rows, n) = s.shape();
    if rows == 0 || n == 0 {
        return Err(RomError::arg("empty matrix"));
    }
    if k == 0 || k > n {
        return Err(RomError::arg(format!("rank {k} outside 1..={n}")));
    }
    if k > rows {
        return Err(RomError::arg(format!(
            "rank {k} exceeds the state dimension {rows}"
        )));
    }
    if s.iter().any(|x| !x.is_finite()) {
        return Err(RomError::InvalidData(
            "matrix contains non-finite entries".into(),
        ));
    }

    let gram = s.tr_mul(s);
    let (eigvals, eigvecs) = symmetric_eigen_jacobi(&gram);

    let mut order: Vec<usize> = (0..n).collect();
    // Stable: equal eigenvalues keep their Jacobi order.
    order.sort_by(|&a, &b| eigvals[b].total_cmp(&eigvals[a]));
    let sigma: Vec<f64> = order.iter().map(|&i| eigvals[i].max(0.0).sqrt()).collect();

    let mut v = DMatrix::<f64>::zeros(n, k);
    for (j, &src) in order.iter().take(k).enumerate() {
        v.set_column(j, &eigvecs.column(src));
    }

    let cutoff = NULL_SIGMA_RATIO * sigma[0];
    let mut u = DMatrix::<f64>::zeros(rows, k);
    let mut null_cols = Vec::new();
    for j in 0..k {
        if sigma[j] > cutoff && sigma[j] > 0.0 {
            let col = s * v.column(j) / sigma[j];
            u.set_column(j, &col);
        } else {
            null_cols.push(j);
        }
    }
    orthonormalize(&mut u, &null_cols);

    for j in 0..k {
        let (imax, _) = u
            .column(j)
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |(bi, bv), (i, &x)| {
                if x.abs() > bv {
                    (i, x.abs())
                } else {
                    (bi, bv)
                }
            });
        if u[(imax, j)] < 0.0 {
            u.column_mut(j).neg_mut();
            v.column_mut(j).neg_mut();
        }
    }

    Ok(TruncatedSvd { u, sigma, v })
}

/// Two-pass modified Gram-Schmidt over the columns of `u`, in order. Columns
/// listed in `fill` (and any column that collapses) are replaced by the first
/// canonical basis vector that is not already in the span.
fn orthonormalize(u: &mut DMatrix<f64>, fill: &[usize]) {
    let (rows, k) = u.shape();
    let mut next_canonical = 0usize;
    for j in 0..k {
        let mut needs_fill = fill.contains(&j);
        if !needs_fill {
            for _ in 0..2 {
                for prev in 0..j {
                    let dot = u.column(prev).dot(&u.column(j));
                    let pc = u.column(prev).into_owned();
                    u.column_mut(j).axpy(-dot, &pc, 1.0);
                }
            }
            let norm = u.column(j).norm();
            if norm < 1e-8 {
                needs_fill = true;
            } else {
                u.column_mut(j).unscale_mut(norm);
            }
        }
        if needs_fill {
            loop {
                assert!(next_canonical < rows, "cannot complete orthonormal basis");
                u.column_mut(j).fill(0.0);
                u[(next_canonical, j)] = 1.0;
                next_canonical += 1;
                for _ in 0..2 {
                    for prev in 0..j {
                        let dot = u.column(prev).dot(&u.column(j));
                        let pc = u.column(prev).into_owned();
                        u.column_mut(j).axpy(-dot, &pc, 1.0);
                    }
                }
                let norm = u.column(j).norm();
                if norm > 0.5 {
                    u.column_mut(j).unscale_mut(norm);
                    break;
                }
            }
        }
    }
}

/// Largest absolute deviation of `Q^T Q` from the identity.
pub fn orthonormality_defect(q: &DMatrix<f64>) -> f64 {
    let g = q.tr_mul(q);
    let mut worst = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn identity_has_unit_singular_values() {
        let svd = truncated_svd(&DMatrix::identity(2, 2), 2).unwrap();
        assert_eq!(svd.sigma, vec![1.0, 1.0]);
    }

    #[test]
    fn rank_one_norm() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let svd = truncated_svd(&s, 1).unwrap();
        assert!((svd.sigma[0] - 5.0).abs() < 1e-12);
        assert!(svd.sigma[1].abs() < 1e-7);
        assert!(orthonormality_defect(&svd.u) < 1e-12);
    }

    #[test]
    fn full_rank_reconstruction_matches_gram_oracle() {
        let s = random_matrix(12, 5, 7);
        let svd = truncated_svd(&s, 5).unwrap();
        let sig = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(svd.sigma.clone()));
        let recon = &svd.u * sig * svd.v.transpose();
        assert!((&recon - &s).norm() / s.norm() < 1e-12);

        // Independent oracle: nalgebra's symmetric eigensolver on S^T S.
        let eig = nalgebra::SymmetricEigen::new(s.tr_mul(&s));
        let mut oracle: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
        oracle.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in svd.sigma.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12 * oracle[0]);
        }
        assert!(orthonormality_defect(&svd.u) < 1e-10);
        assert!(orthonormality_defect(&svd.v) < 1e-10);
    }

    #[test]
    fn left_vectors_follow_from_right_vectors() {
        let s = random_matrix(30, 6, 11);
        let svd = truncated_svd(&s, 4).unwrap();
        for j in 0..4 {
            let rebuilt = &s * svd.v.column(j) / svd.sigma[j];
            assert!((rebuilt - svd.u.column(j)).norm() < 1e-10);
        }
    }

    #[test]
    fn sign_convention_makes_largest_entry_positive() {
        let s = random_matrix(20, 4, 3);
        let svd = truncated_svd(&s, 4).unwrap();
        for col in svd.u.column_iter() {
            let big = col
                .iter()
                .copied()
                .fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
            assert!(big > 0.0);
        }
    }

    #[test]
    fn rank_deficient_basis_is_completed() {
        // Two identical columns and a zero column: rank 1.
        let s = DMatrix::from_row_slice(
            4,
            3,
            &[1.0, 1.0, 0.0, 2.0, 2.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0],
        );
        let svd = truncated_svd(&s, 3).unwrap();
        assert!(orthonormality_defect(&svd.u) < 1e-10);
        assert!(svd.sigma[1] < 1e-7 && svd.sigma[2] < 1e-7);
    }

    #[test]
    fn argument_errors() {
        let s = random_matrix(5, 3, 1);
        assert!(matches!(truncated_svd(&s, 0), Err(RomError::Argument(_))));
        assert!(matches!(truncated_svd(&s, 4), Err(RomError::Argument(_))));
        let mut bad = s.clone();
        bad[(0, 0)] = f64::INFINITY;
        assert!(matches!(
            truncated_svd(&bad, 1),
            Err(RomError::InvalidData(_))
        ));
    }

    #[test]
    fn jacobi_handles_diagonal_and_zero_input() {
        let (vals, _) = symmetric_eigen_jacobi(&DMatrix::from_diagonal_element(3, 3, 2.0));
        assert_eq!(vals, vec![2.0, 2.0, 2.0]);
        let (vals, _) = symmetric_eigen_jacobi(&DMatrix::zeros(2, 2));
        assert_eq!(vals, vec![0.0, 0.0]);
    }
}
