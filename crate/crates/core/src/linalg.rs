//! Spectral kernel shared by the subspace and regularity modules.
//!
//! Every singular-value decomposition in the crate goes through this
//! adapter, which delegates to `faer`.  The adapter exists because
//! `nalgebra`'s iterative SVD can silently return an invalid factorization
//! on benign near-rank-deficient tall matrices (observed: a 6×2 deflation
//! residual with exact singular values {1, ~1e-16} came back with
//! σ₀ = 1.0039 and a reconstruction error ‖A − UΣVᵀ‖ ≈ 9e-2).  Angle and
//! rank decisions built on such a factorization are wrong at the 1e-3
//! level, far outside every tolerance used here, so the decomposition is
//! delegated to a backend that handles these inputs correctly; see
//! `thin_svd_handles_near_rank_deficient_residuals` below for the pinned
//! regression case.

use nalgebra::{DMatrix, DVector};

/// Thin singular value decomposition A = U Σ Vᵀ with Σ square.
pub(crate) struct ThinSvd {
    /// nrows × k left singular vectors (orthonormal columns).
    pub u: DMatrix<f64>,
    /// The k = min(nrows, ncols) singular values, nonincreasing.
    pub sigma: DVector<f64>,
    /// ncols × k right singular vectors (orthonormal columns, not transposed).
    pub v: DMatrix<f64>,
}

fn to_faer(m: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Thin SVD of a dense matrix; singular values sorted in decreasing order.
///
/// Zero-sized inputs (no rows or no columns) yield empty factors without
/// touching the backend.
pub(crate) fn thin_svd(m: &DMatrix<f64>) -> ThinSvd {
    let (nr, nc) = m.shape();
    let k = nr.min(nc);
    if k == 0 {
        return ThinSvd {
            u: DMatrix::zeros(nr, 0),
            sigma: DVector::zeros(0),
            v: DMatrix::zeros(nc, 0),
        };
    }
    let svd = to_faer(m).thin_svd().expect("SVD did not converge");
    let (fu, fs, fv) = (svd.U(), svd.S(), svd.V());
    ThinSvd {
        u: DMatrix::from_fn(nr, k, |i, j| fu[(i, j)]),
        sigma: DVector::from_fn(k, |i, _| fs[i]),
        v: DMatrix::from_fn(nc, k, |i, j| fv[(i, j)]),
    }
}

/// Singular values of a dense matrix, nonincreasing.
pub(crate) fn singular_values(m: &DMatrix<f64>) -> DVector<f64> {
    let k = m.nrows().min(m.ncols());
    if k == 0 {
        return DVector::zeros(0);
    }
    let sv = to_faer(m)
        .singular_values()
        .expect("SVD did not converge");
    DVector::from_vec(sv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_matrix(rng: &mut ChaCha8Rng, nr: usize, nc: usize) -> DMatrix<f64> {
        DMatrix::from_fn(nr, nc, |_, _| rng.sample::<f64, _>(StandardNormal))
    }

    fn factorization_checks(m: &DMatrix<f64>) {
        let f = thin_svd(m);
        let k = m.nrows().min(m.ncols());
        assert_eq!(f.u.shape(), (m.nrows(), k));
        assert_eq!(f.sigma.len(), k);
        assert_eq!(f.v.shape(), (m.ncols(), k));
        for i in 1..k {
            assert!(f.sigma[i] <= f.sigma[i - 1] + 1e-15);
            assert!(f.sigma[i] >= 0.0);
        }
        let eye = DMatrix::<f64>::identity(k, k);
        assert_abs_diff_eq!((f.u.tr_mul(&f.u) - &eye).norm(), 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!((f.v.tr_mul(&f.v) - &eye).norm(), 0.0, epsilon = 1e-13);
        let recon = &f.u * DMatrix::from_diagonal(&f.sigma) * f.v.transpose();
        let scale = f.sigma.max().max(1.0);
        assert_abs_diff_eq!((m - recon).norm(), 0.0, epsilon = 1e-13 * scale);
        let sv = singular_values(m);
        for i in 0..k {
            assert_abs_diff_eq!(sv[i], f.sigma[i], epsilon = 1e-13 * scale);
        }
    }

    #[test]
    fn factors_random_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for &(nr, nc) in &[(1, 1), (5, 2), (2, 5), (6, 6), (12, 3), (3, 12), (9, 7)] {
            factorization_checks(&random_matrix(&mut rng, nr, nc));
        }
    }

    #[test]
    fn factors_rank_deficient_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        // Outer product: rank 1 embedded in 8×5.
        let a = random_matrix(&mut rng, 8, 1);
        let b = random_matrix(&mut rng, 5, 1);
        let m = &a * b.transpose();
        factorization_checks(&m);
        let f = thin_svd(&m);
        assert_abs_diff_eq!(f.sigma[0], a.norm() * b.norm(), epsilon = 1e-12);
        for i in 1..f.sigma.len() {
            assert!(f.sigma[i] < 1e-12);
        }
        // Duplicated columns.
        let c = random_matrix(&mut rng, 6, 2);
        let mut dup = DMatrix::zeros(6, 4);
        dup.view_mut((0, 0), (6, 2)).copy_from(&c);
        dup.view_mut((0, 2), (6, 2)).copy_from(&c);
        factorization_checks(&dup);
    }

    #[test]
    fn zero_sized_inputs_yield_empty_factors() {
        let f = thin_svd(&DMatrix::zeros(4, 0));
        assert_eq!(f.u.shape(), (4, 0));
        assert_eq!(f.sigma.len(), 0);
        assert_eq!(f.v.shape(), (0, 0));
        let f = thin_svd(&DMatrix::zeros(0, 3));
        assert_eq!(f.u.shape(), (0, 0));
        assert_eq!(f.v.shape(), (3, 0));
        assert_eq!(singular_values(&DMatrix::zeros(5, 0)).len(), 0);
    }

    #[test]
    fn zero_matrix_has_zero_spectrum() {
        let f = thin_svd(&DMatrix::zeros(4, 2));
        assert_eq!(f.sigma.len(), 2);
        assert_eq!(f.sigma[0], 0.0);
        assert_eq!(f.sigma[1], 0.0);
    }

    /// Regression: a near-rank-1 tall residual of the kind produced by
    /// subspace deflation.  The columns are two nearly anti-parallel copies
    /// of one direction plus orthogonal noise at the 1e-16 scale; the exact
    /// spectrum is {1, O(1e-16)}.  A mis-factorization here is what this
    /// module exists to prevent.
    #[test]
    fn thin_svd_handles_near_rank_deficient_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let d = 6;
            let t = random_matrix(&mut rng, d, 1).normalize();
            let noise = random_matrix(&mut rng, d, 2) * 1e-16;
            let alpha: f64 = rng.random_range(0.1..0.9);
            let beta = -(1.0 - alpha * alpha).sqrt();
            let mut m = DMatrix::zeros(d, 2);
            m.set_column(0, &(&t * alpha + noise.column(0)));
            m.set_column(1, &(&t * beta + noise.column(1)));
            let f = thin_svd(&m);
            assert_abs_diff_eq!(f.sigma[0], 1.0, epsilon = 1e-12);
            assert!(f.sigma[1] < 1e-12);
            let recon = &f.u * DMatrix::from_diagonal(&f.sigma) * f.v.transpose();
            assert_abs_diff_eq!((&m - recon).norm(), 0.0, epsilon = 1e-13);
            // The dominant left vector must be ±t to machine precision.
            let overlap = f.u.column(0).dot(&t).abs();
            assert_abs_diff_eq!(overlap, 1.0, epsilon = 1e-12);
        }
    }
}
