//! Dense real linear-algebra kernels: numerical rank and nullspaces, real
//! Schur form with eigenvalue reordering, PSD square roots, matrix
//! exponentials, Sylvester/Lyapunov solves, RK4 step matrices and a banded
//! LU for sparse saddle-point systems.
//!
//! Matrices are `nalgebra::DMatrix<f64>` throughout; all operations are pure
//! functions of their arguments. Rank decisions are relative to the largest
//! singular value with [`RANK_TOL`] as default threshold, spectral axis tests
//! use [`SPECTRAL_TOL`] relative to the spectral radius.

pub mod banded;
pub mod eigen;
pub mod expm;
pub mod rk4;
pub mod subspace;
pub mod sylvester;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

pub use banded::{rcm_ordering, BandedLu};
pub use eigen::{
    eig_stats, invariant_split, min_positive_eigenvalue, psd_sqrt, real_schur, schur_form,
    sym_eigen, InvariantSplit, SchurForm,
};
pub use expm::expm;
pub use rk4::rk4_step_matrices;
pub use subspace::{dist_to_subspace, subspace_intersect, SubspaceBasis};
pub use sylvester::{solve_lyapunov, solve_sylvester};

/// Default relative tolerance for rank decisions.
pub const RANK_TOL: f64 = 1e-9;

/// Default relative tolerance for classifying eigenvalues as imaginary.
pub const SPECTRAL_TOL: f64 = 1e-8;

/// Orthonormality tolerance for subspace bases.
pub const ORTHO_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("Schur iteration did not converge within the sweep budget")]
    SchurNoConvergence,
    #[error("singular system: {0}")]
    Singular(String),
    #[error("matrix not symmetric within tolerance (residual {residual:.3e})")]
    NotSymmetric { residual: f64 },
    #[error("eigenvalue {value:.3e} below the positive semi-definite tolerance")]
    NotPsd { value: f64 },
    #[error("zero matrix has no positive eigenvalue")]
    ZeroMatrix,
    #[error("matrix exponential overflowed")]
    ExpOverflow,
    #[error("{0}")]
    Failed(String),
}

pub type Result<T> = std::result::Result<T, NumericsError>;

/// Errors unless every entry of `m` is finite.
pub fn ensure_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(NumericsError::NonFinite)
    }
}

/// Numerical rank: number of singular values above `tol` times the largest
/// singular value (or above `tol` itself for the zero matrix).
pub fn rank(m: &DMatrix<f64>, tol: f64) -> Result<usize> {
    ensure_finite(m)?;
    assert!(tol > 0.0, "rank tolerance must be positive");
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0);
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let thr = tol * if smax > 0.0 { smax } else { 1.0 };
    Ok(sv.iter().filter(|&&s| s > thr).count())
}

/// Orthonormal basis of the (numerical) kernel of `m`.
pub fn nullspace(m: &DMatrix<f64>, tol: f64) -> Result<SubspaceBasis> {
    ensure_finite(m)?;
    assert!(tol > 0.0, "rank tolerance must be positive");
    let n = m.ncols();
    if n == 0 {
        return Ok(SubspaceBasis::trivial(0));
    }
    if m.nrows() == 0 {
        return Ok(SubspaceBasis::full(n));
    }
    // Pad wide matrices with zero rows: nalgebra's thin SVD only carries
    // min(rows, cols) right singular vectors and we need all of V.
    let work = if m.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = work.svd(false, true);
    let v_t = svd.v_t.expect("nullspace: SVD without V requested");
    let sv = &svd.singular_values;
    let smax = if sv.len() == 0 { 0.0 } else { sv.max() };
    let thr = tol * if smax > 0.0 { smax } else { 1.0 };
    let r = sv.iter().filter(|&&s| s > thr).count();
    // Rows r..n of V^T (plus rows beyond the stored singular values when m is
    // wide) span the kernel.
    let k = n - r;
    let mut basis = DMatrix::zeros(n, k);
    for (dst, src) in (r..n).enumerate() {
        basis.set_column(dst, &v_t.row(src).transpose());
    }
    SubspaceBasis::new(n, basis)
}

/// Kernel with an absolute singular-value threshold: orthonormal basis of
/// the span of right singular vectors with `sigma <= abs_thr`. Used on
/// residual matrices whose own largest singular value is not a meaningful
/// scale (e.g. `A^2 + b^2 I` on an invariant subspace).
pub fn nullspace_abs(m: &DMatrix<f64>, abs_thr: f64) -> Result<SubspaceBasis> {
    ensure_finite(m)?;
    assert!(abs_thr >= 0.0, "threshold must be non-negative");
    let n = m.ncols();
    if n == 0 {
        return Ok(SubspaceBasis::trivial(0));
    }
    if m.nrows() == 0 {
        return Ok(SubspaceBasis::full(n));
    }
    let work = if m.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = work.svd(false, true);
    let v_t = svd.v_t.expect("nullspace_abs: SVD without V requested");
    let sv = &svd.singular_values;
    let r = sv.iter().filter(|&&s| s > abs_thr).count();
    let k = n - r;
    let mut basis = DMatrix::zeros(n, k);
    for (dst, src) in (r..n).enumerate() {
        basis.set_column(dst, &v_t.row(src).transpose());
    }
    SubspaceBasis::new(n, basis)
}

/// Orthonormal basis of the column space of `m`.
pub fn column_space(m: &DMatrix<f64>, tol: f64) -> Result<SubspaceBasis> {
    ensure_finite(m)?;
    let n = m.nrows();
    if n == 0 || m.ncols() == 0 {
        return Ok(SubspaceBasis::trivial(n));
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("column_space: SVD without U requested");
    let sv = &svd.singular_values;
    let smax = sv.max();
    let thr = tol * if smax > 0.0 { smax } else { 1.0 };
    let r = sv.iter().filter(|&&s| s > thr).count();
    let basis = u.columns(0, r).into_owned();
    SubspaceBasis::new(n, basis)
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Solves `a x = b` by partially pivoted LU, erroring on near-singularity.
pub fn solve_lu(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let lu = a.clone().lu();
    lu.solve(b)
        .ok_or_else(|| NumericsError::Singular("LU solve failed".into()))
}

/// Solves `a X = b` for a matrix right-hand side.
pub fn solve_lu_mat(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let lu = a.clone().lu();
    lu.solve(b)
        .ok_or_else(|| NumericsError::Singular("LU solve failed".into()))
}

/// Matrix inverse via LU.
pub fn invert(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    a.clone()
        .try_inverse()
        .ok_or_else(|| NumericsError::Singular("matrix not invertible".into()))
}

/// Minimum-norm least-squares solution via SVD.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    ensure_finite(a)?;
    let svd = a.clone().svd(true, true);
    svd.solve(b, RANK_TOL * svd.singular_values.max().max(1e-300))
        .map_err(|e| NumericsError::Singular(e.to_string()))
}

/// Reciprocal condition number estimate from the singular values.
pub fn rcond(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 1.0;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if smax == 0.0 {
        0.0
    } else {
        smin / smax
    }
}

/// Symmetrizes a matrix in place: `(m + m^T) / 2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rank_identity_and_zero() {
        let id = DMatrix::<f64>::identity(3, 3);
        assert_eq!(rank(&id, 1e-10).unwrap(), 3);
        let z = DMatrix::<f64>::zeros(2, 2);
        assert_eq!(rank(&z, 1e-10).unwrap(), 0);
    }

    #[test]
    fn rank_rejects_non_finite() {
        let mut m = DMatrix::<f64>::identity(2, 2);
        m[(0, 1)] = f64::NAN;
        assert!(rank(&m, 1e-10).is_err());
    }

    #[test]
    fn nullspace_of_identity_is_trivial() {
        let id = DMatrix::<f64>::identity(4, 4);
        let ns = nullspace(&id, 1e-10).unwrap();
        assert_eq!(ns.dim(), 0);
    }

    #[test]
    fn nullspace_msd_dissipation() {
        // R = [[1,1,0],[1,1,0],[0,0,0]] has kernel span{(1,-1,0)/sqrt(2), e3}.
        let r = DMatrix::from_row_slice(3, 3, &[1., 1., 0., 1., 1., 0., 0., 0., 0.]);
        let ns = nullspace(&r, 1e-10).unwrap();
        assert_eq!(ns.dim(), 2);
        let v1 = DVector::from_vec(vec![1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt(), 0.0]);
        let v2 = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        assert!(ns.dist(&v1) < 1e-10);
        assert!(ns.dist(&v2) < 1e-10);
        // Rank/nullity consistency.
        assert_eq!(rank(&r, 1e-10).unwrap() + ns.dim(), 3);
    }

    #[test]
    fn nullspace_wide_matrix() {
        let m = DMatrix::from_row_slice(1, 3, &[1., 0., 0.]);
        let ns = nullspace(&m, 1e-10).unwrap();
        assert_eq!(ns.dim(), 2);
    }

    #[test]
    fn least_squares_recovers_exact_solution() {
        let a = DMatrix::from_row_slice(3, 2, &[1., 0., 0., 1., 1., 1.]);
        let x = DVector::from_vec(vec![2.0, -1.0]);
        let b = &a * &x;
        let xs = least_squares(&a, &b).unwrap();
        assert_relative_eq!(xs, x, epsilon = 1e-10);
    }
}
