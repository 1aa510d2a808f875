//! Orthonormal subspace bases, distances and intersections.

use nalgebra::{DMatrix, DVector};

use super::{ensure_finite, nullspace, NumericsError, Result, ORTHO_TOL};

/// A subspace of `R^ambient` represented by an orthonormal basis matrix.
/// Zero columns are forbidden; the empty basis represents `{0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    ambient: usize,
    basis: DMatrix<f64>,
}

impl SubspaceBasis {
    /// Wraps a basis matrix, checking column orthonormality.
    pub fn new(ambient: usize, basis: DMatrix<f64>) -> Result<Self> {
        ensure_finite(&basis)?;
        if basis.nrows() != ambient {
            return Err(NumericsError::DimensionMismatch(format!(
                "basis rows {} do not match ambient dimension {}",
                basis.nrows(),
                ambient
            )));
        }
        let k = basis.ncols();
        if k > 0 {
            let gram = basis.transpose() * &basis;
            let resid = (&gram - DMatrix::identity(k, k)).norm();
            if resid > ORTHO_TOL * (k as f64).sqrt().max(1.0) * 10.0 {
                return Err(NumericsError::Failed(format!(
                    "basis columns not orthonormal (residual {resid:.3e})"
                )));
            }
        }
        Ok(Self { ambient, basis })
    }

    /// Orthonormalizes arbitrary spanning columns first, then wraps them.
    pub fn from_spanning(ambient: usize, columns: &DMatrix<f64>, tol: f64) -> Result<Self> {
        super::column_space(columns, tol).and_then(|s| {
            if s.ambient == ambient {
                Ok(s)
            } else {
                Err(NumericsError::DimensionMismatch(
                    "spanning columns have wrong ambient dimension".into(),
                ))
            }
        })
    }

    /// The zero subspace of `R^n`.
    pub fn trivial(n: usize) -> Self {
        Self {
            ambient: n,
            basis: DMatrix::zeros(n, 0),
        }
    }

    /// The full space `R^n` with the standard basis.
    pub fn full(n: usize) -> Self {
        Self {
            ambient: n,
            basis: DMatrix::identity(n, n),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Orthogonal projection of `v` onto the subspace.
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        if self.dim() == 0 {
            return DVector::zeros(self.ambient);
        }
        &self.basis * (self.basis.transpose() * v)
    }

    /// Euclidean distance from `v` to the subspace.
    pub fn dist(&self, v: &DVector<f64>) -> f64 {
        assert_eq!(v.len(), self.ambient, "vector/ambient dimension mismatch");
        (v - self.project(v)).norm()
    }

    /// Whether `v` lies in the subspace up to `tol` (relative to `|v|`).
    pub fn contains(&self, v: &DVector<f64>, tol: f64) -> bool {
        self.dist(v) <= tol * v.norm().max(1.0)
    }

    /// Whether every column of `other` lies in this subspace up to `tol`.
    pub fn contains_subspace(&self, other: &SubspaceBasis, tol: f64) -> bool {
        (0..other.dim()).all(|j| self.dist(&other.basis.column(j).into_owned()) <= tol)
    }

    /// Projector matrix `B B^T` onto the subspace.
    pub fn projector(&self) -> DMatrix<f64> {
        if self.dim() == 0 {
            return DMatrix::zeros(self.ambient, self.ambient);
        }
        &self.basis * self.basis.transpose()
    }
}

/// Distance of `v` to the subspace spanned by `s`.
pub fn dist_to_subspace(v: &DVector<f64>, s: &SubspaceBasis) -> Result<f64> {
    if v.len() != s.ambient_dim() {
        return Err(NumericsError::DimensionMismatch(format!(
            "vector length {} vs ambient {}",
            v.len(),
            s.ambient_dim()
        )));
    }
    Ok(s.dist(v))
}

/// Intersection of subspaces, computed as the nullspace of the stacked
/// orthogonal-complement projectors `I - B_i B_i^T`.
pub fn subspace_intersect(bases: &[SubspaceBasis], tol: f64) -> Result<SubspaceBasis> {
    let n = match bases.first() {
        Some(b) => b.ambient_dim(),
        None => return Err(NumericsError::DimensionMismatch("empty basis list".into())),
    };
    if bases.iter().any(|b| b.ambient_dim() != n) {
        return Err(NumericsError::DimensionMismatch(
            "subspace ambient dimensions differ".into(),
        ));
    }
    let mut stacked = DMatrix::zeros(n * bases.len(), n);
    for (i, b) in bases.iter().enumerate() {
        let complement = DMatrix::identity(n, n) - b.projector();
        stacked.view_mut((i * n, 0), (n, n)).copy_from(&complement);
    }
    nullspace(&stacked, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RANK_TOL;

    fn span(cols: &[&[f64]]) -> SubspaceBasis {
        let n = cols[0].len();
        let mut m = DMatrix::zeros(n, cols.len());
        for (j, c) in cols.iter().enumerate() {
            m.set_column(j, &DVector::from_row_slice(c));
        }
        SubspaceBasis::from_spanning(n, &m, RANK_TOL).unwrap()
    }

    #[test]
    fn coordinate_plane_intersection() {
        let a = span(&[&[1., 0., 0.], &[0., 1., 0.]]);
        let b = span(&[&[0., 1., 0.], &[0., 0., 1.]]);
        let cap = subspace_intersect(&[a, b], RANK_TOL).unwrap();
        assert_eq!(cap.dim(), 1);
        assert!(cap.dist(&DVector::from_row_slice(&[0., 1., 0.])) < 1e-10);
    }

    #[test]
    fn intersect_with_full_space_is_identity() {
        let a = span(&[&[1., 2., 0.], &[0., 0., 3.]]);
        let cap = subspace_intersect(&[a.clone(), SubspaceBasis::full(3)], RANK_TOL).unwrap();
        assert_eq!(cap.dim(), a.dim());
        for j in 0..a.dim() {
            assert!(cap.dist(&a.matrix().column(j).into_owned()) < 1e-10);
        }
    }

    #[test]
    fn dist_examples() {
        let s = span(&[&[0., 1.]]);
        let e1 = DVector::from_row_slice(&[1., 0.]);
        assert!((s.dist(&e1) - 1.0).abs() < 1e-12);
        let inside = DVector::from_row_slice(&[0., 3.]);
        assert!(s.dist(&inside) < 1e-12);
    }

    #[test]
    fn trivial_subspace_distance_is_norm() {
        let t = SubspaceBasis::trivial(2);
        let v = DVector::from_row_slice(&[3., 4.]);
        assert!((t.dist(&v) - 5.0).abs() < 1e-12);
    }
}
