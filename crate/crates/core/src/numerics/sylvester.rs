//! Sylvester and Lyapunov solves via dense Kronecker linearization.
//! Intended for the small blocks arising in Schur reordering and
//! dissipative-Hamiltonian witness construction.

use nalgebra::{DMatrix, DVector};

use super::{NumericsError, Result};

/// Solves `A X + X B = C` with `A` p-by-p, `B` q-by-q, `C` p-by-q.
pub fn solve_sylvester(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let p = a.nrows();
    let q = b.nrows();
    if a.ncols() != p || b.ncols() != q || c.nrows() != p || c.ncols() != q {
        return Err(NumericsError::DimensionMismatch(
            "sylvester operands have incompatible shapes".into(),
        ));
    }
    if p == 0 || q == 0 {
        return Ok(DMatrix::zeros(p, q));
    }
    // vec(AX + XB) = (I_q (x) A + B^T (x) I_p) vec(X), columns stacked.
    let dim = p * q;
    let mut k = DMatrix::zeros(dim, dim);
    for j in 0..q {
        for i in 0..p {
            let row = j * p + i;
            for l in 0..p {
                k[(row, j * p + l)] += a[(i, l)];
            }
            for l in 0..q {
                k[(row, l * p + i)] += b[(l, j)];
            }
        }
    }
    let mut rhs = DVector::zeros(dim);
    for j in 0..q {
        for i in 0..p {
            rhs[j * p + i] = c[(i, j)];
        }
    }
    let sol = k
        .lu()
        .solve(&rhs)
        .ok_or_else(|| NumericsError::Singular("sylvester operator singular".into()))?;
    let mut x = DMatrix::zeros(p, q);
    for j in 0..q {
        for i in 0..p {
            x[(i, j)] = sol[j * p + i];
        }
    }
    Ok(x)
}

/// Solves the continuous Lyapunov equation `A X + X A^T = C`.
pub fn solve_lyapunov(a: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    solve_sylvester(a, &a.transpose(), c)
}
