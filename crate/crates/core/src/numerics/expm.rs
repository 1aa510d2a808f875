//! Matrix exponential by Pade-13 scaling and squaring.

use nalgebra::DMatrix;

use super::{ensure_finite, NumericsError, Result};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

/// Computes `exp(t * m)`.
pub fn expm(m: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    ensure_finite(m)?;
    let n = m.nrows();
    if m.ncols() != n {
        return Err(NumericsError::DimensionMismatch(
            "expm requires a square matrix".into(),
        ));
    }
    if !t.is_finite() {
        return Err(NumericsError::NonFinite);
    }
    let a0 = m * t;
    // 1-norm: largest column absolute sum.
    let norm = (0..n)
        .map(|j| a0.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    if !norm.is_finite() {
        return Err(NumericsError::ExpOverflow);
    }
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as u32
    } else {
        0
    };
    let a = &a0 / 2f64.powi(s as i32);

    let id = DMatrix::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;
    let u_inner = &a6 * (b[13] * &a6 + b[11] * &a4 + b[9] * &a2)
        + b[7] * &a6
        + b[5] * &a4
        + b[3] * &a2
        + b[1] * &id;
    let u = &a * u_inner;
    let v = &a6 * (b[12] * &a6 + b[10] * &a4 + b[8] * &a2)
        + b[6] * &a6
        + b[4] * &a4
        + b[2] * &a2
        + b[0] * &id;

    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut x = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| NumericsError::Singular("expm Pade denominator singular".into()))?;
    for _ in 0..s {
        x = &x * &x;
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(NumericsError::ExpOverflow);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exp_of_zero_is_identity() {
        let z = DMatrix::<f64>::zeros(3, 3);
        assert_relative_eq!(
            expm(&z, 1.7).unwrap(),
            DMatrix::identity(3, 3),
            epsilon = 1e-14
        );
    }

    #[test]
    fn exp_of_diagonal() {
        let d = DMatrix::from_diagonal(&nalgebra::dvector![0.3, -1.2, 2.0]);
        let e = expm(&d, 0.5).unwrap();
        for (i, &a) in [0.3f64, -1.2, 2.0].iter().enumerate() {
            assert_relative_eq!(e[(i, i)], (0.5 * a).exp(), epsilon = 1e-12);
        }
    }

    #[test]
    fn exp_of_nilpotent_truncates() {
        let n = DMatrix::from_row_slice(2, 2, &[0., 1., 0., 0.]);
        let e = expm(&n, 1.0).unwrap();
        assert_relative_eq!(
            e,
            DMatrix::from_row_slice(2, 2, &[1., 1., 0., 1.]),
            epsilon = 1e-14
        );
    }

    #[test]
    fn exp_large_argument_scales() {
        // ‖tM‖ about 500: still accurate through scaling and squaring.
        let m = DMatrix::from_row_slice(2, 2, &[0., 1., -1., 0.]);
        let e = expm(&m, 500.0).unwrap();
        // exp of a rotation generator stays orthogonal.
        let resid = (e.transpose() * &e - DMatrix::<f64>::identity(2, 2)).norm();
        assert!(resid < 1e-9, "orthogonality residual {resid}");
        assert_relative_eq!(e[(0, 0)], 500f64.cos(), epsilon = 1e-9);
    }

    #[test]
    fn semigroup_property() {
        let m = DMatrix::from_row_slice(3, 3, &[-1., 2., 0., -2., -1., 1., 0., 0., -0.5]);
        let e_s = expm(&m, 0.7).unwrap();
        let e_t = expm(&m, 1.1).unwrap();
        let e_st = expm(&m, 1.8).unwrap();
        assert_relative_eq!(&e_s * &e_t, e_st, epsilon = 1e-10);
    }
}
