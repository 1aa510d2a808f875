//! Classical RK4 one-step matrices for linear time-invariant dynamics with
//! piecewise-constant input.

use nalgebra::DMatrix;

/// One classical RK4 step of `x' = A x + B u` with `u` frozen over the step:
/// `x_{k+1} = Ad x_k + Bd u_k` where
/// `Ad = I + hA + (hA)^2/2 + (hA)^3/6 + (hA)^4/24` and
/// `Bd = h (I + hA/2 + (hA)^2/6 + (hA)^3/24) B`.
pub fn rk4_step_matrices(a: &DMatrix<f64>, b: &DMatrix<f64>, h: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    assert_eq!(a.ncols(), n, "A must be square");
    assert_eq!(b.nrows(), n, "B row count must match A");
    let ha = a * h;
    let ha2 = &ha * &ha;
    let ha3 = &ha2 * &ha;
    let ha4 = &ha3 * &ha;
    let id = DMatrix::identity(n, n);
    let ad = &id + &ha + &ha2 / 2.0 + &ha3 / 6.0 + &ha4 / 24.0;
    let bd = (&id + &ha / 2.0 + &ha2 / 6.0 + &ha3 / 24.0) * b * h;
    (ad, bd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::expm;
    use nalgebra::DVector;

    #[test]
    fn matches_stagewise_rk4() {
        let a = DMatrix::from_row_slice(2, 2, &[-0.3, 1.0, -1.0, -0.2]);
        let b = DMatrix::from_row_slice(2, 1, &[0.5, 1.0]);
        let h = 0.1;
        let x0 = DVector::from_row_slice(&[1.0, -2.0]);
        let u = DVector::from_row_slice(&[0.7]);

        let f = |x: &DVector<f64>| &a * x + &b * &u;
        let k1 = f(&x0);
        let k2 = f(&(&x0 + &k1 * (h / 2.0)));
        let k3 = f(&(&x0 + &k2 * (h / 2.0)));
        let k4 = f(&(&x0 + &k3 * h));
        let x1 = &x0 + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);

        let (ad, bd) = rk4_step_matrices(&a, &b, h);
        let x1m = &ad * &x0 + &bd * &u;
        assert!((x1 - x1m).norm() < 1e-14);
    }

    #[test]
    fn fourth_order_accuracy() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -4.0, -0.4]);
        let b = DMatrix::zeros(2, 1);
        // One step: local error is O(h^5 ||A||^5 / 5!).
        let exact = expm(&a, 0.001).unwrap();
        let (ad, _) = rk4_step_matrices(&a, &b, 0.001);
        assert!((exact - ad).norm() < 1e-12);
    }
}
