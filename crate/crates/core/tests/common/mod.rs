//! Shared generators for the integration suites: random valid pH-ODE
//! systems, random regular index-one pH-DAEs built from block form, and
//! random regular pencils with prescribed index.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use phoc_core::model::{PhDaeSystem, PhOdeSystem};

pub fn rand_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

/// Random orthogonal matrix from the QR of a random square matrix.
pub fn rand_orthogonal<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let qr = rand_matrix(rng, n, n).qr();
    qr.q()
}

/// Random invertible matrix with singular values in [0.5, 2].
pub fn rand_well_conditioned<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let u = rand_orthogonal(rng, n);
    let v = rand_orthogonal(rng, n);
    let d = DMatrix::from_diagonal(&DVector::from_fn(n, |_, _| rng.gen_range(0.5..2.0)));
    u * d * v
}

pub fn rand_skew<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let m = rand_matrix(rng, n, n);
    (&m - m.transpose()) * 0.5
}

pub fn rand_psd<R: Rng>(rng: &mut R, n: usize, rank: usize) -> DMatrix<f64> {
    if rank == 0 {
        return DMatrix::zeros(n, n);
    }
    let g = rand_matrix(rng, n, rank);
    &g * g.transpose()
}

/// Random validated pH-ODE with feed-through. `W >= 0` is arranged by
/// drawing `[[R, P], [P', S]]` as a Gram matrix.
pub fn random_ph_ode<R: Rng>(rng: &mut R, n: usize, m: usize) -> PhOdeSystem {
    loop {
        let j = rand_skew(rng, n);
        let block = rand_psd(rng, n + m, n + m);
        let r = block.view((0, 0), (n, n)).into_owned();
        let p = block.view((0, n), (n, m)).into_owned();
        let s = block.view((n, n), (m, m)).into_owned();
        // Q occasionally singular.
        let q_rank = if rng.gen_bool(0.3) { n.saturating_sub(1).max(1) } else { n };
        let q = rand_psd(rng, n, q_rank);
        let d = &s + rand_skew(rng, m);
        let b = rand_matrix(rng, n, m);
        if let Ok(sys) = PhOdeSystem::validate(j, r, q, b, p, d) {
            return sys;
        }
    }
}

/// Random regular index-one pH-DAE assembled from the transformed block
/// form: `E = U^{-T} diag(I, 0) V^{-1}`, `Q = U diag(Q11, Q22) V^{-1}`,
/// skew/PSD blocks pushed through `U^{-T} . U^{-1}`.
pub fn random_index1_dae<R: Rng>(rng: &mut R, n: usize, n2: usize, m: usize) -> PhDaeSystem {
    assert!(n2 < n);
    let n1 = n - n2;
    loop {
        let u = rand_well_conditioned(rng, n);
        let v = rand_well_conditioned(rng, n);
        let j_blocks = rand_skew(rng, n);
        let r_blocks = rand_psd(rng, n, n);
        let q11 = rand_psd(rng, n1, n1);
        let q22 = rand_well_conditioned(rng, n2);
        // Index one needs (J22 - R22) Q22 invertible.
        if n2 > 0 {
            let l22 = j_blocks.view((n1, n1), (n2, n2)).into_owned()
                - r_blocks.view((n1, n1), (n2, n2)).into_owned();
            if phoc_core::numerics::rcond(&l22) < 1e-3 {
                continue;
            }
        }
        let mut q_blocks = DMatrix::zeros(n, n);
        q_blocks.view_mut((0, 0), (n1, n1)).copy_from(&q11);
        q_blocks.view_mut((n1, n1), (n2, n2)).copy_from(&q22);
        let mut e_block = DMatrix::zeros(n, n);
        for i in 0..n1 {
            e_block[(i, i)] = 1.0;
        }
        let u_inv_t = u.transpose().try_inverse().unwrap();
        let u_inv = u.clone().try_inverse().unwrap();
        let v_inv = v.clone().try_inverse().unwrap();
        let e = &u_inv_t * &e_block * &v_inv;
        let j = &u_inv_t * &j_blocks * &u_inv;
        let r = &u_inv_t * &r_blocks * &u_inv;
        let q = &u * &q_blocks * &v_inv;
        let b = &u_inv_t * rand_matrix(rng, n, m);
        match PhDaeSystem::validate_with_tol(e, j, r, q, b, 1e-8) {
            Ok(sys) => return sys,
            Err(_) => continue,
        }
    }
}

/// Random regular pencil with a prescribed differentiation index, assembled
/// from `E = S X diag(I, N) X^{-1}`, `A = S X diag(C, I) X^{-1}` with `N`
/// nilpotent of the requested index. Returns `(E, A)`.
pub fn random_pencil_with_index<R: Rng>(
    rng: &mut R,
    n: usize,
    index: usize,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let n2 = if index == 0 { 0 } else { index.max(1) };
    assert!(n2 <= n);
    let n1 = n - n2;
    let s = rand_well_conditioned(rng, n);
    let x = rand_well_conditioned(rng, n);
    let c = rand_matrix(rng, n1, n1);
    // Single nilpotent Jordan block of the requested size.
    let mut nil = DMatrix::zeros(n2, n2);
    for i in 0..n2.saturating_sub(1) {
        nil[(i, i + 1)] = 1.0;
    }
    let mut e_block = DMatrix::zeros(n, n);
    for i in 0..n1 {
        e_block[(i, i)] = 1.0;
    }
    e_block.view_mut((n1, n1), (n2, n2)).copy_from(&nil);
    let mut a_block = DMatrix::zeros(n, n);
    a_block.view_mut((0, 0), (n1, n1)).copy_from(&c);
    for i in n1..n {
        a_block[(i, i)] = 1.0;
    }
    let x_inv = x.clone().try_inverse().unwrap();
    let e = &s * &x * e_block * &x_inv;
    let a = &s * &x * a_block * &x_inv;
    (e, a)
}

/// Piecewise-constant controls inside the symmetric box `[-bound, bound]^m`.
pub fn random_controls<R: Rng>(rng: &mut R, steps: usize, m: usize, bound: f64) -> Vec<DVector<f64>> {
    (0..steps)
        .map(|_| DVector::from_fn(m, |_, _| rng.gen_range(-bound..bound)))
        .collect()
}
