//! Matrix-pencil analysis: Wong sequences, quasi-Weierstrass form,
//! regularity and differentiation index, dissipative-Hamiltonian
//! certification, and initial-value solves for index-at-most-one DAEs.

pub mod dh;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

pub use dh::{is_dh_matrix, is_dh_pencil, DhMatrixCertificate, DhPencilCertificate, DhWitness};

use crate::model::{PhDaeSystem, Trajectory};
use crate::numerics::{
    self, column_space, nullspace, rank, rk4_step_matrices, subspace_intersect, NumericsError,
    SubspaceBasis, RANK_TOL,
};

#[derive(Debug, Error)]
pub enum PencilError {
    #[error("pencil sE - A is not regular")]
    Irregular,
    #[error("mu E - A singular at the probed mu = {0}")]
    SingularProbe(f64),
    #[error("DAE has differentiation index {0}; only index <= 1 is solvable here")]
    IndexTooHigh(usize),
    #[error("initial datum w0 is not consistent (not in im E)")]
    InconsistentInitialDatum,
    #[error("quasi-Weierstrass reconstruction failed: residual {0:.3e}")]
    Reconstruction(f64),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, PencilError>;

/// Quasi-Weierstrass data of a regular pencil `sE - A`:
/// `S (C (+) I_W) = A`, `S (I_V (+) N) = E` with respect to the Wong
/// splitting `R^n = V (+) W`, `N` nilpotent of index `m`.
#[derive(Debug, Clone)]
pub struct QuasiWeierstrass {
    /// Invertible coupling matrix.
    pub s: DMatrix<f64>,
    /// ODE part, in `v_basis` coordinates (n1 x n1).
    pub c: DMatrix<f64>,
    /// Nilpotent part, in `w_basis` coordinates (n2 x n2).
    pub n_nilpotent: DMatrix<f64>,
    /// Orthonormal basis of the differential subspace `V` (n x n1).
    pub v_basis: DMatrix<f64>,
    /// Orthonormal basis of the algebraic subspace `W` (n x n2).
    pub w_basis: DMatrix<f64>,
    /// Differentiation index (ascent = descent of `T`).
    pub index: usize,
    /// Shift used to build `T = (mu E - A)^{-1} E`.
    pub mu: f64,
    /// Projector onto `V` along `W`.
    pub p_v: DMatrix<f64>,
    /// Projector onto `W` along `V`.
    pub p_w: DMatrix<f64>,
}

impl QuasiWeierstrass {
    pub fn n1(&self) -> usize {
        self.c.nrows()
    }

    pub fn n2(&self) -> usize {
        self.n_nilpotent.nrows()
    }

    /// Change of basis `[v_basis, w_basis]`.
    fn basis_matrix(&self) -> DMatrix<f64> {
        let n = self.v_basis.nrows();
        let mut x = DMatrix::zeros(n, n);
        x.view_mut((0, 0), (n, self.n1())).copy_from(&self.v_basis);
        x.view_mut((0, self.n1()), (n, self.n2()))
            .copy_from(&self.w_basis);
        x
    }

    /// Coordinates `(xi, eta)` of `z` with respect to the `V (+) W` splitting.
    pub fn decompose(&self, z: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        let x = self.basis_matrix();
        let c = numerics::solve_lu(&x, z)?;
        Ok((
            c.rows(0, self.n1()).into_owned(),
            c.rows(self.n1(), self.n2()).into_owned(),
        ))
    }

    /// Columnwise `decompose` of a matrix.
    pub fn decompose_mat(&self, z: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let x = self.basis_matrix();
        let c = numerics::solve_lu_mat(&x, z)?;
        Ok((
            c.rows(0, self.n1()).into_owned(),
            c.rows(self.n1(), self.n2()).into_owned(),
        ))
    }

    /// State vector from splitting coordinates.
    pub fn compose(&self, xi: &DVector<f64>, eta: &DVector<f64>) -> DVector<f64> {
        let mut z = &self.v_basis * xi;
        if self.n2() > 0 {
            z += &self.w_basis * eta;
        }
        z
    }

    /// Finite pencil eigenvalues (spectrum of the ODE part).
    pub fn finite_spectrum(&self) -> Result<Vec<nalgebra::Complex<f64>>> {
        if self.n1() == 0 {
            return Ok(vec![]);
        }
        let sf = numerics::schur_form(&self.c)?;
        Ok(sf.eigenvalues())
    }
}

/// Computes the quasi-Weierstrass form through the Wong sequences of
/// `T = (mu E - A)^{-1} E`. Fails with [`PencilError::SingularProbe`] when
/// `mu E - A` is singular so the caller can re-probe.
pub fn wong_sequences(e: &DMatrix<f64>, a: &DMatrix<f64>, mu: f64) -> Result<QuasiWeierstrass> {
    numerics::ensure_finite(e)?;
    numerics::ensure_finite(a)?;
    let n = e.nrows();
    if e.ncols() != n || a.nrows() != n || a.ncols() != n {
        return Err(NumericsError::DimensionMismatch(
            "wong_sequences needs square matrices of equal size".into(),
        )
        .into());
    }
    let shifted = e * mu - a;
    if numerics::rcond(&shifted) < 1e-12 {
        return Err(PencilError::SingularProbe(mu));
    }
    let t = numerics::solve_lu_mat(&shifted, e)?;

    // Ascent = descent: the first k with rank T^{k+1} = rank T^k.
    let mut power = DMatrix::<f64>::identity(n, n);
    let mut prev_rank = n;
    let mut index = n;
    let mut t_m = power.clone();
    for k in 1..=n + 1 {
        power = &t * &power;
        let rk = rank(&power, RANK_TOL)?;
        if rk == prev_rank {
            index = k - 1;
            break;
        }
        t_m = power.clone();
        prev_rank = rk;
    }

    let qw = if index == 0 {
        // E invertible: identity bases keep the ODE part bit-compatible with
        // a plain solve of x' = E^{-1} A x.
        let c = numerics::solve_lu_mat(e, a)?;
        QuasiWeierstrass {
            s: e.clone(),
            c,
            n_nilpotent: DMatrix::zeros(0, 0),
            v_basis: DMatrix::identity(n, n),
            w_basis: DMatrix::zeros(n, 0),
            index,
            mu,
            p_v: DMatrix::identity(n, n),
            p_w: DMatrix::zeros(n, n),
        }
    } else {
        let v_basis = column_space(&t_m, RANK_TOL)?;
        let w_basis = nullspace(&t_m, RANK_TOL)?;
        let n1 = v_basis.dim();
        let n2 = w_basis.dim();
        if n1 + n2 != n {
            return Err(PencilError::Reconstruction(f64::INFINITY));
        }
        let vb = v_basis.matrix().clone();
        let wb = w_basis.matrix().clone();
        let mut x = DMatrix::zeros(n, n);
        x.view_mut((0, 0), (n, n1)).copy_from(&vb);
        x.view_mut((0, n1), (n, n2)).copy_from(&wb);
        let x_inv = numerics::invert(&x)?;
        let mut sel = DMatrix::zeros(n, n);
        for i in 0..n1 {
            sel[(i, i)] = 1.0;
        }
        let p_v = &x * sel * &x_inv;
        let p_w = DMatrix::identity(n, n) - &p_v;

        // Restrictions of T to the invariant subspaces.
        let t_v = vb.transpose() * &t * &vb;
        let t_w = wb.transpose() * &t * &wb;
        let c = if n1 > 0 {
            DMatrix::identity(n1, n1) * mu - numerics::invert(&t_v)?
        } else {
            DMatrix::zeros(0, 0)
        };
        let n_nil = if n2 > 0 {
            let denom = &t_w * mu - DMatrix::identity(n2, n2);
            &t_w * numerics::invert(&denom)?
        } else {
            DMatrix::zeros(0, 0)
        };
        let s = e * &p_v + a * &p_w;
        QuasiWeierstrass {
            s,
            c,
            n_nilpotent: n_nil,
            v_basis: vb,
            w_basis: wb,
            index,
            mu,
            p_v,
            p_w,
        }
    };

    let resid = reconstruction_residual(&qw, e, a);
    let scale = a.norm() + e.norm();
    if resid > 1e-8 * scale.max(1.0) {
        return Err(PencilError::Reconstruction(resid));
    }
    Ok(qw)
}

/// `|S(C (+) I) - A| + |S(I (+) N) - E|`.
pub fn reconstruction_residual(qw: &QuasiWeierstrass, e: &DMatrix<f64>, a: &DMatrix<f64>) -> f64 {
    let n = e.nrows();
    let (n1, n2) = (qw.n1(), qw.n2());
    let x = qw.basis_matrix();
    let x_inv = match numerics::invert(&x) {
        Ok(m) => m,
        Err(_) => return f64::INFINITY,
    };
    let mut block_a = DMatrix::zeros(n, n);
    block_a.view_mut((0, 0), (n1, n1)).copy_from(&qw.c);
    for i in 0..n2 {
        block_a[(n1 + i, n1 + i)] = 1.0;
    }
    let mut block_e = DMatrix::zeros(n, n);
    for i in 0..n1 {
        block_e[(i, i)] = 1.0;
    }
    block_e
        .view_mut((n1, n1), (n2, n2))
        .copy_from(&qw.n_nilpotent);
    let a_rec = &qw.s * &x * block_a * &x_inv;
    let e_rec = &qw.s * &x * block_e * &x_inv;
    (a_rec - a).norm() + (e_rec - e).norm()
}

/// Result of the regularity probe.
#[derive(Debug, Clone)]
pub struct RegularityCheck {
    pub regular: bool,
    /// A shift at which `mu E - A` is invertible, when regular.
    pub witness_mu: Option<f64>,
    pub probes: usize,
}

/// Deterministic probe schedule: one norm-based shift, then a low-discrepancy
/// sweep of `[1, 2 + |A| + |E|]`. `det(sE - A)` has degree at most n, so n+1
/// singular probes prove irregularity.
fn probe_schedule(e: &DMatrix<f64>, a: &DMatrix<f64>) -> Vec<f64> {
    let n = e.nrows();
    let mut probes = vec![1.0 + a.norm() / e.norm().max(1.0)];
    let hi = 2.0 + a.norm() + e.norm();
    const PHI: f64 = 0.618_033_988_749_894_9;
    for k in 1..=n {
        let frac = (k as f64 * PHI).fract();
        probes.push(1.0 + frac * (hi - 1.0));
    }
    probes
}

/// Regularity test: `det(mu E - A) != 0` for some probe.
pub fn is_regular(e: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<RegularityCheck> {
    numerics::ensure_finite(e)?;
    numerics::ensure_finite(a)?;
    let probes = probe_schedule(e, a);
    let total = probes.len();
    for mu in probes {
        let shifted = e * mu - a;
        if numerics::rcond(&shifted) > 1e-12 {
            return Ok(RegularityCheck {
                regular: true,
                witness_mu: Some(mu),
                probes: total,
            });
        }
    }
    Ok(RegularityCheck {
        regular: false,
        witness_mu: None,
        probes: total,
    })
}

/// Differentiation index of a regular pencil, verified against two distinct
/// admissible shifts.
pub fn pencil_index(e: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<usize> {
    let reg = is_regular(e, a)?;
    let mu1 = reg.witness_mu.ok_or(PencilError::Irregular)?;
    let qw1 = wong_sequences(e, a, mu1)?;
    // Second admissible probe for mu-independence.
    let second = probe_schedule(e, a)
        .into_iter()
        .find(|&mu| (mu - mu1).abs() > 1e-9 && numerics::rcond(&(e * mu - a)) > 1e-12);
    if let Some(mu2) = second {
        let qw2 = wong_sequences(e, a, mu2)?;
        if qw2.index != qw1.index {
            return Err(PencilError::Reconstruction(f64::INFINITY));
        }
    }
    Ok(qw1.index)
}

/// Quasi-Weierstrass form at an automatically chosen admissible shift.
pub fn quasi_weierstrass(e: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<QuasiWeierstrass> {
    let reg = is_regular(e, a)?;
    let mu = reg.witness_mu.ok_or(PencilError::Irregular)?;
    wong_sequences(e, a, mu)
}

/// Regularity of a dissipative Hamiltonian pencil via the kernel condition
/// `ker E  ∩  ker(RQ)  ∩  ker(Q^T J Q) = {0}`.
pub fn dh_regularity_check(sys: &PhDaeSystem, rank_tol: f64) -> Result<bool> {
    let rq = sys.r() * sys.q();
    let qjq = sys.q().transpose() * sys.j() * sys.q();
    let kernels = [
        nullspace(sys.e(), rank_tol)?,
        nullspace(&rq, rank_tol)?,
        nullspace(&qjq, rank_tol)?,
    ];
    Ok(subspace_intersect(&kernels, rank_tol)?.dim() == 0)
}

/// Index-at-most-one test for a dissipative Hamiltonian pencil via
/// `ker E ∩ ker(RQ) ∩ (JQ)^{-1} im E = {0}`.
pub fn dh_index_le1_check(sys: &PhDaeSystem, rank_tol: f64) -> Result<bool> {
    let rq = sys.r() * sys.q();
    let jq = sys.j() * sys.q();
    let im_e = column_space(sys.e(), rank_tol)?;
    let n = sys.n();
    // (JQ)^{-1} im E = ker((I - Pi_imE) JQ).
    let off_image = (DMatrix::identity(n, n) - im_e.projector()) * &jq;
    let kernels = [
        nullspace(sys.e(), rank_tol)?,
        nullspace(&rq, rank_tol)?,
        nullspace(&off_image, rank_tol)?,
    ];
    Ok(subspace_intersect(&kernels, rank_tol)?.dim() == 0)
}

/// Solves the index-<=1 DAE IVP `d/dt(Ex) = (J-R)Qx + Bu`, `Ex(0) = w0` with
/// piecewise-constant controls on a uniform grid: RK4 on the differential
/// part, pointwise assignment of the algebraic part.
pub fn solve_dae_ivp(
    sys: &PhDaeSystem,
    controls: &[DVector<f64>],
    w0: &DVector<f64>,
    t_end: f64,
) -> Result<Trajectory> {
    let a = sys.a();
    let qw = quasi_weierstrass(sys.e(), &a)?;
    solve_dae_ivp_with(sys, &qw, controls, w0, t_end)
}

/// Like [`solve_dae_ivp`] but reusing a precomputed quasi-Weierstrass form.
pub fn solve_dae_ivp_with(
    sys: &PhDaeSystem,
    qw: &QuasiWeierstrass,
    controls: &[DVector<f64>],
    w0: &DVector<f64>,
    t_end: f64,
) -> Result<Trajectory> {
    if qw.index > 1 {
        return Err(PencilError::IndexTooHigh(qw.index));
    }
    assert!(!controls.is_empty(), "need at least one control interval");
    let n_steps = controls.len();
    let h = t_end / n_steps as f64;
    let (_n1, n2) = (qw.n1(), qw.n2());

    // Split S^{-1} B and S^{-1} w0 along V (+) W.
    let sinv_b = numerics::solve_lu_mat(&qw.s, sys.b())?;
    let (g_xi, g_eta) = qw.decompose_mat(&sinv_b)?;
    let sinv_w0 = numerics::solve_lu(&qw.s, w0)?;
    let (xi0, eta0) = qw.decompose(&sinv_w0)?;
    if n2 > 0 && eta0.norm() > 1e-8 * (1.0 + w0.norm()) {
        return Err(PencilError::InconsistentInitialDatum);
    }

    let (ad, bd) = rk4_step_matrices(&qw.c, &g_xi, h);
    let mut xi = xi0;
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    let algebraic = |u: &DVector<f64>| -> DVector<f64> {
        if n2 > 0 {
            -(&g_eta * u)
        } else {
            DVector::zeros(0)
        }
    };
    times.push(0.0);
    states.push(qw.compose(&xi, &algebraic(&controls[0])));
    for (k, u) in controls.iter().enumerate() {
        xi = &ad * &xi + &bd * u;
        times.push(h * (k + 1) as f64);
        let u_next = controls.get(k + 1).unwrap_or(u);
        states.push(qw.compose(&xi, &algebraic(u_next)));
    }
    let mut ctl: Vec<DVector<f64>> = controls.to_vec();
    ctl.push(controls.last().unwrap().clone());
    let outputs = states.iter().map(|x| sys.output(x)).collect();
    Ok(Trajectory {
        times,
        states,
        controls: ctl,
        outputs,
    })
}

/// Orthonormal basis of `im E` (the set of admissible data `w`).
pub fn image_of_e(sys: &PhDaeSystem, rank_tol: f64) -> Result<SubspaceBasis> {
    Ok(column_space(sys.e(), rank_tol)?)
}
