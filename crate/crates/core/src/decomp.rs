//! Structure-preserving reduction of a regular index-1 pH-DAE to a pH-ODE
//! with feed-through, algebraic-state recovery, solution lifting, and the
//! conservative/dissipative spectral splitting of a pH-ODE flow.
//!
//! ```text
//! U^T E V = [[I, 0], [0, 0]],  U^{-1} Q V = [[Q11, 0], [0, Q22]]
//! z1' = (J11 - R11) Q11 z1 + (Bh - Ph) u
//! y   = (Bh + Ph)^T Q11 z1 + (Sh + Nh) u
//! z2  = -Q22^{-1} L22^{-1} (L21 Q11 z1 + B2 u),   L = J - R blocks
//! ```

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::model::{PhDaeSystem, PhOdeSystem, Trajectory, ViolationReport};
use crate::numerics::{
    self, column_space, invariant_split, nullspace, schur_form, NumericsError, SubspaceBasis,
    RANK_TOL, SPECTRAL_TOL,
};
use crate::pencil::{dh_index_le1_check, dh_regularity_check, PencilError};

#[derive(Debug, Error)]
pub enum DecompError {
    #[error("reduction precondition failed: {0}")]
    Precondition(String),
    #[error("{what} is numerically singular (rcond {rcond:.3e})")]
    IllConditioned { what: String, rcond: f64 },
    #[error("postcondition violated: {what} (residual {residual:.3e})")]
    Postcondition { what: String, residual: f64 },
    #[error("reduced system failed validation:\n{0}")]
    ReducedInvalid(ViolationReport),
    #[error(transparent)]
    Pencil(#[from] PencilError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, DecompError>;

/// Outcome of the structure-preserving DAE-to-ODE reduction.
#[derive(Debug, Clone)]
pub struct BeattieReduction {
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
    pub u_inv: DMatrix<f64>,
    pub v_inv: DMatrix<f64>,
    pub n1: usize,
    pub j11: DMatrix<f64>,
    pub j12: DMatrix<f64>,
    pub j21: DMatrix<f64>,
    pub j22: DMatrix<f64>,
    pub r11: DMatrix<f64>,
    pub r12: DMatrix<f64>,
    pub r21: DMatrix<f64>,
    pub r22: DMatrix<f64>,
    pub q11: DMatrix<f64>,
    pub q22: DMatrix<f64>,
    pub b1: DMatrix<f64>,
    pub b2: DMatrix<f64>,
    pub b_hat: DMatrix<f64>,
    pub p_hat: DMatrix<f64>,
    pub s_hat: DMatrix<f64>,
    pub n_hat: DMatrix<f64>,
    /// The reduced pH-ODE with feed-through; its `w()` is the W-hat matrix.
    pub reduced: PhOdeSystem,
    /// `z2 = z2_from_z1 * z1 + z2_from_u * u`.
    z2_from_z1: DMatrix<f64>,
    z2_from_u: DMatrix<f64>,
}

fn check_residual(what: &str, residual: f64, scale: f64) -> Result<()> {
    if residual > 1e-9 * scale.max(1.0) {
        Err(DecompError::Postcondition {
            what: what.to_string(),
            residual,
        })
    } else {
        Ok(())
    }
}

/// Structure-preserving reduction of a regular index-1 pH-DAE.
///
/// Construction of `(U, V)`: `V2` spans `ker E`, `U2 = Q V2`, `V1` spans
/// `(ker E)^perp`, `U1` spans a complement of `span U2` containing
/// `im(Q V1)`, rescaled so `U1^T E V1 = I`. Every identity claimed of the
/// transform is then verified numerically.
pub fn beattie_reduce(sys: &PhDaeSystem) -> Result<BeattieReduction> {
    let n = sys.n();
    let m = sys.m();
    if !dh_regularity_check(sys, RANK_TOL)? {
        return Err(DecompError::Precondition("pencil is not regular".into()));
    }
    if !dh_index_le1_check(sys, RANK_TOL)? {
        return Err(DecompError::Precondition(
            "pencil has differentiation index greater than one".into(),
        ));
    }

    let ker_e = nullspace(sys.e(), RANK_TOL)?;
    let n2 = ker_e.dim();
    let n1 = n - n2;

    let (u, v) = if n2 == 0 {
        // Invertible E: V = I and U = E^{-T} already give the required form.
        let u = numerics::invert(&sys.e().transpose())?;
        (u, DMatrix::identity(n, n))
    } else {
        // V2 spans ker E, U2 = Q V2 spans its partner in ker E^T; the
        // remaining blocks are fixed by three exact identities:
        //   U1^T E V1 = I          (rescaling of a complement basis),
        //   U1^T (J-R) U2 = 0      (mixing U1 <- U1 + U2 K'; this *is*
        //                           R12 = J12 since U2^T E = 0 keeps the
        //                           E-identity intact),
        //   U^{-1} Q V1 tail = 0   (mixing V1 <- V1 + V2 M; E V2 = 0 keeps
        //                           the E-identity intact).
        // Q11 = Q11^T >= 0 is then automatic from V^T Q^T E V >= 0.
        let v2 = ker_e.matrix().clone();
        let v1_0 = column_space(&sys.e().transpose(), RANK_TOL)?.matrix().clone();
        let u2 = sys.q() * &v2;
        if numerics::rank(&u2, RANK_TOL)? != n2 {
            return Err(DecompError::Precondition(
                "Q restricted to ker E is rank deficient".into(),
            ));
        }
        let u1_pre = nullspace(&u2.transpose(), RANK_TOL)?.matrix().clone();
        if u1_pre.ncols() != n1 {
            return Err(DecompError::Precondition(
                "complement of span(Q V2) has the wrong dimension".into(),
            ));
        }
        let m_scale = u1_pre.transpose() * sys.e() * &v1_0;
        let rc = numerics::rcond(&m_scale);
        if rc < 1e-10 {
            return Err(DecompError::IllConditioned {
                what: "U1^T E V1".into(),
                rcond: rc,
            });
        }
        let u1_0 = &u1_pre * numerics::invert(&m_scale.transpose())?;

        let l = sys.j() - sys.r();
        let l22_full = u2.transpose() * &l * &u2;
        let rc22 = numerics::rcond(&l22_full);
        if rc22 < 1e-10 {
            return Err(DecompError::IllConditioned {
                what: "U2^T (J-R) U2".into(),
                rcond: rc22,
            });
        }
        let l12_0 = u1_0.transpose() * &l * &u2;
        // U1 = U1_0 - U2 L22^{-T} L12^T zeroes the (1,2) coupling of J - R.
        let k_mix = -numerics::invert(&l22_full.transpose())? * l12_0.transpose();
        let u1 = &u1_0 + &u2 * k_mix;

        let mut u = DMatrix::zeros(n, n);
        u.view_mut((0, 0), (n, n1)).copy_from(&u1);
        u.view_mut((0, n1), (n, n2)).copy_from(&u2);

        // Coordinates of Q V1 in the final U basis give the V1 correction.
        let coords = numerics::solve_lu_mat(&u, &(sys.q() * &v1_0))?;
        let tail = coords.rows(n1, n2).into_owned();
        let v1 = &v1_0 - &v2 * tail;
        let mut v = DMatrix::zeros(n, n);
        v.view_mut((0, 0), (n, n1)).copy_from(&v1);
        v.view_mut((0, n1), (n, n2)).copy_from(&v2);
        (u, v)
    };

    let u_inv = numerics::invert(&u)?;
    let v_inv = numerics::invert(&v)?;

    // Verified transform identities.
    let uev = u.transpose() * sys.e() * &v;
    let mut eye_block = DMatrix::zeros(n, n);
    for i in 0..n1 {
        eye_block[(i, i)] = 1.0;
    }
    check_residual("U^T E V = diag(I, 0)", (&uev - &eye_block).norm(), sys.e().norm())?;
    let q_blocks = &u_inv * sys.q() * &v;
    let off_q = q_blocks.view((0, n1), (n1, n2)).norm() + q_blocks.view((n1, 0), (n2, n1)).norm();
    check_residual("U^{-1} Q V block-diagonal", off_q, sys.q().norm())?;

    let jt = u.transpose() * sys.j() * &u;
    let rt = u.transpose() * sys.r() * &u;
    check_residual("U^T J U skew", (&jt + jt.transpose()).norm(), jt.norm())?;
    check_residual("U^T R U symmetric", (&rt - rt.transpose()).norm(), rt.norm())?;

    let blk = |mat: &DMatrix<f64>, i: usize, j: usize| -> DMatrix<f64> {
        let (ri, ni) = if i == 0 { (0, n1) } else { (n1, n2) };
        let (cj, nj) = if j == 0 { (0, n1) } else { (n1, n2) };
        mat.view((ri, cj), (ni, nj)).into_owned()
    };
    let (j11, j12, j21, j22) = (blk(&jt, 0, 0), blk(&jt, 0, 1), blk(&jt, 1, 0), blk(&jt, 1, 1));
    let (r11, r12, r21, r22) = (blk(&rt, 0, 0), blk(&rt, 0, 1), blk(&rt, 1, 0), blk(&rt, 1, 1));
    check_residual("R12 = J12", (&r12 - &j12).norm(), jt.norm().max(rt.norm()))?;
    let q11 = numerics::symmetrize(&blk(&q_blocks, 0, 0));
    let q22 = blk(&q_blocks, 1, 1);
    let bt = u.transpose() * sys.b();
    let b1 = bt.rows(0, n1).into_owned();
    let b2 = bt.rows(n1, n2).into_owned();

    let l21 = &j21 - &r21;
    let l22 = &j22 - &r22;
    for (name, mat) in [("J22 - R22", &l22), ("Q22", &q22)] {
        if mat.ncols() > 0 {
            let rc = numerics::rcond(mat);
            if rc < 1e-10 {
                return Err(DecompError::IllConditioned {
                    what: name.into(),
                    rcond: rc,
                });
            }
        }
    }

    let (b_hat, p_hat, s_hat, n_hat, z2_from_z1, z2_from_u) = if n2 > 0 {
        let l22_inv = numerics::invert(&l22)?;
        let l22_inv_t = l22_inv.transpose();
        let p_hat = -0.5 * l21.transpose() * &l22_inv_t * &b2;
        let b_hat = &b1 + &p_hat;
        let s_hat = -0.5 * b2.transpose() * (&l22_inv + &l22_inv_t) * &b2;
        let n_hat = -0.5 * b2.transpose() * (&l22_inv - &l22_inv_t) * &b2;
        let q22_inv = numerics::invert(&q22)?;
        let z2_z1 = -(&q22_inv) * &l22_inv * &l21 * &q11;
        let z2_u = -(&q22_inv) * &l22_inv * &b2;
        (b_hat, p_hat, s_hat, n_hat, z2_z1, z2_u)
    } else {
        (
            b1.clone(),
            DMatrix::zeros(n1, m),
            DMatrix::zeros(m, m),
            DMatrix::zeros(m, m),
            DMatrix::zeros(0, n1),
            DMatrix::zeros(0, m),
        )
    };

    let d_hat = &s_hat + &n_hat;
    let reduced = PhOdeSystem::validate_with_tol(
        j11.clone(),
        numerics::symmetrize(&r11),
        q11.clone(),
        b_hat.clone(),
        p_hat.clone(),
        d_hat,
        1e-9,
    )
    .map_err(DecompError::ReducedInvalid)?;

    Ok(BeattieReduction {
        u,
        v,
        u_inv,
        v_inv,
        n1,
        j11,
        j12,
        j21,
        j22,
        r11,
        r12,
        r21,
        r22,
        q11,
        q22,
        b1,
        b2,
        b_hat,
        p_hat,
        s_hat: numerics::symmetrize(&s_hat),
        n_hat,
        reduced,
        z2_from_z1,
        z2_from_u,
    })
}

impl BeattieReduction {
    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn n2(&self) -> usize {
        self.n() - self.n1
    }

    /// Reduced initial datum `z1(0) = (U^T w0)[0..n1]`; errors when `w0` is
    /// inconsistent (the trailing components of `U^T w0` must vanish).
    pub fn reduce_initial(&self, w0: &DVector<f64>) -> Result<DVector<f64>> {
        let full = self.u.transpose() * w0;
        let tail = full.rows(self.n1, self.n2()).norm();
        if tail > 1e-8 * (1.0 + w0.norm()) {
            return Err(DecompError::Precondition(
                "datum w is not in im E (U^T w has algebraic components)".into(),
            ));
        }
        Ok(full.rows(0, self.n1).into_owned())
    }

    /// Rows of a constraint on `w = Ex` expressed on `z1`: `G w = G U^{-T} (z1; 0)`.
    pub fn reduce_constraint_rows(&self, g: &DMatrix<f64>) -> DMatrix<f64> {
        (g * self.u_inv.transpose())
            .columns(0, self.n1)
            .into_owned()
    }

    /// Algebraic state `z2 = -Q22^{-1} L22^{-1} (L21 Q11 z1 + B2 u)`.
    pub fn recover_z2(&self, z1: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        if self.n2() == 0 {
            return DVector::zeros(0);
        }
        &self.z2_from_z1 * z1 + &self.z2_from_u * u
    }

    /// Full state `x = V (z1; z2)`.
    pub fn lift_state(&self, z1: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let z2 = self.recover_z2(z1, u);
        let mut z = DVector::zeros(self.n());
        z.rows_mut(0, self.n1).copy_from(z1);
        z.rows_mut(self.n1, self.n2()).copy_from(&z2);
        &self.v * z
    }
}

/// Lifts a reduced trajectory back to the descriptor state space, recovering
/// the algebraic components from `(z1, u)` at every grid point.
pub fn lift_solution(
    red: &BeattieReduction,
    sys: &PhDaeSystem,
    reduced_traj: &Trajectory,
) -> Result<Trajectory> {
    if reduced_traj.states.len() != reduced_traj.controls.len() {
        return Err(DecompError::Precondition(
            "reduced trajectory grids inconsistent".into(),
        ));
    }
    let states: Vec<DVector<f64>> = reduced_traj
        .states
        .iter()
        .zip(&reduced_traj.controls)
        .map(|(z1, u)| red.lift_state(z1, u))
        .collect();
    let outputs = states.iter().map(|x| sys.output(x)).collect();
    Ok(Trajectory {
        times: reduced_traj.times.clone(),
        states,
        controls: reduced_traj.controls.clone(),
        outputs,
    })
}

/// Conservative/dissipative splitting of a pH-ODE flow `A = (J - R) Q`:
/// `N1` carries the imaginary-axis spectrum, `N2` the Hurwitz part, and the
/// splitting is Q-orthogonal with `ker Q ⊆ N1 ⊆ ker(RQ)`.
#[derive(Debug, Clone)]
pub struct SpectralSplit {
    pub n1_basis: SubspaceBasis,
    pub n2_basis: SubspaceBasis,
    /// Representation of the flow on `N1` (Q-skew).
    pub j1: DMatrix<f64>,
    /// Q-skew part of the flow on `N2`.
    pub j2: DMatrix<f64>,
    /// Q-PSD dissipative part of the flow on `N2`.
    pub r2: DMatrix<f64>,
    /// Set when an eigenvalue sat within a decade of the axis tolerance; such
    /// modes are assigned to `N1`.
    pub boundary_flagged: bool,
}

pub fn spectral_split(
    j: &DMatrix<f64>,
    r: &DMatrix<f64>,
    q: &DMatrix<f64>,
) -> Result<SpectralSplit> {
    let n = j.nrows();
    let a = (j - r) * q;
    let sf = schur_form(&a)?;
    let eigs = sf.eigenvalues();
    let rho = eigs.iter().map(|e| e.norm()).fold(0.0f64, f64::max);
    let tol = SPECTRAL_TOL * rho.max(1e-300);
    let boundary_flagged = eigs
        .iter()
        .any(|e| e.re.abs() <= tol && e.re.abs() > 0.01 * tol);
    let split = invariant_split(&a, |e| e.re.abs() <= tol)?;
    let n1_basis = SubspaceBasis::new(n, split.basis_sel.clone())?;
    let n2_basis = SubspaceBasis::new(n, split.basis_comp.clone())?;

    let jq = j * q;
    let rq = r * q;
    let j1 = n1_basis.matrix().transpose() * &jq * n1_basis.matrix();
    // Oblique projection onto N2 along N1 for the representations on N2.
    let k2 = n2_basis.dim();
    let (j2, r2) = if k2 > 0 {
        let mut basis_full = DMatrix::zeros(n, n);
        basis_full
            .view_mut((0, 0), (n, split.k))
            .copy_from(n1_basis.matrix());
        basis_full
            .view_mut((0, split.k), (n, k2))
            .copy_from(n2_basis.matrix());
        let coords_j = numerics::solve_lu_mat(&basis_full, &(&jq * n2_basis.matrix()))?;
        let coords_r = numerics::solve_lu_mat(&basis_full, &(&rq * n2_basis.matrix()))?;
        (
            coords_j.rows(split.k, k2).into_owned(),
            coords_r.rows(split.k, k2).into_owned(),
        )
    } else {
        (DMatrix::zeros(0, 0), DMatrix::zeros(0, 0))
    };
    Ok(SpectralSplit {
        n1_basis,
        n2_basis,
        j1,
        j2,
        r2,
        boundary_flagged,
    })
}
