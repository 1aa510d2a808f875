//! Dissipative-Hamiltonian certification of matrices and pencils.
//!
//! A matrix is dissipative Hamiltonian when it admits a factorization
//! `A = (J - R) Q` with `J` skew, `R` and `Q` symmetric PSD. The test is
//! purely spectral; on success a witness triple is constructed from the
//! spectral pieces: a Lyapunov solve on the Hurwitz part, a rotation-pair
//! basis on the semi-simple imaginary part, and explicit 2x2 factors for the
//! nilpotent pairs at zero.

use nalgebra::{Complex, DMatrix, DVector};

use super::{is_regular, quasi_weierstrass, PencilError, Result};
use crate::numerics::{
    self, column_space, invariant_split, rank, schur_form, solve_lyapunov, sym_eigen,
    NumericsError, RANK_TOL, SPECTRAL_TOL,
};

/// Witness triple with `A = (J - R) Q`.
#[derive(Debug, Clone)]
pub struct DhWitness {
    pub j: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub q: DMatrix<f64>,
    /// `|(J-R)Q - A| / max(1, |A|)`.
    pub reconstruction_residual: f64,
}

/// Outcome of the dissipative-Hamiltonian matrix test.
#[derive(Debug, Clone)]
pub struct DhMatrixCertificate {
    pub is_dh: bool,
    /// Spectrum in the closed left half-plane.
    pub spectrum_ok: bool,
    /// Non-zero imaginary eigenvalues semi-simple.
    pub imaginary_semisimple: bool,
    /// `ker A^3 = ker A^2`.
    pub zero_chains_ok: bool,
    /// Name of the first violated condition, when not dissipative Hamiltonian.
    pub violated: Option<String>,
    pub witness: Option<DhWitness>,
}

/// Per-condition report for the pencil variant.
#[derive(Debug, Clone)]
pub struct DhPencilCertificate {
    pub is_dh: bool,
    /// Finite spectrum in the closed left half-plane.
    pub spectrum_ok: bool,
    /// Non-zero imaginary pencil eigenvalues semi-simple.
    pub imaginary_semisimple: bool,
    /// Pencil index at most two.
    pub index_at_most_two: bool,
    /// Index of the reversed pencil `sA - E` at most two
    /// (`ker C^3 = ker C^2` on the ODE part).
    pub reverse_index_at_most_two: bool,
    pub pencil_index: usize,
    pub witness_mu: f64,
}

/// Real 2n-by-2n embedding of `A - i alpha I` acting on stacked (Re, Im).
fn complex_shift_embedding(a: &DMatrix<f64>, alpha: f64) -> DMatrix<f64> {
    let n = a.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((n, n), (n, n)).copy_from(a);
    for i in 0..n {
        m[(i, n + i)] = alpha;
        m[(n + i, i)] = -alpha;
    }
    m
}

/// `ker((A - i alpha)^2) = ker(A - i alpha)` via ranks of the real embedding.
fn shift_semisimple(a: &DMatrix<f64>, alpha: f64) -> Result<bool> {
    let m = complex_shift_embedding(a, alpha);
    let m2 = &m * &m;
    Ok(rank(&m, RANK_TOL)? == rank(&m2, RANK_TOL)?)
}

fn zero_chains_ok(a: &DMatrix<f64>) -> Result<bool> {
    let a2 = a * a;
    let a3 = &a2 * a;
    Ok(rank(&a2, RANK_TOL)? == rank(&a3, RANK_TOL)?)
}

/// Distinct positive imaginary parts among near-axis eigenvalues.
fn imaginary_clusters(eigs: &[Complex<f64>], axis_tol: f64, cluster_tol: f64) -> Vec<f64> {
    let mut betas: Vec<f64> = eigs
        .iter()
        .filter(|e| e.re.abs() <= axis_tol && e.im > cluster_tol)
        .map(|e| e.im)
        .collect();
    betas.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut out: Vec<f64> = Vec::new();
    for b in betas {
        match out.last() {
            Some(&last) if (b - last).abs() <= cluster_tol.max(1e-12 * b) => {}
            _ => out.push(b),
        }
    }
    out
}

/// Dissipative-Hamiltonian test with constructive witness.
pub fn is_dh_matrix(a: &DMatrix<f64>) -> Result<DhMatrixCertificate> {
    numerics::ensure_finite(a)?;
    let n = a.nrows();
    if a.ncols() != n {
        return Err(NumericsError::DimensionMismatch(
            "is_dh_matrix requires a square matrix".into(),
        )
        .into());
    }
    if n == 0 {
        return Ok(DhMatrixCertificate {
            is_dh: true,
            spectrum_ok: true,
            imaginary_semisimple: true,
            zero_chains_ok: true,
            violated: None,
            witness: Some(DhWitness {
                j: DMatrix::zeros(0, 0),
                r: DMatrix::zeros(0, 0),
                q: DMatrix::zeros(0, 0),
                reconstruction_residual: 0.0,
            }),
        });
    }

    let sf = schur_form(a)?;
    let eigs = sf.eigenvalues();
    let rho = eigs.iter().map(|e| e.norm()).fold(0.0f64, f64::max);
    let axis_tol = SPECTRAL_TOL * rho.max(1e-300);
    // Defective eigenvalues move by O(sqrt(eps) * |A|); cluster with a
    // norm-based floor so perturbed nilpotent blocks stay at zero.
    let cluster_tol = (1e-7 * a.norm()).max(axis_tol);

    let spectrum_ok = eigs.iter().all(|e| e.re <= axis_tol);
    let mut imaginary_semisimple = true;
    if spectrum_ok {
        for beta in imaginary_clusters(&eigs, cluster_tol, cluster_tol) {
            if !shift_semisimple(a, beta)? {
                imaginary_semisimple = false;
                break;
            }
        }
    }
    let chains = zero_chains_ok(a)?;

    let violated = if !spectrum_ok {
        Some("eigenvalue with positive real part".to_string())
    } else if !imaginary_semisimple {
        Some("non-semi-simple imaginary eigenvalue".to_string())
    } else if !chains {
        Some("ker A^3 != ker A^2".to_string())
    } else {
        None
    };
    if violated.is_some() {
        return Ok(DhMatrixCertificate {
            is_dh: false,
            spectrum_ok,
            imaginary_semisimple,
            zero_chains_ok: chains,
            violated,
            witness: None,
        });
    }

    let witness = build_witness(a, cluster_tol)?;
    Ok(DhMatrixCertificate {
        is_dh: true,
        spectrum_ok,
        imaginary_semisimple,
        zero_chains_ok: chains,
        violated: None,
        witness: Some(witness),
    })
}

/// Pushes a block witness through a similarity: if `A0 = (J - R) Q` then
/// `V A0 V^{-1} = (VJV^T - VRV^T)(V^{-T} Q V^{-1})`.
fn push_witness(
    v: &DMatrix<f64>,
    v_inv: &DMatrix<f64>,
    j: &DMatrix<f64>,
    r: &DMatrix<f64>,
    q: &DMatrix<f64>,
) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let jj = v * j * v.transpose();
    let rr = v * r * v.transpose();
    let qq = v_inv.transpose() * q * v_inv;
    (
        (&jj - jj.transpose()) * 0.5,
        numerics::symmetrize(&rr),
        numerics::symmetrize(&qq),
    )
}

fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (na, nb) = (a.nrows(), b.nrows());
    let mut m = DMatrix::zeros(na + nb, na + nb);
    m.view_mut((0, 0), (na, na)).copy_from(a);
    m.view_mut((na, na), (nb, nb)).copy_from(b);
    m
}

fn build_witness(a: &DMatrix<f64>, cluster_tol: f64) -> Result<DhWitness> {
    let n = a.nrows();
    // Outer split: center (near-axis) vs strictly stable.
    let outer = invariant_split(a, |e| e.re >= -cluster_tol)?;
    let k_c = outer.k;

    // Hurwitz part: Lyapunov solve As P + P As^T = -I, then
    // J = (As P - P As^T)/2, R = I/2, Q = P^{-1}.
    let (j_s, r_s, q_s) = if n > k_c {
        let a_s = &outer.a_comp;
        let p = solve_lyapunov(a_s, &(-DMatrix::<f64>::identity(n - k_c, n - k_c)))?;
        let p = numerics::symmetrize(&p);
        let (vals, vecs) = sym_eigen(&p)?;
        if vals[0] <= 0.0 {
            return Err(PencilError::Numerics(NumericsError::Failed(
                "Lyapunov solution not positive definite".into(),
            )));
        }
        let inv_diag = DMatrix::from_diagonal(&vals.map(|v| 1.0 / v));
        let q = &vecs * inv_diag * vecs.transpose();
        let j = (a_s * &p - &p * a_s.transpose()) * 0.5;
        (j, DMatrix::identity(n - k_c, n - k_c) * 0.5, numerics::symmetrize(&q))
    } else {
        (
            DMatrix::zeros(0, 0),
            DMatrix::zeros(0, 0),
            DMatrix::zeros(0, 0),
        )
    };

    // Center part: split once more into the zero cluster and the rotations.
    let (j_c, r_c, q_c) = if k_c > 0 {
        let a_c = &outer.a_sel;
        let inner = invariant_split(a_c, |e| e.norm() <= cluster_tol)?;
        let k_z = inner.k;
        let (j_z, r_z, q_z) = if k_z > 0 {
            nilpotent_witness(&inner.a_sel, cluster_tol)?
        } else {
            (
                DMatrix::zeros(0, 0),
                DMatrix::zeros(0, 0),
                DMatrix::zeros(0, 0),
            )
        };
        let (j_r, r_r, q_r) = if k_c > k_z {
            rotation_witness(&inner.a_comp, cluster_tol)?
        } else {
            (
                DMatrix::zeros(0, 0),
                DMatrix::zeros(0, 0),
                DMatrix::zeros(0, 0),
            )
        };
        push_witness(
            &inner.v,
            &inner.v_inv,
            &block_diag(&j_z, &j_r),
            &block_diag(&r_z, &r_r),
            &block_diag(&q_z, &q_r),
        )
    } else {
        (
            DMatrix::zeros(0, 0),
            DMatrix::zeros(0, 0),
            DMatrix::zeros(0, 0),
        )
    };

    let (j, r, q) = push_witness(
        &outer.v,
        &outer.v_inv,
        &block_diag(&j_c, &j_s),
        &block_diag(&r_c, &r_s),
        &block_diag(&q_c, &q_s),
    );
    let resid = ((&j - &r) * &q - a).norm() / a.norm().max(1.0);
    if resid > 1e-7 {
        return Err(PencilError::Numerics(NumericsError::Failed(format!(
            "dh witness reconstruction residual {resid:.3e}"
        ))));
    }
    Ok(DhWitness {
        j,
        r,
        q,
        reconstruction_residual: resid,
    })
}

/// Witness for a block with `A0^2 ~ 0`: canonical basis of 2-chains
/// `(A0 w, w)` plus kernel directions, with the explicit factors
/// `[[0,1],[0,0]] = ([[0,1],[-1,0]] - 0) [[0,0],[0,1]]` per pair.
fn nilpotent_witness(
    a0: &DMatrix<f64>,
    tol: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
    let p = a0.nrows();
    // Absolute threshold: tol is already sized to the full matrix norm.
    let thr = tol.max(1e-12 * a0.norm().max(1.0));
    let svd = a0.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd with u");
    let v_t = svd.v_t.as_ref().expect("svd with v");
    let sv = &svd.singular_values;
    let r = sv.iter().filter(|&&s| s > thr).count();
    if 2 * r > p {
        return Err(PencilError::Numerics(NumericsError::Failed(
            "zero block is not 2-nilpotent".into(),
        )));
    }
    // Basis Y = [u_1, v_1/s_1, ..., u_r, v_r/s_r, kernel complement].
    let mut y = DMatrix::zeros(p, p);
    for i in 0..r {
        y.set_column(2 * i, &u.column(i));
        y.set_column(2 * i + 1, &(v_t.row(i).transpose() / sv[i]));
    }
    if p > 2 * r {
        // Kernel directions not already covered by im A0.
        let ker = numerics::nullspace_abs(a0, thr)?;
        let u_r = u.columns(0, r).into_owned();
        let proj = &ker.matrix().clone() - &u_r * (u_r.transpose() * ker.matrix());
        let compl = column_space(&proj, 1e-8)?;
        if compl.dim() != p - 2 * r {
            return Err(PencilError::Numerics(NumericsError::Failed(
                "nilpotent chain basis incomplete".into(),
            )));
        }
        y.view_mut((0, 2 * r), (p, p - 2 * r))
            .copy_from(compl.matrix());
    }
    let y_inv = numerics::invert(&y)?;
    let mut j_hat = DMatrix::zeros(p, p);
    let mut q_hat = DMatrix::zeros(p, p);
    for i in 0..r {
        j_hat[(2 * i, 2 * i + 1)] = 1.0;
        j_hat[(2 * i + 1, 2 * i)] = -1.0;
        q_hat[(2 * i + 1, 2 * i + 1)] = 1.0;
    }
    for i in 2 * r..p {
        q_hat[(i, i)] = 1.0;
    }
    Ok(push_witness(&y, &y_inv, &j_hat, &DMatrix::zeros(p, p), &q_hat))
}

/// Witness for a semi-simple block with non-zero imaginary spectrum: builds a
/// real rotation-pair basis `V`, sets `J = V Lambda V^T`, `R = 0`,
/// `Q = (V V^T)^{-1}`.
fn rotation_witness(
    a_rot: &DMatrix<f64>,
    cluster_tol: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
    let p = a_rot.nrows();
    let sf = schur_form(a_rot)?;
    let eigs = sf.eigenvalues();
    let betas = imaginary_clusters(&eigs, f64::INFINITY, cluster_tol);
    let mut v = DMatrix::zeros(p, p);
    let mut lambda = DMatrix::zeros(p, p);
    let mut filled = 0usize;
    for beta in betas {
        // Real invariant subspace of the pair +-(i beta). The shifted matrix
        // vanishes on it, so the kernel threshold must be absolute.
        let shifted = a_rot * a_rot + DMatrix::identity(p, p) * (beta * beta);
        let scale = (a_rot.norm() + beta).powi(2).max(1.0);
        let m_beta = numerics::nullspace_abs(&shifted, 1e-7 * scale)?;
        let g2 = m_beta.dim();
        if g2 == 0 || g2 % 2 != 0 {
            return Err(PencilError::Numerics(NumericsError::Failed(
                "imaginary eigenspace has odd real dimension".into(),
            )));
        }
        let yb = m_beta.matrix().clone();
        let c = yb.transpose() * a_rot * &yb;
        // Greedy rotation pairs (a, b = -C a / beta) inside the cluster space.
        let mut z = DMatrix::<f64>::zeros(g2, g2);
        let mut cols = 0usize;
        let mut cand = 0usize;
        while cols < g2 {
            if cand >= g2 {
                return Err(PencilError::Numerics(NumericsError::Failed(
                    "rotation pair construction stalled".into(),
                )));
            }
            let mut av = DVector::zeros(g2);
            av[cand] = 1.0;
            cand += 1;
            // Orthogonalize against the pairs chosen so far.
            for cidx in 0..cols {
                let zc = z.column(cidx).into_owned();
                let d = zc.dot(&av) / zc.norm_squared();
                av -= zc * d;
            }
            if av.norm() < 0.3 {
                continue;
            }
            let av = av.normalize();
            let bv = -(&c * &av) / beta;
            z.set_column(cols, &av);
            z.set_column(cols + 1, &bv);
            cols += 2;
        }
        let vb = &yb * &z;
        v.view_mut((0, filled), (p, g2)).copy_from(&vb);
        for i in 0..g2 / 2 {
            lambda[(filled + 2 * i, filled + 2 * i + 1)] = beta;
            lambda[(filled + 2 * i + 1, filled + 2 * i)] = -beta;
        }
        filled += g2;
    }
    if filled != p {
        return Err(PencilError::Numerics(NumericsError::Failed(
            "imaginary eigenspaces do not fill the rotation block".into(),
        )));
    }
    let v_inv = numerics::invert(&v)?;
    let j = &v * &lambda * v.transpose();
    let q = v_inv.transpose() * &v_inv;
    Ok((
        (&j - j.transpose()) * 0.5,
        DMatrix::zeros(p, p),
        numerics::symmetrize(&q),
    ))
}

/// Dissipative-Hamiltonian test for a regular pencil `sE - A`:
/// (i) finite spectrum in the closed left half-plane, (ii) non-zero imaginary
/// eigenvalues semi-simple, (iii) pencil index at most two, (iv) reversed
/// pencil index at most two.
pub fn is_dh_pencil(e: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<DhPencilCertificate> {
    let reg = is_regular(e, a)?;
    let mu = reg.witness_mu.ok_or(PencilError::Irregular)?;
    let qw = quasi_weierstrass(e, a)?;
    let index_at_most_two = qw.index <= 2;

    let c = &qw.c;
    let (spectrum_ok, imaginary_semisimple, reverse_ok) = if qw.n1() > 0 {
        let sf = schur_form(c)?;
        let eigs = sf.eigenvalues();
        let rho = eigs.iter().map(|x| x.norm()).fold(0.0f64, f64::max);
        let axis_tol = SPECTRAL_TOL * rho.max(1e-300);
        let cluster_tol = (1e-7 * c.norm()).max(axis_tol);
        let spec_ok = eigs.iter().all(|x| x.re <= axis_tol);
        let mut semi = true;
        for beta in imaginary_clusters(&eigs, cluster_tol, cluster_tol) {
            if !shift_semisimple(c, beta)? {
                semi = false;
                break;
            }
        }
        (spec_ok, semi, zero_chains_ok(c)?)
    } else {
        (true, true, true)
    };

    Ok(DhPencilCertificate {
        is_dh: spectrum_ok && imaginary_semisimple && index_at_most_two && reverse_ok,
        spectrum_ok,
        imaginary_semisimple,
        index_at_most_two,
        reverse_index_at_most_two: reverse_ok,
        pencil_index: qw.index,
        witness_mu: mu,
    })
}
