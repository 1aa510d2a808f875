//! Real Schur form with standardized diagonal blocks, eigenvalue-selective
//! reordering, invariant-subspace splitting, and symmetric eigensolves.

use nalgebra::{Complex, DMatrix, DVector};

use super::{ensure_finite, solve_sylvester, NumericsError, Result, RANK_TOL};

/// Real Schur decomposition `m = z t z^T` with `t` quasi-upper-triangular.
/// Diagonal blocks are standardized: 2x2 blocks carry a genuine complex
/// conjugate pair, real pairs are split into 1x1 blocks.
#[derive(Debug, Clone)]
pub struct SchurForm {
    pub z: DMatrix<f64>,
    pub t: DMatrix<f64>,
    /// (start, size) per diagonal block, size 1 or 2.
    pub blocks: Vec<(usize, usize)>,
}

impl SchurForm {
    /// Eigenvalues in diagonal order, one per matrix position.
    pub fn eigenvalues(&self) -> Vec<Complex<f64>> {
        let mut eigs = Vec::with_capacity(self.t.nrows());
        for &(s, sz) in &self.blocks {
            if sz == 1 {
                eigs.push(Complex::new(self.t[(s, s)], 0.0));
            } else {
                let (re, im) = block_pair(&self.t, s);
                eigs.push(Complex::new(re, im));
                eigs.push(Complex::new(re, -im));
            }
        }
        eigs
    }

    /// One representative eigenvalue per block (positive imaginary part for
    /// complex pairs).
    pub fn block_eigenvalues(&self) -> Vec<Complex<f64>> {
        self.blocks
            .iter()
            .map(|&(s, sz)| {
                if sz == 1 {
                    Complex::new(self.t[(s, s)], 0.0)
                } else {
                    let (re, im) = block_pair(&self.t, s);
                    Complex::new(re, im)
                }
            })
            .collect()
    }
}

/// Real/imaginary part of the conjugate pair carried by the 2x2 block at `s`.
fn block_pair(t: &DMatrix<f64>, s: usize) -> (f64, f64) {
    let (a, b, c, d) = (t[(s, s)], t[(s, s + 1)], t[(s + 1, s)], t[(s + 1, s + 1)]);
    let re = 0.5 * (a + d);
    let disc = (a - d) * (a - d) + 4.0 * b * c;
    let im = if disc < 0.0 { 0.5 * (-disc).sqrt() } else { 0.0 };
    (re, im)
}

/// Computes the standardized real Schur form.
pub fn schur_form(m: &DMatrix<f64>) -> Result<SchurForm> {
    ensure_finite(m)?;
    let n = m.nrows();
    if m.ncols() != n {
        return Err(NumericsError::DimensionMismatch(
            "Schur form requires a square matrix".into(),
        ));
    }
    if n == 0 {
        return Ok(SchurForm {
            z: DMatrix::identity(0, 0),
            t: DMatrix::identity(0, 0),
            blocks: vec![],
        });
    }
    let budget = 40 * n.max(10);
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, budget)
        .ok_or(NumericsError::SchurNoConvergence)?;
    let (z, t) = schur.unpack();
    let mut sf = SchurForm { z, t, blocks: vec![] };
    restandardize(&mut sf, m.norm());
    Ok(sf)
}

/// Re-detects diagonal blocks, zeroes negligible subdiagonals and splits 2x2
/// blocks with real eigenvalues.
fn restandardize(sf: &mut SchurForm, scale: f64) {
    let n = sf.t.nrows();
    let thr = 1e-12 * (scale + 1.0);
    // Clear everything below the first subdiagonal (rounding from updates).
    for j in 0..n {
        for i in j + 2..n {
            sf.t[(i, j)] = 0.0;
        }
    }
    sf.blocks.clear();
    let mut i = 0;
    while i < n {
        if i + 1 < n && sf.t[(i + 1, i)].abs() > thr {
            let (a, b, c, d) = (
                sf.t[(i, i)],
                sf.t[(i, i + 1)],
                sf.t[(i + 1, i)],
                sf.t[(i + 1, i + 1)],
            );
            let disc = (a - d) * (a - d) + 4.0 * b * c;
            let s = a.abs() + b.abs() + c.abs() + d.abs();
            if disc > (1e-10 * s).powi(2) {
                split_real_block(sf, i);
                sf.blocks.push((i, 1));
                sf.blocks.push((i + 1, 1));
            } else {
                sf.blocks.push((i, 2));
            }
            i += 2;
        } else {
            if i + 1 < n {
                sf.t[(i + 1, i)] = 0.0;
            }
            sf.blocks.push((i, 1));
            i += 1;
        }
    }
}

/// Rotates a 2x2 diagonal block with real eigenvalues into triangular form.
fn split_real_block(sf: &mut SchurForm, i: usize) {
    let (a, b, c, d) = (
        sf.t[(i, i)],
        sf.t[(i, i + 1)],
        sf.t[(i + 1, i)],
        sf.t[(i + 1, i + 1)],
    );
    let disc = ((a - d) * (a - d) + 4.0 * b * c).max(0.0);
    let mid = 0.5 * (a + d);
    let half = 0.5 * disc.sqrt();
    // Take the eigenvalue further from the mean for a better-conditioned
    // eigenvector.
    let lambda = if mid >= 0.0 { mid + half } else { mid - half };
    let v1 = DVector::from_row_slice(&[b, lambda - a]);
    let v2 = DVector::from_row_slice(&[lambda - d, c]);
    let v = if v1.norm() >= v2.norm() { v1 } else { v2 };
    let nv = v.norm();
    let (cs, sn) = if nv > 0.0 {
        (v[0] / nv, v[1] / nv)
    } else {
        (1.0, 0.0)
    };
    let g = DMatrix::from_row_slice(2, 2, &[cs, -sn, sn, cs]);
    let n = sf.t.nrows();
    // T <- G^T T G on the two affected rows/columns, Z <- Z G.
    let rows = sf.t.view((i, 0), (2, n)).into_owned();
    sf.t.view_mut((i, 0), (2, n)).copy_from(&(g.transpose() * rows));
    let cols = sf.t.view((0, i), (n, 2)).into_owned();
    sf.t.view_mut((0, i), (n, 2)).copy_from(&(cols * &g));
    let zc = sf.z.view((0, i), (n, 2)).into_owned();
    sf.z.view_mut((0, i), (n, 2)).copy_from(&(zc * &g));
    sf.t[(i + 1, i)] = 0.0;
}

/// Real Schur decomposition returning `(z, t, eigenvalues)` with the
/// eigenvalue list sorted by real part (then imaginary part).
pub fn real_schur(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>, Vec<Complex<f64>>)> {
    let sf = schur_form(m)?;
    let mut eigs = sf.eigenvalues();
    eigs.sort_by(|x, y| {
        x.re.partial_cmp(&y.re)
            .unwrap()
            .then(x.im.partial_cmp(&y.im).unwrap())
    });
    Ok((sf.z, sf.t, eigs))
}

/// Swaps the adjacent diagonal blocks at list positions `k` and `k+1`.
fn swap_adjacent(sf: &mut SchurForm, k: usize, scale: f64) -> Result<()> {
    let (s1, p) = sf.blocks[k];
    let (_s2, q) = sf.blocks[k + 1];
    let a11 = sf.t.view((s1, s1), (p, p)).into_owned();
    let a12 = sf.t.view((s1, s1 + p), (p, q)).into_owned();
    let a22 = sf.t.view((s1 + p, s1 + p), (q, q)).into_owned();
    // A11 X - X A22 = A12 puts span[X; -I] in the A22-invariant subspace.
    let x = solve_sylvester(&a11, &(-&a22), &a12)?;
    let mut w = DMatrix::zeros(p + q, q);
    w.view_mut((0, 0), (p, q)).copy_from(&x);
    w.view_mut((p, 0), (q, q))
        .copy_from(&(-DMatrix::<f64>::identity(q, q)));
    let g = complete_orthonormal(&w);

    let n = sf.t.nrows();
    let rows = sf.t.view((s1, 0), (p + q, n)).into_owned();
    sf.t.view_mut((s1, 0), (p + q, n))
        .copy_from(&(g.transpose() * rows));
    let cols = sf.t.view((0, s1), (n, p + q)).into_owned();
    sf.t.view_mut((0, s1), (n, p + q)).copy_from(&(cols * &g));
    let zc = sf.z.view((0, s1), (n, p + q)).into_owned();
    sf.z.view_mut((0, s1), (n, p + q)).copy_from(&(zc * &g));
    // The swapped corner is zero in exact arithmetic.
    for i in q..p + q {
        for j in 0..q {
            sf.t[(s1 + i, s1 + j)] = 0.0;
        }
    }
    restandardize(sf, scale);
    Ok(())
}

/// Reorders the Schur form so that blocks whose representative eigenvalue
/// satisfies `select` come first. Returns the dimension of the leading
/// invariant subspace.
pub fn reorder_schur<F: Fn(Complex<f64>) -> bool>(sf: &mut SchurForm, select: F) -> Result<usize> {
    let scale = sf.t.norm();
    let max_swaps = 4 * sf.t.nrows() * sf.t.nrows() + 16;
    let mut swaps = 0;
    loop {
        let eigs = sf.block_eigenvalues();
        let flags: Vec<bool> = eigs.into_iter().map(&select).collect();
        // First inversion: unselected block immediately before a selected one.
        let inv = (0..flags.len().saturating_sub(1)).find(|&i| !flags[i] && flags[i + 1]);
        match inv {
            None => {
                let k: usize = sf
                    .blocks
                    .iter()
                    .zip(flags.iter())
                    .filter(|(_, &f)| f)
                    .map(|(&(_, sz), _)| sz)
                    .sum();
                return Ok(k);
            }
            Some(i) => {
                swaps += 1;
                if swaps > max_swaps {
                    return Err(NumericsError::Failed(
                        "Schur reordering did not stabilize (eigenvalues at the selection boundary)"
                            .into(),
                    ));
                }
                swap_adjacent(sf, i, scale)?;
            }
        }
    }
}

/// Extends the (assumed full-column-rank) columns of `w` to a full
/// orthonormal basis; the leading columns span `col(w)`.
fn complete_orthonormal(w: &DMatrix<f64>) -> DMatrix<f64> {
    let n = w.nrows();
    let k = w.ncols();
    let mut q = DMatrix::zeros(n, n);
    let mut cnt = 0;
    let push = |q: &mut DMatrix<f64>, cnt: &mut usize, v0: DVector<f64>| {
        let mut v = v0;
        for _ in 0..2 {
            for c in 0..*cnt {
                let d = q.column(c).dot(&v);
                let qc = q.column(c).into_owned();
                v -= qc * d;
            }
        }
        let nv = v.norm();
        if nv > 1e-13 {
            q.set_column(*cnt, &(v / nv));
            *cnt += 1;
            true
        } else {
            false
        }
    };
    for j in 0..k {
        let ok = push(&mut q, &mut cnt, w.column(j).into_owned());
        debug_assert!(ok, "complete_orthonormal: dependent leading columns");
    }
    while cnt < n {
        // Coordinate direction with the largest residual against the current
        // basis keeps the completion well conditioned.
        let mut best = (0usize, -1.0f64);
        for i in 0..n {
            let mut r: f64 = 1.0;
            for c in 0..cnt {
                let qi = q[(i, c)];
                r -= qi * qi;
            }
            if r > best.1 {
                best = (i, r);
            }
        }
        let mut e = DVector::zeros(n);
        e[best.0] = 1.0;
        push(&mut q, &mut cnt, e);
    }
    q
}

/// Invariant splitting of a square matrix along an eigenvalue selection.
#[derive(Debug, Clone)]
pub struct InvariantSplit {
    /// Dimension of the selected invariant subspace.
    pub k: usize,
    /// Similarity with `v^-1 m v = blockdiag(a_sel, a_comp)`.
    pub v: DMatrix<f64>,
    pub v_inv: DMatrix<f64>,
    /// Representation of `m` on the selected subspace (in `v` coordinates).
    pub a_sel: DMatrix<f64>,
    pub a_comp: DMatrix<f64>,
    /// Orthonormal basis of the selected invariant subspace.
    pub basis_sel: DMatrix<f64>,
    /// Orthonormal basis of the complementary invariant subspace.
    pub basis_comp: DMatrix<f64>,
}

/// Splits `R^n` into the invariant subspace of eigenvalues satisfying
/// `select` and its complementary invariant subspace.
pub fn invariant_split<F: Fn(Complex<f64>) -> bool>(
    m: &DMatrix<f64>,
    select: F,
) -> Result<InvariantSplit> {
    let n = m.nrows();
    let mut sf = schur_form(m)?;
    let k = reorder_schur(&mut sf, select)?;
    let t11 = sf.t.view((0, 0), (k, k)).into_owned();
    let t12 = sf.t.view((0, k), (k, n - k)).into_owned();
    let t22 = sf.t.view((k, k), (n - k, n - k)).into_owned();
    // T11 X - X T22 = -T12 decouples the trailing block.
    let x = solve_sylvester(&t11, &(-&t22), &(-&t12))?;
    let mut y = DMatrix::identity(n, n);
    y.view_mut((0, k), (k, n - k)).copy_from(&x);
    let mut y_inv = DMatrix::identity(n, n);
    y_inv.view_mut((0, k), (k, n - k)).copy_from(&(-&x));
    let v = &sf.z * &y;
    let v_inv = y_inv * sf.z.transpose();

    let basis_sel = sf.z.columns(0, k).into_owned();
    let basis_comp = if n > k {
        super::column_space(&v.columns(k, n - k).into_owned(), RANK_TOL)?
            .matrix()
            .clone()
    } else {
        DMatrix::zeros(n, 0)
    };
    Ok(InvariantSplit {
        k,
        v,
        v_inv,
        a_sel: t11,
        a_comp: t22,
        basis_sel,
        basis_comp,
    })
}

/// Eigenvalues of a symmetric matrix, ascending, with matching eigenvectors
/// in the columns of the returned matrix.
pub fn sym_eigen(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    ensure_finite(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok((DVector::zeros(0), DMatrix::identity(0, 0)));
    }
    let sym = super::symmetrize(m);
    let se = nalgebra::linalg::SymmetricEigen::try_new(sym, f64::EPSILON, 50 * n.max(10))
        .ok_or(NumericsError::SchurNoConvergence)?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let mut vals = DVector::zeros(n);
    let mut vecs = DMatrix::zeros(n, n);
    for (dst, &src) in idx.iter().enumerate() {
        vals[dst] = se.eigenvalues[src];
        vecs.set_column(dst, &se.eigenvectors.column(src));
    }
    Ok((vals, vecs))
}

/// Symmetric PSD square root. Eigenvalues slightly below zero (within
/// tolerance) are clamped; anything further negative is an error, as is a
/// symmetry defect.
pub fn psd_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sym_resid = (m - m.transpose()).norm();
    if sym_resid > 1e-10 * m.norm().max(1.0) {
        return Err(NumericsError::NotSymmetric { residual: sym_resid });
    }
    let (vals, vecs) = sym_eigen(m)?;
    let scale = vals.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1.0);
    let mut d = DVector::zeros(vals.len());
    for i in 0..vals.len() {
        if vals[i] < -1e-10 * scale {
            return Err(NumericsError::NotPsd { value: vals[i] });
        }
        d[i] = vals[i].max(0.0).sqrt();
    }
    let root = &vecs * DMatrix::from_diagonal(&d) * vecs.transpose();
    Ok(super::symmetrize(&root))
}

/// Smallest eigenvalue above the rank tolerance of a symmetric PSD matrix.
pub fn min_positive_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    let sym_resid = (m - m.transpose()).norm();
    if sym_resid > 1e-10 * m.norm().max(1.0) {
        return Err(NumericsError::NotSymmetric { residual: sym_resid });
    }
    let (vals, _) = sym_eigen(m)?;
    let lmax = vals.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    if lmax == 0.0 {
        return Err(NumericsError::ZeroMatrix);
    }
    let thr = RANK_TOL * lmax;
    vals.iter()
        .cloned()
        .filter(|&v| v > thr)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))))
        .ok_or(NumericsError::ZeroMatrix)
}

/// Spectral radius and largest real part over a set of eigenvalues.
pub fn eig_stats(eigs: &[Complex<f64>]) -> (f64, f64) {
    let rho = eigs.iter().map(|e| e.norm()).fold(0.0f64, f64::max);
    let max_re = eigs.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
    (rho, if eigs.is_empty() { 0.0 } else { max_re })
}
