//! Sparse convex quadratic programming:
//!
//! ```text
//! minimize    0.5 z' H z + c' z + k
//! subject to  A z  = b        (hard rows)
//!             R z  = r        (coupling rows)
//!             C z <= d
//!             lo <= z <= hi
//! ```
//!
//! with `H` symmetric PSD. Hard equality rows are those that stay consistent
//! under any pinning of bounded variables (initial conditions and dynamics
//! defects have this property); coupling rows (terminal conditions) may
//! conflict with an intermediate active set and are therefore enforced by an
//! augmented-Lagrangian outer loop. The inner subproblems factor the
//! regularized equality KKT once per problem by a banded LU under a reverse
//! Cuthill-McKee ordering; active bounds and inequality rows enter through
//! bordered solves with cached columns, driven by a primal-dual active-set
//! update, and iterative refinement polishes every solve against the
//! unregularized operator.

use std::collections::{HashMap, HashSet};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::numerics::{rcm_ordering, BandedLu, NumericsError};

/// Sparse row as (column, coefficient) pairs.
pub type SparseRow = Vec<(usize, f64)>;

#[derive(Debug, Clone, Default)]
pub struct QpProblem {
    pub nvar: usize,
    /// Symmetric Hessian triplets (all nonzeros, both halves).
    pub hess: Vec<(usize, usize, f64)>,
    pub grad: DVector<f64>,
    pub constant: f64,
    /// Equality rows that remain consistent under bound pinning.
    pub eq_rows: Vec<SparseRow>,
    pub eq_rhs: Vec<f64>,
    /// Coupling equality rows (augmented-Lagrangian handled).
    pub soft_eq_rows: Vec<SparseRow>,
    pub soft_eq_rhs: Vec<f64>,
    /// Inequalities `row . z <= rhs`.
    pub ineq_rows: Vec<SparseRow>,
    pub ineq_rhs: Vec<f64>,
    /// Variable bounds; use infinities for unbounded.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl QpProblem {
    pub fn unconstrained(nvar: usize) -> Self {
        Self {
            nvar,
            grad: DVector::zeros(nvar),
            lower: vec![f64::NEG_INFINITY; nvar],
            upper: vec![f64::INFINITY; nvar],
            ..Default::default()
        }
    }

    pub fn objective(&self, z: &DVector<f64>) -> f64 {
        let mut hz = DVector::zeros(self.nvar);
        hess_mul(&self.hess, z, &mut hz);
        0.5 * z.dot(&hz) + self.grad.dot(z) + self.constant
    }
}

fn hess_mul(hess: &[(usize, usize, f64)], z: &DVector<f64>, out: &mut DVector<f64>) {
    out.fill(0.0);
    for &(i, j, v) in hess {
        out[i] += v * z[j];
    }
}

fn row_dot(row: &SparseRow, z: &DVector<f64>) -> f64 {
    row.iter().map(|&(j, c)| c * z[j]).sum()
}

#[derive(Debug, Clone)]
pub struct KktResiduals {
    pub stationarity: f64,
    pub primal: f64,
    pub dual: f64,
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity
            .max(self.primal)
            .max(self.dual)
            .max(self.complementarity)
    }
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub z: DVector<f64>,
    pub eq_multipliers: DVector<f64>,
    /// Multipliers of the coupling rows.
    pub soft_eq_multipliers: DVector<f64>,
    pub ineq_multipliers: Vec<f64>,
    pub lower_multipliers: Vec<f64>,
    pub upper_multipliers: Vec<f64>,
    pub objective: f64,
    pub residuals: KktResiduals,
    pub iterations: usize,
    pub sweeps: usize,
}

#[derive(Debug, Error)]
pub enum QpError {
    #[error("KKT system is singular beyond regularization")]
    Singular,
    #[error("active-set iteration budget exhausted")]
    IterationBudget,
    #[error("KKT residual stalled at {0:.3e}")]
    Stalled(f64),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Active {
    Lower(usize),
    Upper(usize),
    Row(usize),
}

/// The active constraint as a `<=` row and its right-hand side.
fn active_row(qp: &QpProblem, a: Active) -> (SparseRow, f64) {
    match a {
        Active::Lower(v) => (vec![(v, -1.0)], -qp.lower[v]),
        Active::Upper(v) => (vec![(v, 1.0)], qp.upper[v]),
        Active::Row(r) => (qp.ineq_rows[r].clone(), qp.ineq_rhs[r]),
    }
}

struct KktBase {
    n_kkt: usize,
    /// position of original index i in the permuted system
    pos: Vec<usize>,
    factor: BandedLu,
}

impl KktBase {
    fn build(
        nvar: usize,
        hess: &[(usize, usize, f64)],
        eq_rows: &[SparseRow],
        delta: f64,
    ) -> Result<Self, QpError> {
        let neq = eq_rows.len();
        let n_kkt = nvar + neq;
        let mut pattern: Vec<(usize, usize)> = Vec::new();
        let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
        for &(i, j, v) in hess {
            triplets.push((i, j, v));
            pattern.push((i, j));
        }
        for i in 0..nvar {
            triplets.push((i, i, delta));
        }
        for (r, row) in eq_rows.iter().enumerate() {
            for &(j, v) in row {
                triplets.push((nvar + r, j, v));
                triplets.push((j, nvar + r, v));
                pattern.push((nvar + r, j));
            }
            triplets.push((nvar + r, nvar + r, -delta));
        }
        let perm = rcm_ordering(n_kkt, &pattern);
        let mut pos = vec![0usize; n_kkt];
        for (p, &old) in perm.iter().enumerate() {
            pos[old] = p;
        }
        let permuted: Vec<(usize, usize, f64)> = triplets
            .iter()
            .map(|&(i, j, v)| (pos[i], pos[j], v))
            .collect();
        let factor = BandedLu::factor(n_kkt, &permuted).map_err(|_| QpError::Singular)?;
        Ok(Self { n_kkt, pos, factor })
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut permuted = vec![0.0; self.n_kkt];
        for (i, &v) in rhs.iter().enumerate() {
            permuted[self.pos[i]] = v;
        }
        let sol = self.factor.solve(&permuted);
        let mut out = vec![0.0; self.n_kkt];
        for i in 0..self.n_kkt {
            out[i] = sol[self.pos[i]];
        }
        out
    }
}

/// Augmented-Lagrangian penalty factor relative to the Hessian scale.
const AL_PENALTY: f64 = 1e6;
const AL_SWEEPS: usize = 40;
const REFINE_STEPS: usize = 20;

/// Solves the QP to the given scaled KKT tolerance.
pub fn solve_qp(qp: &QpProblem, tol: f64) -> Result<QpSolution, QpError> {
    let n = qp.nvar;
    assert_eq!(qp.grad.len(), n, "gradient length mismatch");
    assert_eq!(qp.eq_rhs.len(), qp.eq_rows.len(), "equality rhs mismatch");
    assert_eq!(
        qp.soft_eq_rhs.len(),
        qp.soft_eq_rows.len(),
        "coupling rhs mismatch"
    );
    assert_eq!(qp.ineq_rhs.len(), qp.ineq_rows.len(), "inequality rhs mismatch");

    let h_scale = qp
        .hess
        .iter()
        .map(|&(_, _, v)| v.abs())
        .fold(0.0f64, f64::max);
    let b_scale = qp
        .eq_rhs
        .iter()
        .chain(qp.soft_eq_rhs.iter())
        .fold(0.0f64, |a, &v| a.max(v.abs()));
    let c_scale = if n > 0 { qp.grad.amax() } else { 0.0 };
    let scale = 1.0 + h_scale.max(b_scale).max(c_scale);

    // Augmented Hessian: H + rho R' R over the coupling rows.
    let n_soft = qp.soft_eq_rows.len();
    let rho = AL_PENALTY * scale;
    let mut aug_hess = qp.hess.clone();
    for row in &qp.soft_eq_rows {
        for &(i, ci) in row {
            for &(j, cj) in row {
                aug_hess.push((i, j, rho * ci * cj));
            }
        }
    }

    let mut delta = 1e-11 * scale;
    let mut base = None;
    for _ in 0..4 {
        match KktBase::build(n, &aug_hess, &qp.eq_rows, delta) {
            Ok(b) => {
                base = Some(b);
                break;
            }
            Err(_) => delta *= 1e3,
        }
    }
    let base = base.ok_or(QpError::Singular)?;

    let mut column_cache: HashMap<Active, Vec<f64>> = HashMap::new();
    let mut active: Vec<Active> = Vec::new();
    let mut nu = DVector::<f64>::zeros(n_soft);
    let mut iterations = 0usize;
    let mut sweeps = 0usize;
    let mut inner = InnerSolution::empty(n, qp.eq_rows.len());

    let soft_tol = tol.min(1e-9) * (1.0 + b_scale);
    let mut prev_gap = f64::INFINITY;
    let mut stagnant = 0usize;
    for sweep in 0..AL_SWEEPS {
        sweeps = sweep + 1;
        // grad_aug = c + R'(nu - rho r).
        let mut grad_aug = qp.grad.clone();
        for (k, row) in qp.soft_eq_rows.iter().enumerate() {
            let w = nu[k] - rho * qp.soft_eq_rhs[k];
            for &(j, c) in row {
                grad_aug[j] += c * w;
            }
        }
        inner = pdas(
            qp,
            &aug_hess,
            &grad_aug,
            &base,
            delta,
            tol,
            scale,
            &mut active,
            &mut column_cache,
            &mut iterations,
        )?;
        if n_soft == 0 {
            break;
        }
        let mut worst: f64 = 0.0;
        for (k, row) in qp.soft_eq_rows.iter().enumerate() {
            let gap = row_dot(row, &inner.z) - qp.soft_eq_rhs[k];
            nu[k] += rho * gap;
            worst = worst.max(gap.abs());
        }
        if std::env::var("PHOC_QP_DEBUG").is_ok() {
            eprintln!(
                "sweep {sweep}: soft gap {worst:.3e} active {} iters {iterations}",
                active.len()
            );
        }
        if worst <= soft_tol {
            break;
        }
        // Coupling gap stuck at a positive level: the rows conflict with the
        // inequalities; stop and let the residual report it.
        if worst > 0.9 * prev_gap {
            stagnant += 1;
            if stagnant >= 3 {
                break;
            }
        } else {
            stagnant = 0;
        }
        prev_gap = worst;
    }

    // Polish: with the settled active set the coupling rows are consistent,
    // so one solve with them as hard equalities sharpens primal feasibility
    // and multipliers beyond the penalty-limited accuracy.
    if n_soft > 0 {
        let mut all_rows = qp.eq_rows.clone();
        all_rows.extend(qp.soft_eq_rows.iter().cloned());
        let mut all_rhs = qp.eq_rhs.clone();
        all_rhs.extend(qp.soft_eq_rhs.iter().cloned());
        if let Ok(pbase) = KktBase::build(n, &qp.hess, &all_rows, delta) {
            let mut pcache: HashMap<Active, Vec<f64>> = HashMap::new();
            if let Ok(pol) = solve_with_active_rows(
                qp,
                &qp.hess,
                &qp.grad,
                &all_rows,
                &all_rhs,
                &pbase,
                delta,
                &active,
                &mut pcache,
            ) {
                let neq = qp.eq_rows.len();
                let y_hard = pol.y.rows(0, neq).into_owned();
                let nu_pol = pol.y.rows(neq, n_soft).into_owned();
                let polished = InnerSolution {
                    z: pol.z,
                    y: y_hard,
                    mu: pol.mu,
                };
                let cand = finish(qp, &active, polished, nu_pol, scale, iterations, sweeps);
                let keep = finish(qp, &active, inner, nu, scale, iterations, sweeps);
                let sol = if cand.residuals.max() <= keep.residuals.max() {
                    cand
                } else {
                    keep
                };
                if sol.residuals.max() > tol {
                    return Err(QpError::Stalled(sol.residuals.max()));
                }
                return Ok(sol);
            }
        }
    }

    let sol = finish(qp, &active, inner, nu, scale, iterations, sweeps);
    if sol.residuals.max() > tol {
        return Err(QpError::Stalled(sol.residuals.max()));
    }
    Ok(sol)
}

struct InnerSolution {
    z: DVector<f64>,
    y: DVector<f64>,
    mu: Vec<f64>,
}

impl InnerSolution {
    fn empty(n: usize, neq: usize) -> Self {
        Self {
            z: DVector::zeros(n),
            y: DVector::zeros(neq),
            mu: Vec::new(),
        }
    }
}

/// Primal-dual active-set loop at fixed gradient. `active` persists across
/// calls as a warm start.
#[allow(clippy::too_many_arguments)]
fn pdas(
    qp: &QpProblem,
    aug_hess: &[(usize, usize, f64)],
    grad: &DVector<f64>,
    base: &KktBase,
    delta: f64,
    tol: f64,
    scale: f64,
    active: &mut Vec<Active>,
    column_cache: &mut HashMap<Active, Vec<f64>>,
    iterations: &mut usize,
) -> Result<InnerSolution, QpError> {
    let n = qp.nvar;
    let mut visited: HashSet<Vec<Active>> = HashSet::new();
    visited.insert(active.clone());
    // 0: add all / drop all; 1: add all / drop one; 2: one at a time.
    let mut mode = 0u8;
    let feas_eps = tol * scale;
    let bound_count = qp.lower.iter().filter(|l| l.is_finite()).count()
        + qp.upper.iter().filter(|u| u.is_finite()).count();
    let budget = 500 + 4 * (bound_count + qp.ineq_rows.len());

    let mut local_iters = 0usize;
    loop {
        local_iters += 1;
        *iterations += 1;
        if local_iters > budget {
            return Err(QpError::IterationBudget);
        }

        let inner = solve_with_active_rows(
            qp,
            aug_hess,
            grad,
            &qp.eq_rows,
            &qp.eq_rhs,
            base,
            delta,
            active,
            column_cache,
        )?;
        let (z, mu) = (&inner.z, &inner.mu);

        // Violations among inactive constraints.
        let mut violations: Vec<(Active, f64)> = Vec::new();
        for v in 0..n {
            if qp.lower[v].is_finite() && !active.contains(&Active::Lower(v)) {
                let gap = qp.lower[v] - z[v];
                if gap > feas_eps {
                    violations.push((Active::Lower(v), gap));
                }
            }
            if qp.upper[v].is_finite() && !active.contains(&Active::Upper(v)) {
                let gap = z[v] - qp.upper[v];
                if gap > feas_eps {
                    violations.push((Active::Upper(v), gap));
                }
            }
        }
        for (r, row) in qp.ineq_rows.iter().enumerate() {
            if !active.contains(&Active::Row(r)) {
                let gap = row_dot(row, z) - qp.ineq_rhs[r];
                if gap > feas_eps {
                    violations.push((Active::Row(r), gap));
                }
            }
        }
        // Wrong-signed multipliers among active constraints.
        let mut drops: Vec<(usize, f64)> = Vec::new();
        for (k, m) in mu.iter().enumerate() {
            if *m < -feas_eps {
                drops.push((k, *m));
            }
        }

        if violations.is_empty() && drops.is_empty() {
            return Ok(inner);
        }

        let mut next = active.clone();
        let drop_one = |next: &mut Vec<Active>, drops: &[(usize, f64)]| {
            if let Some(&(worst, _)) = drops
                .iter()
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            {
                next.remove(worst);
                true
            } else {
                false
            }
        };
        match mode {
            0 => {
                let drop_set: HashSet<usize> = drops.iter().map(|&(k, _)| k).collect();
                next = next
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| !drop_set.contains(k))
                    .map(|(_, &a)| a)
                    .collect();
                next.extend(violations.iter().map(|&(a, _)| a));
            }
            1 => {
                if !drop_one(&mut next, &drops) {
                    next.extend(violations.iter().map(|&(a, _)| a));
                }
            }
            _ => {
                if !drop_one(&mut next, &drops) {
                    if let Some(&(worst, _)) = violations
                        .iter()
                        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                    {
                        next.push(worst);
                    }
                }
            }
        }
        next.sort();
        next.dedup();
        if !visited.insert(next.clone()) {
            if mode == 2 {
                return Err(QpError::IterationBudget);
            }
            mode += 1;
            visited.clear();
            visited.insert(next.clone());
        }
        *active = next;
    }
}

/// Solves the bordered KKT system for the current active set with iterative
/// refinement against the unregularized operator. When the active set makes
/// the system inconsistent, the best (least-residual) iterate is returned and
/// the multiplier signs steer the outer update.
#[allow(clippy::too_many_arguments)]
fn solve_with_active_rows(
    qp: &QpProblem,
    hess: &[(usize, usize, f64)],
    grad: &DVector<f64>,
    eq_rows: &[SparseRow],
    eq_rhs: &[f64],
    base: &KktBase,
    delta: f64,
    active: &[Active],
    cache: &mut HashMap<Active, Vec<f64>>,
) -> Result<InnerSolution, QpError> {
    let n = qp.nvar;
    let neq = eq_rows.len();
    let na = active.len();
    let n_kkt = base.n_kkt;

    for &a in active {
        if !cache.contains_key(&a) {
            let (row, _) = active_row(qp, a);
            let mut rhs = vec![0.0; n_kkt];
            for &(j, c) in &row {
                rhs[j] = c;
            }
            cache.insert(a, base.solve(&rhs));
        }
    }
    let ys: Vec<&Vec<f64>> = active.iter().map(|a| &cache[a]).collect();
    let rows: Vec<(SparseRow, f64)> = active.iter().map(|&a| active_row(qp, a)).collect();

    // Schur complement S = C K^{-1} C' + delta I.
    let mut schur = DMatrix::zeros(na, na);
    for (i, (row_i, _)) in rows.iter().enumerate() {
        for j in 0..na {
            let mut s = 0.0;
            for &(col, c) in row_i {
                s += c * ys[j][col];
            }
            schur[(i, j)] = s;
        }
        schur[(i, i)] += delta;
    }
    let schur_lu = schur.lu();

    let mut rhs_full = vec![0.0; n_kkt];
    for i in 0..n {
        rhs_full[i] = -grad[i];
    }
    for r in 0..neq {
        rhs_full[n + r] = eq_rhs[r];
    }
    let rhs_border: Vec<f64> = rows.iter().map(|(_, d)| *d).collect();

    let mut z = DVector::zeros(n);
    let mut y = DVector::zeros(neq);
    let mut mu = DVector::zeros(na);
    let mut best_resid = f64::INFINITY;
    let mut best: Option<(DVector<f64>, DVector<f64>, DVector<f64>)> = None;

    for _ in 0..REFINE_STEPS {
        // True residual of the current iterate.
        let mut res = vec![0.0; n_kkt];
        let mut hz = DVector::zeros(n);
        hess_mul(hess, &z, &mut hz);
        for i in 0..n {
            res[i] = rhs_full[i] - hz[i];
        }
        for (r, row) in eq_rows.iter().enumerate() {
            let mut az = 0.0;
            for &(j, c) in row {
                az += c * z[j];
                res[j] -= c * y[r];
            }
            res[n + r] = rhs_full[n + r] - az;
        }
        let mut res_border = vec![0.0; na];
        for (k, (row, _)) in rows.iter().enumerate() {
            let mut cz = 0.0;
            for &(j, c) in row {
                cz += c * z[j];
                res[j] -= c * mu[k];
            }
            res_border[k] = rhs_border[k] - cz;
        }
        let resid = res
            .iter()
            .chain(res_border.iter())
            .fold(0.0f64, |a, &v| a.max(v.abs()));
        if resid >= 0.5 * best_resid {
            break;
        }
        best_resid = resid;
        best = Some((z.clone(), y.clone(), mu.clone()));
        if resid < 1e-13 * (1.0 + grad.amax()) {
            break;
        }

        // Correction through the regularized factorization.
        let u0 = base.solve(&res);
        let dmu = if na == 0 {
            DVector::zeros(0)
        } else {
            let mut srhs = DVector::zeros(na);
            for (k, (row, _)) in rows.iter().enumerate() {
                let mut s = 0.0;
                for &(j, c) in row {
                    s += c * u0[j];
                }
                srhs[k] = s - res_border[k];
            }
            schur_lu.solve(&srhs).ok_or(QpError::Singular)?
        };
        let mut rhs2 = res;
        for (k, (row, _)) in rows.iter().enumerate() {
            for &(j, c) in row {
                rhs2[j] -= c * dmu[k];
            }
        }
        let u = base.solve(&rhs2);
        for i in 0..n {
            z[i] += u[i];
        }
        for r in 0..neq {
            y[r] += u[n + r];
        }
        for k in 0..na {
            mu[k] += dmu[k];
        }
    }
    let (z, y, mu) = best.unwrap_or((z, y, mu));
    Ok(InnerSolution {
        z,
        y,
        mu: mu.iter().cloned().collect(),
    })
}

fn finish(
    qp: &QpProblem,
    active: &[Active],
    inner: InnerSolution,
    nu: DVector<f64>,
    scale: f64,
    iterations: usize,
    sweeps: usize,
) -> QpSolution {
    let n = qp.nvar;
    let InnerSolution { z, y, mu } = inner;
    let mut ineq_multipliers = vec![0.0; qp.ineq_rows.len()];
    let mut lower_multipliers = vec![0.0; n];
    let mut upper_multipliers = vec![0.0; n];
    for (k, &a) in active.iter().enumerate() {
        match a {
            Active::Lower(v) => lower_multipliers[v] = mu[k],
            Active::Upper(v) => upper_multipliers[v] = mu[k],
            Active::Row(r) => ineq_multipliers[r] = mu[k],
        }
    }

    // Residuals of the original (hard-constrained) problem; the coupling
    // rows enter with their augmented-Lagrangian multipliers.
    let mut hz = DVector::zeros(n);
    hess_mul(&qp.hess, &z, &mut hz);
    let mut stat = &hz + &qp.grad;
    for (r, row) in qp.eq_rows.iter().enumerate() {
        for &(j, c) in row {
            stat[j] += c * y[r];
        }
    }
    for (k, row) in qp.soft_eq_rows.iter().enumerate() {
        for &(j, c) in row {
            stat[j] += c * nu[k];
        }
    }
    for (k, &a) in active.iter().enumerate() {
        let (row, _) = active_row(qp, a);
        for &(j, c) in &row {
            stat[j] += c * mu[k];
        }
    }
    let stat_scale = 1.0 + hz.amax() + qp.grad.amax();
    let stationarity = if n > 0 { stat.amax() / stat_scale } else { 0.0 };

    let mut primal: f64 = 0.0;
    for (r, row) in qp.eq_rows.iter().enumerate() {
        primal = primal.max((row_dot(row, &z) - qp.eq_rhs[r]).abs());
    }
    for (k, row) in qp.soft_eq_rows.iter().enumerate() {
        primal = primal.max((row_dot(row, &z) - qp.soft_eq_rhs[k]).abs());
    }
    let mut comp: f64 = 0.0;
    let mut dual: f64 = 0.0;
    {
        let mut check_ineq = |row: &SparseRow, rhs: f64, m: f64| {
            let cz = row_dot(row, &z);
            primal = primal.max(cz - rhs);
            dual = dual.max(-m);
            comp = comp.max((m * (rhs - cz)).abs());
        };
        for (r, row) in qp.ineq_rows.iter().enumerate() {
            check_ineq(row, qp.ineq_rhs[r], ineq_multipliers[r]);
        }
        for v in 0..n {
            if qp.lower[v].is_finite() {
                check_ineq(&vec![(v, -1.0)], -qp.lower[v], lower_multipliers[v]);
            }
            if qp.upper[v].is_finite() {
                check_ineq(&vec![(v, 1.0)], qp.upper[v], upper_multipliers[v]);
            }
        }
    }
    let b_scale = 1.0
        + qp.eq_rhs
            .iter()
            .chain(qp.soft_eq_rhs.iter())
            .fold(0.0f64, |a, &v| a.max(v.abs()));
    let residuals = KktResiduals {
        stationarity,
        primal: primal / b_scale,
        dual: dual / scale.max(1.0),
        complementarity: comp / scale.max(1.0),
    };
    let objective = qp.objective(&z);
    QpSolution {
        z,
        eq_multipliers: y,
        soft_eq_multipliers: nu,
        ineq_multipliers,
        lower_multipliers,
        upper_multipliers,
        objective,
        residuals,
        iterations,
        sweeps,
    }
}
