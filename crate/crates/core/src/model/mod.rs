//! Domain data types for port-Hamiltonian systems, control and target sets,
//! optimal-control problem statements, and structural validation.
//!
//! Validation never fails hard on a structurally broken system: it returns a
//! [`ViolationReport`] naming each violated condition together with its
//! residual norm. Only validated systems can be constructed.

pub mod io;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{self, rk4_step_matrices, sym_eigen};

/// Default tolerance for the structural matrix conditions.
pub const STRUCT_TOL: f64 = 1e-10;

/// One violated structural condition with its residual.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub condition: String,
    pub residual: f64,
}

/// All violations found while validating a candidate system.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    fn push(&mut self, condition: &str, residual: f64) {
        self.violations.push(Violation {
            condition: condition.to_string(),
            residual,
        });
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "no violations");
        }
        for v in &self.violations {
            writeln!(f, "{} (residual {:.3e})", v.condition, v.residual)?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("structural validation failed:\n{0}")]
    Invalid(ViolationReport),
    #[error("{0}")]
    BadSpec(String),
    #[error(transparent)]
    Numerics(#[from] numerics::NumericsError),
}

pub type Result<T> = std::result::Result<T, ModelError>;

fn check_finite(report: &mut ViolationReport, name: &str, m: &DMatrix<f64>) {
    if m.iter().any(|x| !x.is_finite()) {
        report.push(&format!("{name} has non-finite entries"), f64::INFINITY);
    }
}

fn sym_residual(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).norm() / m.norm().max(1.0)
}

fn skew_residual(m: &DMatrix<f64>) -> f64 {
    (m + m.transpose()).norm() / m.norm().max(1.0)
}

/// Most negative eigenvalue of the symmetric part, scaled; 0 for PSD input.
fn psd_deficit(m: &DMatrix<f64>) -> f64 {
    match sym_eigen(m) {
        Ok((vals, _)) => {
            let scale = vals.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1.0);
            (-vals[0] / scale).max(0.0)
        }
        Err(_) => f64::INFINITY,
    }
}

/// Descriptor port-Hamiltonian system `d/dt(Ex) = (J-R)Qx + Bu`,
/// `y = B^T Q x`.
#[derive(Debug, Clone)]
pub struct PhDaeSystem {
    e: DMatrix<f64>,
    j: DMatrix<f64>,
    r: DMatrix<f64>,
    q: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl PhDaeSystem {
    /// Validates the defining matrix conditions: `J` skew-symmetric, `R`
    /// symmetric PSD, `Q^T E = E^T Q >= 0`, plus shape compatibility.
    pub fn validate(
        e: DMatrix<f64>,
        j: DMatrix<f64>,
        r: DMatrix<f64>,
        q: DMatrix<f64>,
        b: DMatrix<f64>,
    ) -> std::result::Result<Self, ViolationReport> {
        Self::validate_with_tol(e, j, r, q, b, STRUCT_TOL)
    }

    pub fn validate_with_tol(
        e: DMatrix<f64>,
        j: DMatrix<f64>,
        r: DMatrix<f64>,
        q: DMatrix<f64>,
        b: DMatrix<f64>,
        tol: f64,
    ) -> std::result::Result<Self, ViolationReport> {
        let mut rep = ViolationReport::default();
        let n = e.nrows();
        for (name, m) in [("E", &e), ("J", &j), ("R", &r), ("Q", &q)] {
            if m.nrows() != n || m.ncols() != n {
                rep.push(&format!("{name} is not square of size {n}"), f64::INFINITY);
            }
            check_finite(&mut rep, name, m);
        }
        if b.nrows() != n {
            rep.push("B row count does not match the state dimension", f64::INFINITY);
        }
        check_finite(&mut rep, "B", &b);
        if !rep.is_empty() {
            return Err(rep);
        }

        let sk = skew_residual(&j);
        if sk > tol {
            rep.push("J not skew-symmetric", sk);
        }
        let rs = sym_residual(&r);
        if rs > tol {
            rep.push("R not symmetric", rs);
        }
        let rp = psd_deficit(&r);
        if rp > tol {
            rep.push("R not positive semi-definite", rp);
        }
        let qe = &q.transpose() * &e;
        let qes = sym_residual(&qe);
        if qes > tol {
            rep.push("Q^T E not symmetric", qes);
        }
        let qep = psd_deficit(&qe);
        if qep > tol {
            rep.push("Q^T E not positive semi-definite", qep);
        }
        if rep.is_empty() {
            Ok(Self { e, j, r, q, b })
        } else {
            Err(rep)
        }
    }

    pub fn n(&self) -> usize {
        self.e.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn e(&self) -> &DMatrix<f64> {
        &self.e
    }
    pub fn j(&self) -> &DMatrix<f64> {
        &self.j
    }
    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }
    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// Flow matrix `(J - R) Q`.
    pub fn a(&self) -> DMatrix<f64> {
        (&self.j - &self.r) * &self.q
    }

    /// Stored energy `H(x) = x^T E^T Q x / 2`.
    pub fn hamiltonian(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(self.e.transpose() * &self.q * x))
    }

    /// Output `y = B^T Q x`.
    pub fn output(&self, x: &DVector<f64>) -> DVector<f64> {
        self.b.transpose() * &self.q * x
    }

    /// Dissipation weight `Q^T R Q` (the state-only turnpike matrix).
    pub fn qrq(&self) -> DMatrix<f64> {
        numerics::symmetrize(&(self.q.transpose() * &self.r * &self.q))
    }
}

/// Port-Hamiltonian ODE with feed-through:
/// `x' = (J-R)Qx + (B-P)u`, `y = (B+P)^T Qx + Du`, with
/// `W = [[QRQ, QP], [P^T Q, S]] >= 0`, `S = (D + D^T)/2`.
#[derive(Debug, Clone)]
pub struct PhOdeSystem {
    j: DMatrix<f64>,
    r: DMatrix<f64>,
    q: DMatrix<f64>,
    b: DMatrix<f64>,
    p: DMatrix<f64>,
    d: DMatrix<f64>,
    s: DMatrix<f64>,
    n_skew: DMatrix<f64>,
    w: DMatrix<f64>,
}

impl PhOdeSystem {
    pub fn validate(
        j: DMatrix<f64>,
        r: DMatrix<f64>,
        q: DMatrix<f64>,
        b: DMatrix<f64>,
        p: DMatrix<f64>,
        d: DMatrix<f64>,
    ) -> std::result::Result<Self, ViolationReport> {
        Self::validate_with_tol(j, r, q, b, p, d, STRUCT_TOL)
    }

    pub fn validate_with_tol(
        j: DMatrix<f64>,
        r: DMatrix<f64>,
        q: DMatrix<f64>,
        b: DMatrix<f64>,
        p: DMatrix<f64>,
        d: DMatrix<f64>,
        tol: f64,
    ) -> std::result::Result<Self, ViolationReport> {
        let mut rep = ViolationReport::default();
        let n = j.nrows();
        let m = b.ncols();
        for (name, mat) in [("J", &j), ("R", &r), ("Q", &q)] {
            if mat.nrows() != n || mat.ncols() != n {
                rep.push(&format!("{name} is not square of size {n}"), f64::INFINITY);
            }
            check_finite(&mut rep, name, mat);
        }
        if b.nrows() != n || p.nrows() != n || p.ncols() != m {
            rep.push("B/P shapes incompatible", f64::INFINITY);
        }
        if d.nrows() != m || d.ncols() != m {
            rep.push("D is not m-by-m", f64::INFINITY);
        }
        check_finite(&mut rep, "B", &b);
        check_finite(&mut rep, "P", &p);
        check_finite(&mut rep, "D", &d);
        if !rep.is_empty() {
            return Err(rep);
        }

        let sk = skew_residual(&j);
        if sk > tol {
            rep.push("J not skew-symmetric", sk);
        }
        let rs = sym_residual(&r);
        if rs > tol {
            rep.push("R not symmetric", rs);
        }
        let rp = psd_deficit(&r);
        if rp > tol {
            rep.push("R not positive semi-definite", rp);
        }
        let qs = sym_residual(&q);
        if qs > tol {
            rep.push("Q not symmetric", qs);
        }
        let qp = psd_deficit(&q);
        if qp > tol {
            rep.push("Q not PSD", qp);
        }
        let s = numerics::symmetrize(&d);
        let n_skew = (&d - &d.transpose()) * 0.5;
        let sp = psd_deficit(&s);
        if sp > tol {
            rep.push("S = (D + D^T)/2 not PSD", sp);
        }
        // W assembled exactly from the blocks.
        let mut w = DMatrix::zeros(n + m, n + m);
        let qrq = &q * &r * &q;
        let qp_blk = &q * &p;
        w.view_mut((0, 0), (n, n)).copy_from(&qrq);
        w.view_mut((0, n), (n, m)).copy_from(&qp_blk);
        w.view_mut((n, 0), (m, n)).copy_from(&qp_blk.transpose());
        w.view_mut((n, n), (m, m)).copy_from(&s);
        let wp = psd_deficit(&w);
        if wp > tol {
            rep.push("W not PSD", wp);
        }
        if rep.is_empty() {
            Ok(Self {
                j,
                r,
                q,
                b,
                p,
                d,
                s,
                n_skew,
                w,
            })
        } else {
            Err(rep)
        }
    }

    pub fn n(&self) -> usize {
        self.j.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn j(&self) -> &DMatrix<f64> {
        &self.j
    }
    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }
    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }
    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }
    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }
    pub fn s(&self) -> &DMatrix<f64> {
        &self.s
    }
    pub fn n_skew(&self) -> &DMatrix<f64> {
        &self.n_skew
    }

    /// The PSD input-state weight `W`.
    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    /// Flow matrix `A = (J - R) Q`.
    pub fn a(&self) -> DMatrix<f64> {
        (&self.j - &self.r) * &self.q
    }

    /// Input matrix of the dynamics, `B - P`.
    pub fn input_matrix(&self) -> DMatrix<f64> {
        &self.b - &self.p
    }

    /// Output `y = (B + P)^T Q x + D u`.
    pub fn output(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        (&self.b + &self.p).transpose() * &self.q * x + &self.d * u
    }

    /// Stored energy `H(x) = x^T Q x / 2`.
    pub fn hamiltonian(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.q * x))
    }

    /// `W (x; u)` stacked product, used by dissipation diagnostics.
    pub fn w_apply(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let mut z = DVector::zeros(self.n() + self.m());
        z.rows_mut(0, self.n()).copy_from(x);
        z.rows_mut(self.n(), self.m()).copy_from(u);
        &self.w * z
    }

    /// Quadratic dissipation rate `(x; u)^T W (x; u)`.
    pub fn w_quad(&self, x: &DVector<f64>, u: &DVector<f64>) -> f64 {
        let mut z = DVector::zeros(self.n() + self.m());
        z.rows_mut(0, self.n()).copy_from(x);
        z.rows_mut(self.n(), self.m()).copy_from(u);
        z.dot(&(&self.w * &z))
    }
}

/// Admissible control set: convex, compact, with `0` strictly inside.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ControlSet {
    /// Componentwise box `lower <= u <= upper` with `lower < 0 < upper`.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Euclidean ball of the given radius around the origin.
    Ball { dim: usize, radius: f64 },
}

impl ControlSet {
    /// Symmetric box `[-bound, bound]^m`.
    pub fn symmetric_box(m: usize, bound: f64) -> Self {
        ControlSet::Box {
            lower: vec![-bound; m],
            upper: vec![bound; m],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ControlSet::Box { lower, upper } => {
                if lower.len() != upper.len() || lower.is_empty() {
                    return Err(ModelError::BadSpec("box bounds length mismatch".into()));
                }
                for (l, u) in lower.iter().zip(upper) {
                    if !(l.is_finite() && u.is_finite() && *l < 0.0 && *u > 0.0) {
                        return Err(ModelError::BadSpec(
                            "box must satisfy lower < 0 < upper componentwise".into(),
                        ));
                    }
                }
                Ok(())
            }
            ControlSet::Ball { dim, radius } => {
                if *dim == 0 || !radius.is_finite() || *radius <= 0.0 {
                    return Err(ModelError::BadSpec("ball radius must be positive".into()));
                }
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ControlSet::Box { lower, .. } => lower.len(),
            ControlSet::Ball { dim, .. } => *dim,
        }
    }

    pub fn contains(&self, u: &DVector<f64>, tol: f64) -> bool {
        match self {
            ControlSet::Box { lower, upper } => u
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(&ui, (&l, &up))| ui >= l - tol && ui <= up + tol),
            ControlSet::Ball { radius, .. } => u.norm() <= radius + tol,
        }
    }

    /// Margin to the boundary: positive when strictly inside.
    pub fn interior_margin(&self, u: &DVector<f64>) -> f64 {
        match self {
            ControlSet::Box { lower, upper } => u
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(&ui, (&l, &up))| (ui - l).min(up - ui))
                .fold(f64::INFINITY, f64::min),
            ControlSet::Ball { radius, .. } => radius - u.norm(),
        }
    }

    /// Largest control norm over the set.
    pub fn u_max(&self) -> f64 {
        match self {
            ControlSet::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(&l, &u)| l.abs().max(u.abs()).powi(2))
                .sum::<f64>()
                .sqrt(),
            ControlSet::Ball { radius, .. } => *radius,
        }
    }

    /// Largest `t >= 0` with `t * dir` in the set (`inf` for `dir = 0`).
    pub fn boundary_scale(&self, dir: &DVector<f64>) -> f64 {
        match self {
            ControlSet::Box { lower, upper } => {
                let mut t = f64::INFINITY;
                for (i, &di) in dir.iter().enumerate() {
                    if di > 0.0 {
                        t = t.min(upper[i] / di);
                    } else if di < 0.0 {
                        t = t.min(lower[i] / di);
                    }
                }
                t
            }
            ControlSet::Ball { radius, .. } => {
                let nd = dir.norm();
                if nd == 0.0 {
                    f64::INFINITY
                } else {
                    radius / nd
                }
            }
        }
    }
}

/// Terminal target: a singleton point or an affine box `l <= G x <= u`.
#[derive(Debug, Clone)]
pub enum TargetSet {
    Point(DVector<f64>),
    AffineBox {
        g: DMatrix<f64>,
        l: DVector<f64>,
        u: DVector<f64>,
    },
}

impl TargetSet {
    pub fn validate(&self, state_dim: usize) -> Result<()> {
        match self {
            TargetSet::Point(p) => {
                if p.len() != state_dim {
                    return Err(ModelError::BadSpec(format!(
                        "target point dimension {} does not match state dimension {state_dim}",
                        p.len()
                    )));
                }
                if p.iter().any(|v| !v.is_finite()) {
                    return Err(ModelError::BadSpec("target point not finite".into()));
                }
                Ok(())
            }
            TargetSet::AffineBox { g, l, u } => {
                if g.ncols() != state_dim || g.nrows() != l.len() || g.nrows() != u.len() {
                    return Err(ModelError::BadSpec("affine box shapes incompatible".into()));
                }
                if l.iter().zip(u.iter()).any(|(&a, &b)| a > b) {
                    return Err(ModelError::BadSpec("affine box needs l <= u".into()));
                }
                Ok(())
            }
        }
    }

    /// Euclidean distance of `x` (in target coordinates) to the set.
    pub fn distance(&self, x: &DVector<f64>) -> f64 {
        match self {
            TargetSet::Point(p) => (x - p).norm(),
            TargetSet::AffineBox { g, l, u } => {
                let gx = g * x;
                let mut d2 = 0.0;
                for i in 0..gx.len() {
                    let r = if gx[i] < l[i] {
                        l[i] - gx[i]
                    } else if gx[i] > u[i] {
                        gx[i] - u[i]
                    } else {
                        0.0
                    };
                    d2 += r * r;
                }
                d2.sqrt()
            }
        }
    }
}

/// Solver tolerances carried by a problem spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverTolerances {
    /// Relative rank threshold for all structural decisions.
    pub rank_tol: f64,
    /// Relative axis threshold for eigenvalue classification.
    pub spectral_tol: f64,
    /// Scaled KKT residual target of the QP solver.
    pub kkt_tol: f64,
    /// Terminal-feasibility threshold, scaled by `1 + |x0|`.
    pub feas_tol: f64,
}

impl Default for SolverTolerances {
    fn default() -> Self {
        Self {
            rank_tol: numerics::RANK_TOL,
            spectral_tol: numerics::SPECTRAL_TOL,
            kkt_tol: 1e-7,
            feas_tol: 1e-6,
        }
    }
}

/// The system a problem constrains: descriptor or ODE form.
#[derive(Debug, Clone)]
pub enum SystemSpec {
    Dae(PhDaeSystem),
    Ode(PhOdeSystem),
}

impl SystemSpec {
    pub fn state_dim(&self) -> usize {
        match self {
            SystemSpec::Dae(s) => s.n(),
            SystemSpec::Ode(s) => s.n(),
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            SystemSpec::Dae(s) => s.m(),
            SystemSpec::Ode(s) => s.m(),
        }
    }
}

/// A minimal-energy-supply optimal control problem statement.
#[derive(Debug, Clone)]
pub struct OcpSpec {
    pub system: SystemSpec,
    /// Horizon length `T`.
    pub horizon: f64,
    /// Number of RK4 grid intervals `N`.
    pub steps: usize,
    /// Initial datum: `x0` for ODE constraints, `w0 in im E` for DAE.
    pub initial: DVector<f64>,
    pub target: TargetSet,
    pub control_set: ControlSet,
    pub tolerances: SolverTolerances,
    /// Whether the control set was filled in by the default box.
    pub control_set_defaulted: bool,
}

impl OcpSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(ModelError::BadSpec("horizon T must be positive".into()));
        }
        if self.steps < 2 {
            return Err(ModelError::BadSpec("grid size N must be at least 2".into()));
        }
        let n = self.system.state_dim();
        if self.initial.len() != n {
            return Err(ModelError::BadSpec(
                "initial datum dimension does not match the state dimension".into(),
            ));
        }
        self.control_set.validate()?;
        if self.control_set.dim() != self.system.input_dim() {
            return Err(ModelError::BadSpec(
                "control set dimension does not match the input dimension".into(),
            ));
        }
        self.target.validate(n)?;
        if let SystemSpec::Dae(sys) = &self.system {
            let im_e = numerics::column_space(sys.e(), self.tolerances.rank_tol)?;
            let tol = 1e-8 * (1.0 + self.initial.norm());
            if im_e.dist(&self.initial) > tol {
                return Err(ModelError::BadSpec(
                    "initial datum w0 does not lie in im E".into(),
                ));
            }
            if let TargetSet::Point(p) = &self.target {
                if im_e.dist(p) > 1e-8 * (1.0 + p.norm()) {
                    return Err(ModelError::BadSpec(
                        "target point does not lie in im E".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn step_size(&self) -> f64 {
        self.horizon / self.steps as f64
    }
}

/// Sampled trajectory on a uniform grid. Controls are piecewise constant on
/// the grid intervals; `controls[N]` duplicates `controls[N-1]` so every grid
/// point carries a control and an output sample.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub controls: Vec<DVector<f64>>,
    pub outputs: Vec<DVector<f64>>,
}

impl Trajectory {
    /// Grid step.
    pub fn h(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }

    /// Number of grid intervals.
    pub fn intervals(&self) -> usize {
        self.times.len().saturating_sub(1)
    }

    /// Checks grid uniformity, finiteness and control admissibility.
    pub fn check(&self, control_set: Option<&ControlSet>, tol: f64) -> Result<()> {
        let n = self.times.len();
        if n < 2 || self.states.len() != n || self.controls.len() != n || self.outputs.len() != n {
            return Err(ModelError::BadSpec("trajectory arrays inconsistent".into()));
        }
        let h = self.h();
        for k in 0..n - 1 {
            let dt = self.times[k + 1] - self.times[k];
            if dt <= 0.0 || (dt - h).abs() > 1e-9 * h.max(1.0) {
                return Err(ModelError::BadSpec("grid not uniform/increasing".into()));
            }
        }
        for v in self.states.iter().chain(&self.controls).chain(&self.outputs) {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(ModelError::BadSpec("trajectory has non-finite samples".into()));
            }
        }
        if let Some(cs) = control_set {
            for u in &self.controls {
                if !cs.contains(u, tol) {
                    return Err(ModelError::BadSpec(
                        "control sample outside the admissible set".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// RK4 simulation of a pH-ODE under piecewise-constant controls.
/// `controls.len()` intervals, horizon `t_end`.
pub fn simulate_ode(
    sys: &PhOdeSystem,
    x0: &DVector<f64>,
    controls: &[DVector<f64>],
    t_end: f64,
) -> Trajectory {
    let n_steps = controls.len();
    assert!(n_steps >= 1, "need at least one control interval");
    let h = t_end / n_steps as f64;
    let (ad, bd) = rk4_step_matrices(&sys.a(), &sys.input_matrix(), h);
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut times = Vec::with_capacity(n_steps + 1);
    states.push(x0.clone());
    times.push(0.0);
    for (k, u) in controls.iter().enumerate() {
        let next = &ad * states.last().unwrap() + &bd * u;
        states.push(next);
        times.push(h * (k + 1) as f64);
    }
    let mut ctl: Vec<DVector<f64>> = controls.to_vec();
    ctl.push(controls.last().unwrap().clone());
    let outputs = states
        .iter()
        .zip(ctl.iter())
        .map(|(x, u)| sys.output(x, u))
        .collect();
    Trajectory {
        times,
        states,
        controls: ctl,
        outputs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    pub(crate) fn msd_ode() -> PhOdeSystem {
        let j = DMatrix::from_row_slice(3, 3, &[0., 0., 1., 0., 0., -1., -1., 1., 0.]);
        let r = DMatrix::from_row_slice(3, 3, &[1., 1., 0., 1., 1., 0., 0., 0., 0.]);
        let q = DMatrix::identity(3, 3);
        let b = DMatrix::from_column_slice(3, 1, &[1., 0., 0.]);
        let p = DMatrix::zeros(3, 1);
        let d = DMatrix::zeros(1, 1);
        PhOdeSystem::validate(j, r, q, b, p, d).unwrap()
    }

    pub(crate) fn robot_dae() -> PhDaeSystem {
        let (c1, c2, c3) = (10.0, 10.0, 17.0);
        let mut r = DMatrix::zeros(5, 5);
        r[(3, 3)] = c1 + c2;
        r[(3, 4)] = -c2;
        r[(4, 3)] = -c2;
        r[(4, 4)] = c2 + c3;
        let gamma = DMatrix::from_row_slice(3, 2, &[1., 0., -1., 1., 0., -1.]);
        let mut j = DMatrix::zeros(5, 5);
        j.view_mut((0, 3), (3, 2)).copy_from(&gamma);
        j.view_mut((3, 0), (2, 3)).copy_from(&(-gamma.transpose()));
        let e = DMatrix::from_diagonal(&nalgebra::dvector![1., 1., 0., 1.1, 0.1]);
        let q = DMatrix::from_diagonal(&nalgebra::dvector![0., 5., 1., 1., 1.]);
        let b = DMatrix::from_column_slice(5, 1, &[0., 0., 0., 1., 0.]);
        PhDaeSystem::validate(e, j, r, q, b).unwrap()
    }

    #[test]
    fn msd_system_is_valid() {
        let sys = msd_ode();
        // W = [[R, 0], [0, 0]] for Q = I, P = 0, D = 0.
        assert_relative_eq!(
            sys.w().view((0, 0), (3, 3)).into_owned(),
            sys.r().clone(),
            epsilon = 1e-14
        );
        assert_eq!(sys.w().nrows(), 4);
        assert!(sys.w().view((0, 3), (3, 1)).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn robot_system_is_valid() {
        let sys = robot_dae();
        assert_eq!(sys.n(), 5);
        // Hamiltonian at the initial datum-compatible state.
        let x = DVector::from_row_slice(&[1., 1., 0., 1., 0.]);
        assert_relative_eq!(sys.hamiltonian(&x), 3.05, epsilon = 1e-12);
    }

    #[test]
    fn broken_skew_symmetry_is_reported() {
        let mut j = DMatrix::zeros(2, 2);
        j[(0, 1)] = 1.0;
        j[(1, 0)] = 1.0;
        let e = DMatrix::identity(2, 2);
        let r = DMatrix::zeros(2, 2);
        let q = DMatrix::identity(2, 2);
        let b = DMatrix::zeros(2, 1);
        let err = PhDaeSystem::validate(e, j, r, q, b).unwrap_err();
        assert!(err
            .violations
            .iter()
            .any(|v| v.condition.contains("J not skew-symmetric")));
    }

    #[test]
    fn indefinite_q_is_reported() {
        let j = DMatrix::zeros(2, 2);
        let r = DMatrix::zeros(2, 2);
        let q = DMatrix::from_diagonal(&nalgebra::dvector![1.0, -0.5]);
        let b = DMatrix::zeros(2, 1);
        let p = DMatrix::zeros(2, 1);
        let d = DMatrix::zeros(1, 1);
        let err = PhOdeSystem::validate(j, r, q, b, p, d).unwrap_err();
        assert!(err.violations.iter().any(|v| v.condition.contains("Q not PSD")));
    }

    #[test]
    fn output_examples() {
        let sys = msd_ode();
        let x = DVector::from_row_slice(&[1., 1., 1.]);
        let u = DVector::from_row_slice(&[0.3]);
        let y = sys.output(&x, &u);
        assert_relative_eq!(y[0], 1.0, epsilon = 1e-14);
        let zero = sys.output(&DVector::zeros(3), &DVector::zeros(1));
        assert_eq!(zero[0], 0.0);

        // Pure feed-through: D = I, B = P = 0.
        let ft = PhOdeSystem::validate(
            DMatrix::zeros(2, 2),
            DMatrix::zeros(2, 2),
            DMatrix::identity(2, 2),
            DMatrix::zeros(2, 2),
            DMatrix::zeros(2, 2),
            DMatrix::identity(2, 2),
        )
        .unwrap();
        let u2 = DVector::from_row_slice(&[0.4, -0.2]);
        assert_relative_eq!(ft.output(&DVector::zeros(2), &u2), u2, epsilon = 1e-14);
    }

    #[test]
    fn hamiltonian_ode() {
        let sys = msd_ode();
        assert_relative_eq!(
            sys.hamiltonian(&DVector::from_row_slice(&[1., 1., 1.])),
            1.5,
            epsilon = 1e-14
        );
        assert_eq!(sys.hamiltonian(&DVector::zeros(3)), 0.0);
    }

    #[test]
    fn control_set_geometry() {
        let cs = ControlSet::symmetric_box(2, 10.0);
        cs.validate().unwrap();
        assert_relative_eq!(cs.u_max(), 200f64.sqrt(), epsilon = 1e-14);
        let dir = DVector::from_row_slice(&[1.0, 0.0]);
        assert_relative_eq!(cs.boundary_scale(&dir), 10.0, epsilon = 1e-14);
        let ball = ControlSet::Ball { dim: 2, radius: 2.0 };
        assert_relative_eq!(ball.u_max(), 2.0, epsilon = 1e-14);
        assert!(ball.contains(&DVector::from_row_slice(&[1.0, 1.0]), 1e-9));
        assert!(!ball.contains(&DVector::from_row_slice(&[2.0, 2.0]), 1e-9));
    }

    #[test]
    fn simulate_stays_put_at_origin() {
        let sys = msd_ode();
        let controls = vec![DVector::zeros(1); 10];
        let traj = simulate_ode(&sys, &DVector::zeros(3), &controls, 1.0);
        assert!(traj.states.iter().all(|x| x.norm() == 0.0));
        traj.check(Some(&ControlSet::symmetric_box(1, 1.0)), 1e-8)
            .unwrap();
    }

    #[test]
    fn dae_spec_checks_image_condition() {
        let sys = robot_dae();
        let spec = OcpSpec {
            system: SystemSpec::Dae(sys.clone()),
            horizon: 1.0,
            steps: 10,
            initial: DVector::from_row_slice(&[1., 1., 0., 1., 0.]),
            target: TargetSet::Point(DVector::from_row_slice(&[1., 1., 0., 2., 0.])),
            control_set: ControlSet::symmetric_box(1, 10.0),
            tolerances: SolverTolerances::default(),
            control_set_defaulted: false,
        };
        spec.validate().unwrap();
        // Third coordinate is not in im E.
        let bad = OcpSpec {
            initial: DVector::from_row_slice(&[1., 1., 0.5, 1., 0.]),
            ..spec
        };
        assert!(bad.validate().is_err());
    }
}
