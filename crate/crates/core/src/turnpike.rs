//! Turnpike diagnostics: distance profiles to the zero-dissipation subspace,
//! integral and measure statistics, the theoretical bound constants, the
//! adjoint-energy estimate, and multi-horizon reports.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::control::{
    controllability_gramian, exp_growth_bound, kalman_subspace, minimal_time_estimate,
    optimal_steady_states, ControlError, SteadyState,
};
use crate::model::{ControlSet, ModelError, OcpSpec, PhOdeSystem, SystemSpec, TargetSet, Trajectory};
use crate::numerics::{
    self, min_positive_eigenvalue, nullspace, spectral_norm, NumericsError, SubspaceBasis,
};
use crate::ocp::{self, OcpError, OcpSolution};

#[derive(Debug, Error)]
pub enum TurnpikeError {
    #[error("subspace ambient dimension {have} does not match the profile dimension {want}")]
    AmbientMismatch { have: usize, want: usize },
    #[error("the dissipation weight is zero; turnpike bounds are undefined")]
    ZeroDissipation,
    #[error("controllability Gramian is singular (alpha = 0)")]
    Uncontrollable,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Ocp(#[from] OcpError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, TurnpikeError>;

/// Distance of each grid sample to a subspace: joint `(x; u)` samples when
/// `joint` is set, state-only otherwise.
pub fn distance_profile(
    traj: &Trajectory,
    subspace: &SubspaceBasis,
    joint: bool,
) -> Result<Vec<f64>> {
    let n = traj.states[0].len();
    let m = traj.controls[0].len();
    let want = if joint { n + m } else { n };
    if subspace.ambient_dim() != want {
        return Err(TurnpikeError::AmbientMismatch {
            have: subspace.ambient_dim(),
            want,
        });
    }
    Ok(traj
        .states
        .iter()
        .zip(&traj.controls)
        .map(|(x, u)| {
            if joint {
                let mut z = DVector::zeros(n + m);
                z.rows_mut(0, n).copy_from(x);
                z.rows_mut(n, m).copy_from(u);
                subspace.dist(&z)
            } else {
                subspace.dist(x)
            }
        })
        .collect())
}

/// Left-endpoint quadrature of the squared distance profile.
pub fn integral_turnpike_stat(profile: &[f64], h: f64) -> f64 {
    profile[..profile.len().saturating_sub(1)]
        .iter()
        .map(|d| h * d * d)
        .sum()
}

/// Measure of the time spent farther than `eps` from the subspace.
pub fn measure_turnpike_stat(profile: &[f64], h: f64, eps: f64) -> f64 {
    assert!(eps > 0.0, "eps must be positive");
    h * profile[..profile.len().saturating_sub(1)]
        .iter()
        .filter(|&&d| d > eps)
        .count() as f64
}

/// The constants of the integral turnpike bound:
/// `F = (G0 + G1 + G2) / lambda_min`, valid for horizons beyond
/// `T_threshold = T0 + T1`.
#[derive(Debug, Clone, Serialize)]
pub struct TurnpikeBound {
    pub f: f64,
    pub t_threshold: f64,
    pub g0: f64,
    pub g1: f64,
    pub g2: f64,
    /// Growth constant with `|e^{tA}| <= 1 + M t`.
    pub m_growth: f64,
    /// Smallest positive eigenvalue of the dissipation weight.
    pub lambda_min: f64,
    pub u_max: f64,
    /// Control magnitude of the realized steering arc into the target.
    pub u1_max: f64,
    pub t0: f64,
    pub t1: f64,
}

/// Assembles the bound constants from steering times `t0` (initial state to
/// the steady state) and `t1` (steady state into the target).
pub fn turnpike_bound(
    sys: &PhOdeSystem,
    x0: &DVector<f64>,
    steady: &SteadyState,
    t0: f64,
    t1: f64,
    u1_max: Option<f64>,
    u_set: &ControlSet,
) -> Result<TurnpikeBound> {
    if !steady.optimal {
        return Err(TurnpikeError::Control(
            ControlError::InconsistentSteadyState(f64::INFINITY),
        ));
    }
    let w = sys.w();
    if w.norm() == 0.0 {
        return Err(TurnpikeError::ZeroDissipation);
    }
    let lambda_min = min_positive_eigenvalue(w)?;
    let a = sys.a();
    let m_growth = exp_growth_bound(&a, t0.max(t1).max(1e-3))?;
    let u_max = u_set.u_max();
    let u1m = u1_max.unwrap_or(u_max).min(u_max);
    let norm_w = spectral_norm(w);
    let norm_q = spectral_norm(sys.q());
    let norm_b = spectral_norm(&sys.input_matrix());
    let x0n = x0.norm();
    let xen = steady.x.norm();

    let g0 = norm_w
        * t0
        * ((1.0 + m_growth * t0).powi(2) * (x0n + norm_b * t0 * u_max).powi(2) + u_max * u_max);
    let g1 = norm_w
        * t1
        * ((1.0 + m_growth * t1).powi(2) * (xen + norm_b * u1m).powi(2) + t1 * u1m * u1m);
    let g2 = 0.5 * norm_q * (1.0 + m_growth * t1).powi(2) * (xen + norm_b * t1 * u1m).powi(2);
    Ok(TurnpikeBound {
        f: (g0 + g1 + g2) / lambda_min,
        t_threshold: t0 + t1,
        g0,
        g1,
        g2,
        m_growth,
        lambda_min,
        u_max,
        u1_max: u1m,
        t0,
        t1,
    })
}

/// Both sides of the adjoint-energy estimate
/// `int_{2tc}^{T-tc} |lambda|^2 <= tc C(tc) int_{tc}^{T-tc} |W (x; u)|^2`
/// with `C(tc) = (8 lambda0^2 / alpha_tc) max{1, |B-P|^2 (1 + M tc)^2 tc^2}`.
#[derive(Debug, Clone, Serialize)]
pub struct AdjointStat {
    pub lhs: f64,
    pub rhs: f64,
    pub c_tc: f64,
    pub alpha_tc: f64,
    pub m_growth: f64,
    pub t_c: f64,
    /// Controls strictly interior on `[tc, T - tc]`; the estimate only
    /// applies when this holds.
    pub interior_ok: bool,
    pub holds: bool,
}

pub fn adjoint_turnpike_stat(
    sys: &PhOdeSystem,
    traj: &Trajectory,
    adjoint: &[DVector<f64>],
    control_set: &ControlSet,
    t_c: f64,
    lambda0: f64,
) -> Result<AdjointStat> {
    let t_end = *traj.times.last().unwrap();
    assert!(t_c > 0.0 && t_c < t_end / 4.0, "need 0 < t_c < T/4");
    let h = traj.h();

    let gram = controllability_gramian(&sys.a(), &sys.input_matrix(), t_c)?;
    if gram.alpha <= 1e-14 * gram.gramian.norm().max(1.0) {
        return Err(TurnpikeError::Uncontrollable);
    }
    let m_growth = exp_growth_bound(&sys.a(), t_c)?;
    let nb = spectral_norm(&sys.input_matrix());
    let c_tc = 8.0 * lambda0 * lambda0 / gram.alpha
        * 1.0f64.max(nb * nb * (1.0 + m_growth * t_c).powi(2) * t_c * t_c);

    let mut interior_ok = true;
    let mut lhs = 0.0;
    let mut rhs_int = 0.0;
    for (k, &t) in traj.times.iter().enumerate() {
        let in_outer = t >= t_c - 1e-12 && t < t_end - t_c - 1e-12;
        let in_inner = t >= 2.0 * t_c - 1e-12 && t < t_end - t_c - 1e-12;
        if in_outer {
            if control_set.interior_margin(&traj.controls[k]) <= 1e-6 {
                interior_ok = false;
            }
            rhs_int += h * sys.w_apply(&traj.states[k], &traj.controls[k]).norm_squared();
        }
        if in_inner {
            lhs += h * adjoint[k].norm_squared();
        }
    }
    let rhs = t_c * c_tc * rhs_int;
    Ok(AdjointStat {
        lhs,
        rhs,
        c_tc,
        alpha_tc: gram.alpha,
        m_growth,
        t_c,
        interior_ok,
        holds: lhs <= rhs,
    })
}

/// One measure-turnpike entry: threshold, time spent beyond it, and the
/// theoretical cap `F / eps^2`.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureEntry {
    pub eps: f64,
    pub stat: f64,
    pub bound: Option<f64>,
    pub holds: Option<bool>,
}

/// Per-horizon turnpike record.
#[derive(Debug, Clone, Serialize)]
pub struct HorizonRecord {
    pub horizon: f64,
    pub steps: usize,
    pub integral_stat: f64,
    pub measure: Vec<MeasureEntry>,
    /// Fraction of grid points with distance at most 0.1.
    pub fraction_near: f64,
    pub bound: Option<TurnpikeBound>,
    /// `F` after the descriptor scaling, when the problem is a DAE.
    pub f_effective: Option<f64>,
    pub bound_holds: Option<bool>,
    pub threshold_met: Option<bool>,
    pub adjoint: Option<AdjointStat>,
    pub adjoint_integral: f64,
    pub cost: f64,
    pub supplied_energy: f64,
    pub terminal_distance: f64,
    pub kkt_residual: f64,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub profile: Vec<f64>,
    #[serde(skip)]
    pub solution: Option<OcpSolution>,
}

/// Multi-horizon turnpike report.
#[derive(Debug, Clone, Serialize)]
pub struct TurnpikeReport {
    /// "input-state (ker W)" for ODE problems, "state (ker RQ)" for DAE.
    pub subspace: String,
    pub subspace_dim: usize,
    pub eps_grid: Vec<f64>,
    pub records: Vec<HorizonRecord>,
    pub skipped: Vec<(f64, String)>,
}

/// Default thresholds for the measure statistics.
pub const DEFAULT_EPS_GRID: [f64; 4] = [0.01, 0.05, 0.1, 0.5];

/// Selects an optimal steady state reachable from `x0`: a least-squares
/// solve over the steady kernel forcing the component of `x - x0` outside
/// `im K(A, B-P)` to vanish (systems with conserved quantities are only
/// steerable within a leaf).
fn reachable_steady_state(
    sys: &PhOdeSystem,
    x0: &DVector<f64>,
    u_set: &ControlSet,
) -> Result<Option<SteadyState>> {
    let space = optimal_steady_states(sys, u_set)?;
    let n = sys.n();
    let reach = kalman_subspace(&sys.a(), &sys.input_matrix())?;
    let p_out = DMatrix::identity(n, n) - reach.projector();
    let d = space.basis.dim();
    if d == 0 {
        // Only the origin: reachable iff x0's unreachable component vanishes.
        let resid = (&p_out * x0).norm();
        if resid <= 1e-8 * (1.0 + x0.norm()) {
            return Ok(Some(space.representative));
        }
        return Ok(None);
    }
    let x_part = space.basis.matrix().rows(0, n).into_owned();
    let coeffs = numerics::least_squares(&(&p_out * x_part), &(&p_out * x0))?;
    let z = space.basis.matrix() * coeffs;
    let x = z.rows(0, n).into_owned();
    let u = z.rows(n, sys.m()).into_owned();
    let resid = (&p_out * (&x - x0)).norm();
    if resid > 1e-6 * (1.0 + x0.norm()) {
        return Ok(None);
    }
    if u_set.interior_margin(&u) <= 0.0 {
        return Ok(None);
    }
    let y = sys.output(&x, &u);
    Ok(Some(SteadyState {
        x,
        u,
        y,
        optimal: true,
    }))
}

/// Steering-arc control magnitude: largest control norm of the terminal
/// distance program's minimizer.
fn steering_control_max(
    sys: &PhOdeSystem,
    x0: &DVector<f64>,
    target: &TargetSet,
    u_set: &ControlSet,
    horizon: f64,
    steps: usize,
    kkt_tol: f64,
) -> Result<f64> {
    let t = ocp::transcribe_terminal_distance(sys, x0, target, u_set, horizon, steps)?;
    let sol = ocp::solve_qp(&t.qp, kkt_tol).map_err(OcpError::from)?;
    let mut u_max: f64 = 0.0;
    for k in 0..t.layout.steps {
        let u = DVector::from_fn(t.layout.m, |i, _| sol.z[t.layout.idx_u(k) + i]);
        u_max = u_max.max(u.norm());
    }
    Ok(u_max)
}

struct WorkingProblem {
    sys: PhOdeSystem,
    x0: DVector<f64>,
    target: TargetSet,
    /// Profile subspace in the reporting coordinates.
    subspace: SubspaceBasis,
    joint: bool,
    /// Scaling of the ODE bound for descriptor problems:
    /// `F_eff = |W_hat| / lambda_min(Q' R Q) * F_ode`.
    dae_scale: Option<f64>,
    label: String,
}

fn working_problem(template: &OcpSpec) -> Result<WorkingProblem> {
    match &template.system {
        SystemSpec::Ode(sys) => {
            let ker_w = nullspace(sys.w(), template.tolerances.rank_tol)?;
            Ok(WorkingProblem {
                sys: sys.clone(),
                x0: template.initial.clone(),
                target: template.target.clone(),
                subspace: ker_w,
                joint: true,
                dae_scale: None,
                label: "input-state (ker W)".into(),
            })
        }
        SystemSpec::Dae(sys) => {
            let red = crate::decomp::beattie_reduce(sys).map_err(OcpError::from)?;
            let reduced = template.reduce(&red)?;
            let rq = sys.r() * sys.q();
            let ker_rq = nullspace(&rq, template.tolerances.rank_tol)?;
            let lambda_min_qrq = min_positive_eigenvalue(&sys.qrq())?;
            let w_hat_norm = spectral_norm(red.reduced.w());
            let lambda_min_what = min_positive_eigenvalue(red.reduced.w())?;
            // F_dae = |W_hat| / lambda_min(Q'RQ) * (G0+G1+G2)/lambda_min(W_hat);
            // turnpike_bound already divides by lambda_min(W_hat), so the
            // remaining factor is |W_hat| / lambda_min(Q'RQ) ... corrected
            // below for the ratio of the two lambda_minima.
            let scale = w_hat_norm / lambda_min_qrq;
            let _ = lambda_min_what;
            Ok(WorkingProblem {
                sys: red.reduced.clone(),
                x0: reduced.initial.clone(),
                target: reduced.target.clone(),
                subspace: ker_rq,
                joint: false,
                dae_scale: Some(scale),
                label: "state (ker RQ)".into(),
            })
        }
    }
}

impl TargetSet {
    fn clone_shallow(&self) -> TargetSet {
        self.clone()
    }
}

/// Solves the problem over each horizon and assembles statistics, bounds and
/// adjoint diagnostics. Infeasible or failing horizons are skipped and
/// recorded.
pub fn multi_horizon_report(
    template: &OcpSpec,
    horizons: &[(f64, usize)],
    eps_grid: &[f64],
    t_c: f64,
) -> Result<TurnpikeReport> {
    let work = working_problem(template)?;
    let mut records = Vec::new();
    let mut skipped = Vec::new();

    for &(horizon, steps) in horizons {
        let spec = OcpSpec {
            horizon,
            steps,
            ..template.clone()
        };
        match horizon_record(template, &work, &spec, eps_grid, t_c) {
            Ok(rec) => records.push(rec),
            Err(e) => skipped.push((horizon, e.to_string())),
        }
    }
    records.sort_by(|a, b| a.horizon.partial_cmp(&b.horizon).unwrap());
    Ok(TurnpikeReport {
        subspace: work.label.clone(),
        subspace_dim: work.subspace.dim(),
        eps_grid: eps_grid.to_vec(),
        records,
        skipped,
    })
}

fn horizon_record(
    template: &OcpSpec,
    work: &WorkingProblem,
    spec: &OcpSpec,
    eps_grid: &[f64],
    t_c_base: f64,
) -> Result<HorizonRecord> {
    let mut notes = Vec::new();
    let sol = ocp::solve_ocp(spec)?;
    let h = spec.step_size();

    // Distance profile in the reporting coordinates.
    let profile = distance_profile(&sol.trajectory, &work.subspace, work.joint)?;
    let integral_stat = integral_turnpike_stat(&profile, h);
    let fraction_near = profile.iter().filter(|&&d| d <= 0.1).count() as f64
        / profile.len() as f64;

    // Theoretical bound: steady state on the reachable leaf, steering times
    // by bisection. Any failure downgrades to a note instead of an error.
    let mut bound = None;
    let mut f_effective = None;
    let mut threshold_met = None;
    match reachable_steady_state(&work.sys, &work.x0, &spec.control_set)? {
        None => notes.push("no reachable optimal steady state with interior control".into()),
        Some(steady) => {
            let t0_est = minimal_time_estimate(
                &work.sys,
                &work.x0,
                &TargetSet::Point(steady.x.clone()),
                &spec.control_set,
                spec.horizon,
                spec.tolerances.feas_tol,
                spec.tolerances.kkt_tol,
            );
            let t1_est = minimal_time_estimate(
                &work.sys,
                &steady.x,
                &work.target.clone_shallow(),
                &spec.control_set,
                spec.horizon,
                spec.tolerances.feas_tol,
                spec.tolerances.kkt_tol,
            );
            match (t0_est, t1_est) {
                (Ok(t0), Ok(t1)) => {
                    let t1u = t1.upper.max(1e-6);
                    let u1_max = steering_control_max(
                        &work.sys,
                        &steady.x,
                        &work.target,
                        &spec.control_set,
                        t1u,
                        spec.steps.min(400),
                        spec.tolerances.kkt_tol,
                    )
                    .ok();
                    let b = turnpike_bound(
                        &work.sys,
                        &work.x0,
                        &steady,
                        t0.upper,
                        t1u,
                        u1_max,
                        &spec.control_set,
                    )?;
                    threshold_met = Some(spec.horizon > b.t_threshold);
                    let f_eff = match work.dae_scale {
                        // F_dae = |W_hat|/lambda_min(Q'RQ) * F_tilde with
                        // F_tilde = (G0+G1+G2)/lambda_min(W_hat) = b.f.
                        Some(scale) => scale * b.f,
                        None => b.f,
                    };
                    f_effective = Some(f_eff);
                    bound = Some(b);
                }
                (Err(e), _) | (_, Err(e)) => {
                    notes.push(format!("steering-time estimate unavailable: {e}"));
                }
            }
        }
    }
    let bound_holds = f_effective.map(|f| integral_stat <= f);
    let measure: Vec<MeasureEntry> = eps_grid
        .iter()
        .map(|&eps| {
            let stat = measure_turnpike_stat(&profile, h, eps);
            let cap = f_effective.map(|f| f / (eps * eps));
            MeasureEntry {
                eps,
                stat,
                bound: cap,
                holds: cap.map(|c| stat <= c),
            }
        })
        .collect();

    // Adjoint diagnostics on the working (reduced for DAE) problem.
    let t_c = t_c_base.min(0.245 * spec.horizon);
    let adjoint_traj = sol
        .reduced_trajectory
        .as_ref()
        .unwrap_or(&sol.trajectory);
    let adjoint_integral: f64 = adjoint_traj
        .times
        .iter()
        .zip(&sol.adjoint)
        .take(sol.adjoint.len() - 1)
        .map(|(_, lam)| h * lam.norm_squared())
        .sum();
    let adjoint = match adjoint_turnpike_stat(
        &work.sys,
        adjoint_traj,
        &sol.adjoint,
        &spec.control_set,
        t_c,
        sol.lambda0,
    ) {
        Ok(stat) => Some(stat),
        Err(TurnpikeError::Uncontrollable) => {
            notes.push("adjoint bound unavailable: controllability Gramian singular".into());
            None
        }
        Err(e) => return Err(e),
    };

    let _ = template;
    Ok(HorizonRecord {
        horizon: spec.horizon,
        steps: spec.steps,
        integral_stat,
        measure,
        fraction_near,
        bound,
        f_effective,
        bound_holds,
        threshold_met,
        adjoint,
        adjoint_integral,
        cost: sol.cost,
        supplied_energy: sol.supplied_energy,
        terminal_distance: sol.terminal_distance,
        kkt_residual: sol.kkt.max(),
        notes,
        profile,
        solution: Some(sol),
    })
}
