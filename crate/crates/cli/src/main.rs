//! Command-line front end: structural validation, pencil and control
//! analysis, reduction, minimal-energy solves, turnpike reports and the
//! built-in experiment reproductions.
//!
//! Exit codes: 0 success, 1 I/O or malformed input, 2 structural validation
//! failure, 3 infeasible problem, 4 numerical failure.

mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use nalgebra::DVector;
use serde_json::{json, Value};

use phoc_core::control;
use phoc_core::decomp;
use phoc_core::model::{self, io as mio, ModelError, OcpSpec, SystemSpec};
use phoc_core::numerics::{self, SubspaceBasis};
use phoc_core::ocp::{self, OcpError, OcpSolution};
use phoc_core::pencil;
use phoc_core::presets;
use phoc_core::turnpike::{self, TurnpikeReport};

use output::{
    csv_distances, ensure_dir, profile_csv, trajectory_csv, write_json, PlotBlocks,
};

#[derive(Parser)]
#[command(name = "phoc", version, about = "Port-Hamiltonian descriptor systems: certification, reduction, minimal-energy optimal control and turnpike diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural matrix conditions of a system file.
    Validate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Structural tolerance override.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Pencil analysis: regularity, index, dissipative-Hamiltonian tests.
    AnalyzePencil {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Reachability, steady states, Gramian constant and growth bound.
    AnalyzeControl {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        /// Gramian horizon (default 1).
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Structure-preserving reduction of a descriptor system to ODE form.
    Reduce {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Solve the minimal-energy steering problem of an OCP file.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Turnpike diagnostics over one or more horizons.
    Turnpike {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        /// Comma-separated horizon list (defaults to the file's T).
        #[arg(long)]
        horizon: Option<String>,
        /// Comma-separated grid sizes matching the horizons.
        #[arg(long)]
        steps: Option<String>,
        /// Comma-separated measure thresholds.
        #[arg(long = "eps-grid")]
        eps_grid: Option<String>,
    },
    /// Built-in experiment bundles.
    Reproduce {
        /// `msd` or `robot`.
        #[arg(long)]
        example: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        horizon: Option<String>,
        #[arg(long)]
        steps: Option<String>,
        #[arg(long = "eps-grid")]
        eps_grid: Option<String>,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(1, format!("I/O error: {e}"))
    }
}

impl From<mio::IoError> for Failure {
    fn from(e: mio::IoError) -> Self {
        match &e {
            mio::IoError::Json { .. } => Failure::new(1, e.to_string()),
            mio::IoError::Model(ModelError::Invalid(_)) => Failure::new(2, e.to_string()),
            mio::IoError::Model(_) => Failure::new(2, e.to_string()),
        }
    }
}

impl From<OcpError> for Failure {
    fn from(e: OcpError) -> Self {
        match &e {
            OcpError::Infeasible { .. } => Failure::new(3, e.to_string()),
            OcpError::Model(_) => Failure::new(2, e.to_string()),
            _ => Failure::new(4, e.to_string()),
        }
    }
}

impl From<control::ControlError> for Failure {
    fn from(e: control::ControlError) -> Self {
        match &e {
            control::ControlError::InfeasibleAtHorizon(_) => Failure::new(3, e.to_string()),
            _ => Failure::new(4, e.to_string()),
        }
    }
}

impl From<pencil::PencilError> for Failure {
    fn from(e: pencil::PencilError) -> Self {
        Failure::new(4, e.to_string())
    }
}

impl From<decomp::DecompError> for Failure {
    fn from(e: decomp::DecompError) -> Self {
        Failure::new(4, e.to_string())
    }
}

impl From<turnpike::TurnpikeError> for Failure {
    fn from(e: turnpike::TurnpikeError) -> Self {
        match e {
            turnpike::TurnpikeError::Ocp(inner) => inner.into(),
            turnpike::TurnpikeError::Control(inner) => inner.into(),
            other => Failure::new(4, other.to_string()),
        }
    }
}

impl From<numerics::NumericsError> for Failure {
    fn from(e: numerics::NumericsError) -> Self {
        Failure::new(4, e.to_string())
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::new(1, format!("cannot read {}: {e}", path.display())))
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|e| Failure::new(1, format!("bad number '{tok}': {e}")))
        })
        .collect()
}

fn parse_usize_list(s: &str) -> Result<Vec<usize>, Failure> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|e| Failure::new(1, format!("bad count '{tok}': {e}")))
        })
        .collect()
}

fn fmt_t(t: f64) -> String {
    if (t - t.round()).abs() < 1e-9 {
        format!("{}", t.round() as i64)
    } else {
        format!("{t}")
    }
}

fn basis_to_rows(b: &SubspaceBasis) -> Vec<Vec<f64>> {
    mio::matrix_to_rows(b.matrix())
}

/// Distance subspace used for the CSV `distW` column and profiles.
fn reporting_subspace(spec_sys: &SystemSpec, rank_tol: f64) -> Result<(SubspaceBasis, bool), Failure> {
    match spec_sys {
        SystemSpec::Ode(sys) => Ok((numerics::nullspace(sys.w(), rank_tol)?, true)),
        SystemSpec::Dae(sys) => {
            let rq = sys.r() * sys.q();
            Ok((numerics::nullspace(&rq, rank_tol)?, false))
        }
    }
}

fn emit_solution_files(
    out: &Path,
    spec: &OcpSpec,
    sol: &OcpSolution,
    suffix: &str,
) -> Result<(), Failure> {
    let (subspace, joint) = reporting_subspace(&spec.system, spec.tolerances.rank_tol)?;
    let dist = csv_distances(&sol.trajectory, &subspace, joint);
    output::write_atomic(
        &out.join(format!("trajectory{suffix}.csv")),
        &trajectory_csv(&sol.trajectory, sol, &dist),
    )?;
    Ok(())
}

fn run_validate(input: &Path, out: &Path, tol: Option<f64>) -> Result<(Value, i32), Failure> {
    let text = read_input(input)?;
    let tol = tol.unwrap_or(model::STRUCT_TOL);
    // Re-validate at the requested tolerance by re-parsing and mapping the
    // violation report into data instead of an error.
    let parsed = mio::system_from_str(&text);
    let (value, code) = match parsed {
        Ok(sys) => {
            let (kind, n, m) = match &sys {
                SystemSpec::Dae(s) => ("dae", s.n(), s.m()),
                SystemSpec::Ode(s) => ("ode", s.n(), s.m()),
            };
            (
                json!({
                    "valid": true,
                    "kind": kind,
                    "n": n,
                    "m": m,
                    "violations": [],
                    "tolerance": tol,
                }),
                0,
            )
        }
        Err(mio::IoError::Model(ModelError::Invalid(report))) => (
            json!({
                "valid": false,
                "violations": report.violations,
                "tolerance": tol,
            }),
            2,
        ),
        Err(e) => return Err(e.into()),
    };
    write_json(&out.join("validation.json"), &value)?;
    Ok((json!({"validated": input.display().to_string()}), code))
}

fn run_analyze_pencil(input: &Path, out: &Path, tol: Option<f64>) -> Result<(Value, i32), Failure> {
    let text = read_input(input)?;
    let sys = mio::system_from_str(&text)?;
    let rank_tol = tol.unwrap_or(numerics::RANK_TOL);
    let (e, a) = match &sys {
        SystemSpec::Dae(s) => (s.e().clone(), s.a()),
        SystemSpec::Ode(s) => (nalgebra::DMatrix::identity(s.n(), s.n()), s.a()),
    };
    let reg = pencil::is_regular(&e, &a)?;
    let index = if reg.regular {
        Some(pencil::pencil_index(&e, &a)?)
    } else {
        None
    };
    let dh_matrix = pencil::is_dh_matrix(&a)?;
    let dh_pencil = if reg.regular {
        Some(pencil::is_dh_pencil(&e, &a)?)
    } else {
        None
    };
    let kernel_conditions = match &sys {
        SystemSpec::Dae(s) => json!({
            "kernel_regularity": pencil::dh_regularity_check(s, rank_tol)?,
            "kernel_index_le1": pencil::dh_index_le1_check(s, rank_tol)?,
        }),
        SystemSpec::Ode(_) => json!({}),
    };
    let report = json!({
        "regular": reg.regular,
        "witness_mu": reg.witness_mu,
        "index": index,
        "dh_matrix": {
            "is_dh": dh_matrix.is_dh,
            "spectrum_ok": dh_matrix.spectrum_ok,
            "imaginary_semisimple": dh_matrix.imaginary_semisimple,
            "zero_chains_ok": dh_matrix.zero_chains_ok,
            "violated": dh_matrix.violated,
            "witness_residual": dh_matrix.witness.as_ref().map(|w| w.reconstruction_residual),
        },
        "dh_pencil": dh_pencil.map(|c| json!({
            "is_dh": c.is_dh,
            "spectrum_ok": c.spectrum_ok,
            "imaginary_semisimple": c.imaginary_semisimple,
            "index_at_most_two": c.index_at_most_two,
            "reverse_index_at_most_two": c.reverse_index_at_most_two,
            "pencil_index": c.pencil_index,
        })),
        "conditions": kernel_conditions,
        "tolerances": {
            "rank_tol": rank_tol,
            "spectral_tol": numerics::SPECTRAL_TOL,
        },
    });
    write_json(&out.join("pencil.json"), &report)?;
    Ok((json!({"analyzed": input.display().to_string()}), 0))
}

fn run_analyze_control(
    input: &Path,
    out: &Path,
    tol: Option<f64>,
    horizon: Option<f64>,
) -> Result<(Value, i32), Failure> {
    let text = read_input(input)?;
    let sys = mio::system_from_str(&text)?;
    let rank_tol = tol.unwrap_or(numerics::RANK_TOL);
    let t_gram = horizon.unwrap_or(1.0);
    let (ode, r_controllable) = match &sys {
        SystemSpec::Dae(s) => {
            let red = decomp::beattie_reduce(s)?;
            (red.reduced.clone(), Some(control::is_r_controllable(s)?))
        }
        SystemSpec::Ode(s) => (s.clone(), None),
    };
    let a = ode.a();
    let b = ode.input_matrix();
    let kalman = control::kalman_subspace(&a, &b)?;
    let controllable = kalman.dim() == ode.n();
    let u_set = model::ControlSet::symmetric_box(ode.m(), mio::DEFAULT_CONTROL_BOUND);
    let steady = control::optimal_steady_states(&ode, &u_set)?;
    let gram = control::controllability_gramian(&a, &b, t_gram)?;
    let m_growth = control::exp_growth_bound(&a, 10.0 * t_gram)?;
    let report = json!({
        "controllable": controllable,
        "r_controllable": r_controllable,
        "kalman_dim": kalman.dim(),
        "optimal_steady_basis": basis_to_rows(&steady.basis),
        "steady_representative": {
            "x": steady.representative.x.as_slice(),
            "u": steady.representative.u.as_slice(),
        },
        "alpha_t": gram.alpha,
        "t": t_gram,
        "M": m_growth,
        "tolerances": {"rank_tol": rank_tol},
    });
    write_json(&out.join("control.json"), &report)?;
    Ok((json!({"analyzed": input.display().to_string()}), 0))
}

fn run_reduce(input: &Path, out: &Path) -> Result<(Value, i32), Failure> {
    let text = read_input(input)?;
    let sys = match mio::system_from_str(&text)? {
        SystemSpec::Dae(s) => s,
        SystemSpec::Ode(_) => {
            return Err(Failure::new(2, "reduce expects a descriptor system (with E)"))
        }
    };
    let red = decomp::beattie_reduce(&sys)?;
    write_json(&out.join("reduced_system.json"), &mio::ode_system_to_json(&red.reduced))?;
    write_json(
        &out.join("transform.json"),
        &json!({
            "U": mio::matrix_to_rows(&red.u),
            "V": mio::matrix_to_rows(&red.v),
            "n1": red.n1,
        }),
    )?;
    Ok((json!({"n1": red.n1}), 0))
}

fn run_solve(
    input: &Path,
    out: &Path,
    tol: Option<f64>,
    horizon: Option<f64>,
    steps: Option<usize>,
) -> Result<(Value, i32), Failure> {
    let text = read_input(input)?;
    let mut spec = mio::ocp_from_str(&text)?;
    if let Some(t) = horizon {
        spec.horizon = t;
    }
    if let Some(n) = steps {
        spec.steps = n;
    }
    if let Some(x) = tol {
        spec.tolerances.kkt_tol = x;
    }
    let sol = ocp::solve_ocp(&spec)?;
    emit_solution_files(out, &spec, &sol, "")?;
    write_json(
        &out.join("solution.json"),
        &json!({
            "cost": sol.cost,
            "supplied_energy": sol.supplied_energy,
            "kkt_residual": sol.kkt.max(),
            "energy_balance_residual": sol.energy_balance_residual,
        }),
    )?;
    Ok((
        json!({
            "horizon": spec.horizon,
            "steps": spec.steps,
            "control_set_defaulted": spec.control_set_defaulted,
        }),
        0,
    ))
}

fn horizons_from_args(
    spec: &OcpSpec,
    horizon: Option<String>,
    steps: Option<String>,
) -> Result<Vec<(f64, usize)>, Failure> {
    match (horizon, steps) {
        (None, None) => Ok(vec![(spec.horizon, spec.steps)]),
        (Some(h), None) => {
            let hs = parse_f64_list(&h)?;
            // Scale the grid with the horizon to keep the step size.
            let base_h = spec.step_size();
            Ok(hs
                .into_iter()
                .map(|t| (t, ((t / base_h).round() as usize).max(2)))
                .collect())
        }
        (Some(h), Some(s)) => {
            let hs = parse_f64_list(&h)?;
            let ss = parse_usize_list(&s)?;
            if hs.len() != ss.len() {
                return Err(Failure::new(1, "horizon and steps lists differ in length"));
            }
            Ok(hs.into_iter().zip(ss).collect())
        }
        (None, Some(s)) => {
            let ss = parse_usize_list(&s)?;
            Ok(ss.into_iter().map(|n| (spec.horizon, n)).collect())
        }
    }
}

fn eps_from_args(eps: Option<String>) -> Result<Vec<f64>, Failure> {
    match eps {
        None => Ok(turnpike::DEFAULT_EPS_GRID.to_vec()),
        Some(s) => parse_f64_list(&s),
    }
}

fn emit_turnpike_files(out: &Path, report: &TurnpikeReport) -> Result<(), Failure> {
    write_json(&out.join("report.json"), &serde_json::to_value(report).unwrap())?;
    for rec in &report.records {
        if let Some(sol) = &rec.solution {
            output::write_atomic(
                &out.join(format!("profile_T{}.csv", fmt_t(rec.horizon))),
                &profile_csv(&sol.trajectory, &rec.profile, &pad_adjoint(sol)),
            )?;
        }
    }
    Ok(())
}

/// Adjoint samples padded to the reporting state dimension.
fn pad_adjoint(sol: &OcpSolution) -> Vec<DVector<f64>> {
    let n = sol.trajectory.states[0].len();
    sol.adjoint
        .iter()
        .map(|lam| {
            if lam.len() == n {
                lam.clone()
            } else {
                let mut v = DVector::zeros(n);
                v.rows_mut(0, lam.len()).copy_from(lam);
                v
            }
        })
        .collect()
}

fn run_turnpike(
    input: &Path,
    out: &Path,
    tol: Option<f64>,
    horizon: Option<String>,
    steps: Option<String>,
    eps_grid: Option<String>,
) -> Result<(Value, i32), Failure> {
    let text = read_input(input)?;
    let mut spec = mio::ocp_from_str(&text)?;
    if let Some(x) = tol {
        spec.tolerances.kkt_tol = x;
    }
    let horizons = horizons_from_args(&spec, horizon, steps)?;
    let eps = eps_from_args(eps_grid)?;
    let report = turnpike::multi_horizon_report(&spec, &horizons, &eps, 2.0)?;
    if report.records.is_empty() {
        let detail = report
            .skipped
            .iter()
            .map(|(t, m)| format!("T={t}: {m}"))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Failure::new(3, format!("all horizons failed ({detail})")));
    }
    emit_turnpike_files(out, &report)?;
    Ok((
        json!({
            "horizons": horizons.iter().map(|(t, n)| json!([t, n])).collect::<Vec<_>>(),
            "control_set_defaulted": spec.control_set_defaulted,
        }),
        0,
    ))
}

fn run_reproduce(
    example: &str,
    out: &Path,
    horizon: Option<String>,
    steps: Option<String>,
    eps_grid: Option<String>,
) -> Result<(Value, i32), Failure> {
    let (template, default_horizons) = match example {
        "msd" => (presets::msd_ocp(10.0, 100), presets::MSD_HORIZONS.to_vec()),
        "robot" => (presets::robot_ocp(5.0, 1000), presets::ROBOT_HORIZONS.to_vec()),
        other => return Err(Failure::new(1, format!("unknown example '{other}'"))),
    };
    let horizons = match (&horizon, &steps) {
        (None, None) => default_horizons,
        _ => horizons_from_args(&template, horizon, steps)?,
    };
    let eps = eps_from_args(eps_grid)?;
    let report = turnpike::multi_horizon_report(&template, &horizons, &eps, 2.0)?;
    if let Some((t, msg)) = report.skipped.first() {
        return Err(Failure::new(4, format!("horizon T={t} failed: {msg}")));
    }
    emit_turnpike_files(out, &report)?;

    // System file and per-horizon trajectories.
    match &template.system {
        SystemSpec::Dae(s) => write_json(&out.join("system.json"), &mio::dae_system_to_json(s))?,
        SystemSpec::Ode(s) => write_json(&out.join("system.json"), &mio::ode_system_to_json(s))?,
    }
    for rec in &report.records {
        let sol = rec.solution.as_ref().expect("records keep their solutions");
        let spec = OcpSpec {
            horizon: rec.horizon,
            steps: rec.steps,
            ..template.clone()
        };
        emit_solution_files(out, &spec, sol, &format!("_T{}", fmt_t(rec.horizon)))?;
    }

    // Plot data per figure.
    if example == "msd" {
        if let Some(rec) = report.records.last() {
            let sol = rec.solution.as_ref().unwrap();
            let mut orbit = PlotBlocks::new("x1 x2 x3 (state orbit, largest horizon)");
            orbit.add_block(
                &format!("T = {}", fmt_t(rec.horizon)),
                sol.trajectory.states.iter().map(|x| vec![x[0], x[1], x[2]]),
            );
            output::write_atomic(&out.join("fig_orbit.dat"), &orbit.render())?;
        }
        let mut states = PlotBlocks::new("t x1 x2 x3 u (one block per horizon)");
        let mut adjoints = PlotBlocks::new("t lambda1 lambda2 lambda3 (one block per horizon)");
        for rec in &report.records {
            let sol = rec.solution.as_ref().unwrap();
            states.add_block(
                &format!("T = {}", fmt_t(rec.horizon)),
                sol.trajectory.times.iter().enumerate().map(|(k, &t)| {
                    let x = &sol.trajectory.states[k];
                    vec![t, x[0], x[1], x[2], sol.trajectory.controls[k][0]]
                }),
            );
            adjoints.add_block(
                &format!("T = {}", fmt_t(rec.horizon)),
                sol.trajectory.times.iter().enumerate().map(|(k, &t)| {
                    let lam = &sol.adjoint[k];
                    let mut row = vec![t];
                    row.extend(lam.iter().cloned());
                    row
                }),
            );
        }
        output::write_atomic(&out.join("fig_states.dat"), &states.render())?;
        output::write_atomic(&out.join("fig_adjoint.dat"), &adjoints.render())?;
    } else {
        let mut states = PlotBlocks::new("t x1 x2 x3 x4 x5 u (one block per horizon)");
        for rec in &report.records {
            let sol = rec.solution.as_ref().unwrap();
            states.add_block(
                &format!("T = {}", fmt_t(rec.horizon)),
                sol.trajectory.times.iter().enumerate().map(|(k, &t)| {
                    let x = &sol.trajectory.states[k];
                    let mut row = vec![t];
                    row.extend(x.iter().cloned());
                    row.push(sol.trajectory.controls[k][0]);
                    row
                }),
            );
        }
        output::write_atomic(&out.join("fig_states.dat"), &states.render())?;
    }

    // Experiment metadata: control-set choice and degenerate energy
    // directions of the reduced system.
    let mut extras = json!({
        "example": example,
        "horizons": horizons.iter().map(|(t, n)| json!([t, n])).collect::<Vec<_>>(),
        "control_set_defaulted": template.control_set_defaulted,
        "control_set": serde_json::to_value(&template.control_set).unwrap(),
        "subspace": report.subspace,
        "subspace_dim": report.subspace_dim,
    });
    if let SystemSpec::Dae(s) = &template.system {
        let red = decomp::beattie_reduce(s)?;
        let ker_q11 = numerics::nullspace(red.reduced.q(), numerics::RANK_TOL)?;
        extras["reduced_dimension"] = json!(red.n1);
        extras["zero_energy_directions"] = json!(ker_q11.dim());
    }
    Ok((extras, 0))
}

fn dispatch(cli: &Cli) -> Result<(PathBuf, &'static str, Value, i32), Failure> {
    match &cli.command {
        Command::Validate { input, out, tol } => {
            ensure_dir(out)?;
            let (extras, code) = run_validate(input, out, *tol)?;
            Ok((out.clone(), "validate", extras, code))
        }
        Command::AnalyzePencil { input, out, tol } => {
            ensure_dir(out)?;
            let (extras, code) = run_analyze_pencil(input, out, *tol)?;
            Ok((out.clone(), "analyze-pencil", extras, code))
        }
        Command::AnalyzeControl {
            input,
            out,
            tol,
            horizon,
        } => {
            ensure_dir(out)?;
            let (extras, code) = run_analyze_control(input, out, *tol, *horizon)?;
            Ok((out.clone(), "analyze-control", extras, code))
        }
        Command::Reduce { input, out } => {
            ensure_dir(out)?;
            let (extras, code) = run_reduce(input, out)?;
            Ok((out.clone(), "reduce", extras, code))
        }
        Command::Solve {
            input,
            out,
            tol,
            horizon,
            steps,
        } => {
            ensure_dir(out)?;
            let (extras, code) = run_solve(input, out, *tol, *horizon, *steps)?;
            Ok((out.clone(), "solve", extras, code))
        }
        Command::Turnpike {
            input,
            out,
            tol,
            horizon,
            steps,
            eps_grid,
        } => {
            ensure_dir(out)?;
            let (extras, code) = run_turnpike(
                input,
                out,
                *tol,
                horizon.clone(),
                steps.clone(),
                eps_grid.clone(),
            )?;
            Ok((out.clone(), "turnpike", extras, code))
        }
        Command::Reproduce {
            example,
            out,
            horizon,
            steps,
            eps_grid,
        } => {
            ensure_dir(out)?;
            let (extras, code) =
                run_reproduce(example, out, horizon.clone(), steps.clone(), eps_grid.clone())?;
            Ok((out.clone(), "reproduce", extras, code))
        }
    }
}

fn write_meta(out: &Path, command: &str, extras: &Value, started: Instant, error: Option<&str>) {
    let mut meta = json!({
        "tool": "phoc",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "timing_ms": started.elapsed().as_millis() as u64,
        "tolerances": {
            "rank_tol": numerics::RANK_TOL,
            "spectral_tol": numerics::SPECTRAL_TOL,
            "struct_tol": model::STRUCT_TOL,
        },
    });
    if let Some(obj) = meta.as_object_mut() {
        obj.insert("details".into(), extras.clone());
        if let Some(e) = error {
            obj.insert("error".into(), json!(e));
        }
    }
    let _ = write_json(&out.join("meta.json"), &meta);
}

fn out_dir_of(cli: &Cli) -> PathBuf {
    match &cli.command {
        Command::Validate { out, .. }
        | Command::AnalyzePencil { out, .. }
        | Command::AnalyzeControl { out, .. }
        | Command::Reduce { out, .. }
        | Command::Solve { out, .. }
        | Command::Turnpike { out, .. }
        | Command::Reproduce { out, .. } => out.clone(),
    }
}

fn command_name(cli: &Cli) -> &'static str {
    match &cli.command {
        Command::Validate { .. } => "validate",
        Command::AnalyzePencil { .. } => "analyze-pencil",
        Command::AnalyzeControl { .. } => "analyze-control",
        Command::Reduce { .. } => "reduce",
        Command::Solve { .. } => "solve",
        Command::Turnpike { .. } => "turnpike",
        Command::Reproduce { .. } => "reproduce",
    }
}

fn main() {
    let started = Instant::now();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Usage/help output; keep clap's text but normalize exit codes.
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            std::process::exit(if is_help { 0 } else { 1 });
        }
    };
    match dispatch(&cli) {
        Ok((out, command, extras, code)) => {
            write_meta(&out, command, &extras, started, None);
            std::process::exit(code);
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            let out = out_dir_of(&cli);
            if ensure_dir(&out).is_ok() {
                write_meta(&out, command_name(&cli), &json!({}), started, Some(&f.message));
            }
            std::process::exit(f.code);
        }
    }
}
