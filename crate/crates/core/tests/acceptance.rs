//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

mod common;

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use phoc_core::control::{
    adjoint_stat_inputs_ok, controllability_gramian, is_controllable, is_r_controllable,
    optimal_steady_states,
};
use phoc_core::decomp::{beattie_reduce, lift_solution};
use phoc_core::model::{simulate_ode, ControlSet, SystemSpec};
use phoc_core::numerics::{self, min_positive_eigenvalue, spectral_norm};
use phoc_core::ocp::{self, energy_audit_ode, solve_qp, QpProblem};
use phoc_core::pencil::{
    is_dh_matrix, is_dh_pencil, pencil_index, quasi_weierstrass, reconstruction_residual,
    solve_dae_ivp, wong_sequences,
};
use phoc_core::presets;
use phoc_core::turnpike::{self, adjoint_turnpike_stat, multi_horizon_report, DEFAULT_EPS_GRID};

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {id} ({name}): {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

#[test]
fn criterion_1_energy_balance() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let n = 2 + (trial % 5); // up to 6
        let m = 1 + (trial % 3); // up to 3
        let sys = random_ph_ode(&mut rng, n, m);
        let controls = random_controls(&mut rng, 400, m, 1.0);
        let x0 = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let traj = simulate_ode(&sys, &x0, &controls, 2.0);
        let audit = energy_audit_ode(&sys, &traj);
        let rel = audit.residual / (1.0 + audit.supplied.abs());
        worst = worst.max(rel);
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-6 && elapsed.as_secs_f64() <= 30.0;
    report(
        1,
        "energy balance",
        pass,
        &format!("worst scaled residual {worst:.3e} over 100 systems in {elapsed:.2?}"),
    );
}

#[test]
fn criterion_2_dh_matrix_oracle() {
    let start = Instant::now();
    let mut worst_witness: f64 = 0.0;
    let mut checked = 0usize;
    for a11 in -2..=2i64 {
        for a12 in -2..=2i64 {
            for a21 in -2..=2i64 {
                for a22 in -2..=2i64 {
                    let a = DMatrix::from_row_slice(
                        2,
                        2,
                        &[a11 as f64, a12 as f64, a21 as f64, a22 as f64],
                    );
                    let cert = is_dh_matrix(&a).unwrap();
                    // Closed-form 2x2 oracle: both eigenvalue real parts are
                    // non-positive iff tr <= 0 and det >= 0; conditions (ii)
                    // and (iii) are automatic in dimension two.
                    let tr = (a11 + a22) as f64;
                    let det = (a11 * a22 - a12 * a21) as f64;
                    let oracle = tr <= 0.0 && det >= 0.0;
                    assert_eq!(
                        cert.is_dh, oracle,
                        "verdict mismatch for A = [[{a11},{a12}],[{a21},{a22}]]"
                    );
                    if cert.is_dh {
                        let w = cert.witness.expect("positive verdicts carry a witness");
                        worst_witness = worst_witness.max(w.reconstruction_residual);
                    }
                    checked += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = checked == 625 && worst_witness <= 1e-7 && elapsed.as_secs_f64() <= 10.0;
    report(
        2,
        "dH-matrix oracle equivalence",
        pass,
        &format!("625 verdicts agree; worst witness residual {worst_witness:.3e} in {elapsed:.2?}"),
    );
}

#[test]
fn criterion_3_quasi_weierstrass_reconstruction() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let index = trial % 4;
        let n = (3 + trial % 6).max(index + 1); // up to 8
        let (e, a) = random_pencil_with_index(&mut rng, n, index);
        let recovered = pencil_index(&e, &a).unwrap();
        assert_eq!(recovered, index, "index mismatch on trial {trial}");
        let qw = quasi_weierstrass(&e, &a).unwrap();
        let resid = reconstruction_residual(&qw, &e, &a) / (a.norm() + e.norm()).max(1.0);
        worst = worst.max(resid);
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-8 && elapsed.as_secs_f64() <= 10.0;
    report(
        3,
        "quasi-Weierstrass reconstruction",
        pass,
        &format!("50 pencils, indices recovered exactly, worst residual {worst:.3e} in {elapsed:.2?}"),
    );
}

#[test]
fn criterion_4_beattie_round_trip() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst_block: f64 = 0.0;
    let mut worst_identity: f64 = 0.0;
    let mut worst_sim: f64 = 0.0;
    for trial in 0..30 {
        let n = 3 + trial % 6; // up to 8
        let n2 = 1 + trial % (n - 1).min(3);
        let m = 1 + trial % 2;
        let sys = random_index1_dae(&mut rng, n, n2, m);
        let red = beattie_reduce(&sys).unwrap();

        // Block invariants, re-verified outside the constructor.
        let n1 = red.n1;
        let uev = red.u.transpose() * sys.e() * &red.v;
        let mut eye = DMatrix::zeros(n, n);
        for i in 0..n1 {
            eye[(i, i)] = 1.0;
        }
        let scale = sys.e().norm().max(1.0);
        worst_block = worst_block.max((uev - eye).norm() / scale);
        worst_block = worst_block.max((&red.r12 - &red.j12).norm() / sys.j().norm().max(1.0));
        let jt = red.u.transpose() * sys.j() * &red.u;
        worst_block = worst_block.max((&jt + jt.transpose()).norm() / jt.norm().max(1.0));

        // Dissipation identity on 100 random points.
        let qrq = sys.qrq();
        for _ in 0..100 {
            let z1 = DVector::from_fn(n1, |_, _| rng.gen_range(-2.0..2.0));
            let u = DVector::from_fn(m, |_, _| rng.gen_range(-2.0..2.0));
            let x = red.lift_state(&z1, &u);
            let lhs = x.dot(&(&qrq * &x));
            let rhs = red.reduced.w_quad(&z1, &u);
            let s = 1.0 + lhs.abs().max(rhs.abs());
            worst_identity = worst_identity.max((lhs - rhs).abs() / s);
        }

        // Reduce -> simulate -> lift against the direct DAE solve.
        let controls = random_controls(&mut rng, 200, m, 1.0);
        let x_free = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let w0 = sys.e() * &x_free;
        let direct = solve_dae_ivp(&sys, &controls, &w0, 2.0).unwrap();
        let z1_0 = red.reduce_initial(&w0).unwrap();
        let reduced_traj = simulate_ode(&red.reduced, &z1_0, &controls, 2.0);
        let lifted = lift_solution(&red, &sys, &reduced_traj).unwrap();
        for (a, b) in direct.states.iter().zip(&lifted.states) {
            worst_sim = worst_sim.max((a - b).norm());
        }
    }
    let elapsed = start.elapsed();
    let pass = worst_block <= 1e-9
        && worst_identity <= 1e-8
        && worst_sim <= 1e-6
        && elapsed.as_secs_f64() <= 60.0;
    report(
        4,
        "reduction round trip",
        pass,
        &format!(
            "30 systems: block residual {worst_block:.3e}, identity residual {worst_identity:.3e}, \
             round-trip error {worst_sim:.3e} in {elapsed:.2?}"
        ),
    );
}

#[test]
fn criterion_5_msd_reproduction() {
    let start = Instant::now();
    let template = presets::msd_ocp(10.0, 100);
    let report_ms = multi_horizon_report(
        &template,
        &presets::MSD_HORIZONS,
        &DEFAULT_EPS_GRID,
        2.0,
    )
    .unwrap();
    assert!(report_ms.skipped.is_empty(), "{:?}", report_ms.skipped);
    let records = &report_ms.records;
    assert_eq!(records.len(), 3);
    let rec20 = &records[2];
    assert_eq!(rec20.horizon, 20.0);

    // (a) terminal point reached.
    let term_ok = rec20.terminal_distance <= 1e-6;
    // (b) near the kernel on at least 60% of the grid.
    let near_ok = rec20.fraction_near >= 0.6;
    // (c) fraction non-decreasing over the horizons.
    let mono_ok = records.windows(2).all(|w| w[1].fraction_near >= w[0].fraction_near - 1e-12);
    // (d) integral statistic below the theoretical bound.
    let bound_ok = rec20.bound_holds == Some(true);
    // (e) mid-window adjoint energy below a fifth of the total.
    let sol = rec20.solution.as_ref().unwrap();
    let h = rec20.horizon / rec20.steps as f64;
    let (mut mid, mut total) = (0.0f64, 0.0f64);
    for (k, lam) in sol.adjoint.iter().enumerate().take(rec20.steps) {
        let t = h * k as f64;
        let e = h * lam.norm_squared();
        total += e;
        if t >= 0.3 * rec20.horizon && t < 0.7 * rec20.horizon {
            mid += e;
        }
    }
    let adjoint_ok = mid <= 0.2 * total;

    let elapsed = start.elapsed();
    let pass = term_ok && near_ok && mono_ok && bound_ok && adjoint_ok
        && elapsed.as_secs_f64() <= 120.0;
    report(
        5,
        "mass-spring-damper reproduction",
        pass,
        &format!(
            "terminal {:.2e}; near-fraction {:.3} (>=0.6), monotone {:?}; integral {:.4} <= F {:.1}; \
             adjoint mid/total {:.3} (<=0.2); {elapsed:.2?}",
            rec20.terminal_distance,
            rec20.fraction_near,
            records.iter().map(|r| r.fraction_near).collect::<Vec<_>>(),
            rec20.integral_stat,
            rec20.f_effective.unwrap_or(f64::NAN),
            mid / total.max(1e-300),
        ),
    );
}

#[test]
fn criterion_6_robot_reproduction() {
    let start = Instant::now();
    let sys = presets::robot_system();
    let a = sys.a();

    // Pencil certification: regular, dissipative Hamiltonian, index one.
    let reg = phoc_core::pencil::is_regular(sys.e(), &a).unwrap();
    let index = pencil_index(sys.e(), &a).unwrap();
    let dh = is_dh_pencil(sys.e(), &a).unwrap();
    let cert_ok = reg.regular && index == 1 && dh.is_dh;

    let template = presets::robot_ocp(15.0, 3000);
    let rep = multi_horizon_report(&template, &[(15.0, 3000)], &DEFAULT_EPS_GRID, 2.0).unwrap();
    assert!(rep.skipped.is_empty(), "{:?}", rep.skipped);
    let rec = &rep.records[0];
    let sol = rec.solution.as_ref().unwrap();

    // Terminal datum E x(T) = w_T.
    let w_t = DVector::from_row_slice(&[1., 1., 0., 2., 0.]);
    let ex_t = sys.e() * sol.trajectory.states.last().unwrap();
    let term_ok = (ex_t - &w_t).norm() <= 1e-6;

    // Middle half of the horizon: sqrt(x4^2 + x5^2) collapses.
    let prof: Vec<f64> = sol
        .trajectory
        .states
        .iter()
        .map(|x| (x[3] * x[3] + x[4] * x[4]).sqrt())
        .collect();
    let q = prof.len() / 4;
    let mid_max = prof[q..3 * q].iter().cloned().fold(0.0f64, f64::max);
    let full_max = prof.iter().cloned().fold(0.0f64, f64::max);
    let mid_ok = mid_max <= 0.05 * full_max;

    // Integral bound with the smallest positive eigenvalue of Q'RQ.
    let bound_ok = rec.bound_holds == Some(true);
    let lam_qrq = min_positive_eigenvalue(&sys.qrq()).unwrap();
    let red = beattie_reduce(&sys).unwrap();
    let f_expect = spectral_norm(red.reduced.w()) / lam_qrq * rec.bound.as_ref().unwrap().f;
    let f_consistent = (rec.f_effective.unwrap() - f_expect).abs() <= 1e-9 * f_expect.abs();

    let elapsed = start.elapsed();
    let pass = cert_ok && term_ok && mid_ok && bound_ok && f_consistent
        && elapsed.as_secs_f64() <= 300.0;
    report(
        6,
        "robot reproduction",
        pass,
        &format!(
            "regular {} index {index} dH {}; terminal {:.2e}; mid/full {:.4} (<=0.05); \
             integral {:.4} <= F {:.1}; {elapsed:.2?}",
            reg.regular,
            dh.is_dh,
            (sys.e() * sol.trajectory.states.last().unwrap() - &w_t).norm(),
            mid_max / full_max.max(1e-300),
            rec.integral_stat,
            rec.f_effective.unwrap_or(f64::NAN),
        ),
    );
}

#[test]
fn criterion_7_steady_state_characterization() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut worst_kernel: f64 = 0.0;
    let mut worst_qp: f64 = 0.0;
    for trial in 0..50 {
        let n = 2 + trial % 5;
        let m = 1 + trial % 2;
        let sys = random_ph_ode(&mut rng, n, m);
        let u_set = ControlSet::symmetric_box(m, 5.0);
        let space = optimal_steady_states(&sys, &u_set).unwrap();
        // Every basis vector satisfies both defining conditions.
        let a = sys.a();
        let bt = sys.input_matrix();
        for c in 0..space.basis.dim() {
            let v = space.basis.matrix().column(c).into_owned();
            let x = v.rows(0, n).into_owned();
            let u = v.rows(n, m).into_owned();
            worst_kernel = worst_kernel.max((&a * &x + &bt * &u).norm());
            worst_kernel = worst_kernel.max(sys.w_apply(&x, &u).norm());
        }
        // Direct QP of the steady-state program: minimize the supply rate
        // over controlled equilibria; the optimal value is zero and the
        // representative attains it.
        let mut qp = QpProblem::unconstrained(n + m);
        for i in 0..n + m {
            for j in 0..n + m {
                let v = 2.0 * sys.w()[(i, j)];
                if v != 0.0 {
                    qp.hess.push((i, j, v));
                }
            }
        }
        for row in 0..n {
            let mut entries = Vec::new();
            for col in 0..n {
                if a[(row, col)] != 0.0 {
                    entries.push((col, a[(row, col)]));
                }
            }
            for col in 0..m {
                if bt[(row, col)] != 0.0 {
                    entries.push((n + col, bt[(row, col)]));
                }
            }
            qp.eq_rows.push(entries);
            qp.eq_rhs.push(0.0);
        }
        for v in 0..m {
            qp.lower[n + v] = -5.0;
            qp.upper[n + v] = 5.0;
        }
        let qp_sol = solve_qp(&qp, 1e-8).unwrap();
        worst_qp = worst_qp.max(qp_sol.objective.abs());
        let rep = &space.representative;
        worst_qp = worst_qp.max(0.5 * rep.u.dot(&rep.y).abs());
    }
    let elapsed = start.elapsed();
    let pass = worst_kernel <= 1e-9 && worst_qp <= 1e-10;
    report(
        7,
        "steady-state characterization",
        pass,
        &format!(
            "50 systems: worst kernel residual {worst_kernel:.3e}, worst steady program value \
             {worst_qp:.3e} in {elapsed:.2?}"
        ),
    );
}

#[test]
fn criterion_8_adjoint_bound() {
    let start = Instant::now();
    let spec = presets::msd_ocp(20.0, 200);
    let sol = ocp::solve_ocp(&spec).unwrap();
    let sys = presets::msd_system();
    let stat = adjoint_turnpike_stat(
        &sys,
        &sol.trajectory,
        &sol.adjoint,
        &spec.control_set,
        2.0,
        sol.lambda0,
    )
    .unwrap();
    // Independently recompute the displayed constant.
    let gram = controllability_gramian(&sys.a(), &sys.input_matrix(), 2.0).unwrap();
    let alpha_consistent = (stat.alpha_tc - gram.alpha).abs() <= 1e-9 * gram.alpha;
    let elapsed = start.elapsed();
    let pass = stat.interior_ok && stat.holds && alpha_consistent;
    report(
        8,
        "adjoint energy bound",
        pass,
        &format!(
            "lhs {:.4e} <= rhs {:.4e}; alpha_tc {:.4e}; C(tc) {:.4e}; interior {}; {elapsed:.2?}",
            stat.lhs, stat.rhs, stat.alpha_tc, stat.c_tc, stat.interior_ok
        ),
    );
}

#[test]
fn criterion_9_r_controllability_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut agree = 0usize;
    let mut controllable_count = 0usize;
    for trial in 0..50 {
        let n = 3 + trial % 5;
        let n2 = 1 + trial % 2;
        let m = 1 + trial % 2;
        let sys = random_index1_dae(&mut rng, n, n2.min(n - 1), m);
        let dae_verdict = is_r_controllable(&sys).unwrap();
        let red = beattie_reduce(&sys).unwrap();
        let ode_verdict =
            is_controllable(&red.reduced.a(), &red.reduced.input_matrix()).unwrap();
        assert_eq!(
            dae_verdict, ode_verdict,
            "trial {trial}: R-controllability {dae_verdict} vs reduced {ode_verdict}"
        );
        agree += 1;
        if dae_verdict {
            controllable_count += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = agree == 50;
    report(
        9,
        "R-controllability equivalence",
        pass,
        &format!("50/50 agree ({controllable_count} controllable) in {elapsed:.2?}"),
    );
}

// Keep the helper import alive for documentation purposes: the adjoint stat
// checks its own preconditions.
#[allow(dead_code)]
fn _anchor() {
    let _ = adjoint_stat_inputs_ok;
    let _ = turnpike::integral_turnpike_stat;
    let _ = numerics::RANK_TOL;
    let _: Option<SystemSpec> = None;
}
