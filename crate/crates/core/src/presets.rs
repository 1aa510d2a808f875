//! Built-in example systems used by the reproduction command and the test
//! suites: a modified mass-spring-damper chain (ODE form) and the force
//! control of a robot end-effector in vertical translation (descriptor form).

use nalgebra::{DMatrix, DVector};

use crate::model::{
    ControlSet, OcpSpec, PhDaeSystem, PhOdeSystem, SolverTolerances, SystemSpec, TargetSet,
};

/// Mass-spring-damper chain with homogeneous damping on the first two
/// coordinates: J couples positions and momentum, R = [[1,1,0],[1,1,0],[0,0,0]],
/// Q = I, single force input on the first coordinate.
pub fn msd_system() -> PhOdeSystem {
    let j = DMatrix::from_row_slice(3, 3, &[0., 0., 1., 0., 0., -1., -1., 1., 0.]);
    let r = DMatrix::from_row_slice(3, 3, &[1., 1., 0., 1., 1., 0., 0., 0., 0.]);
    let q = DMatrix::identity(3, 3);
    let b = DMatrix::from_column_slice(3, 1, &[1., 0., 0.]);
    let p = DMatrix::zeros(3, 1);
    let d = DMatrix::zeros(1, 1);
    PhOdeSystem::validate(j, r, q, b, p, d).expect("mass-spring-damper system is valid")
}

/// Horizon/grid pairs of the bundled mass-spring-damper experiment.
pub const MSD_HORIZONS: [(f64, usize); 3] = [(10.0, 100), (15.0, 150), (20.0, 200)];

/// The minimal-energy steering problem for [`msd_system`]:
/// x0 = (1,1,1) to the point (-1.2,-0.7,-1).
pub fn msd_ocp(horizon: f64, steps: usize) -> OcpSpec {
    let sys = msd_system();
    let m = sys.m();
    OcpSpec {
        system: SystemSpec::Ode(sys),
        horizon,
        steps,
        initial: DVector::from_row_slice(&[1., 1., 1.]),
        target: TargetSet::Point(DVector::from_row_slice(&[-1.2, -0.7, -1.0])),
        control_set: ControlSet::symmetric_box(m, 10.0),
        tolerances: SolverTolerances::default(),
        control_set_defaulted: true,
    }
}

/// Robot parameters: masses, stiffness and damping coefficients.
/// `k3` is infinite (rigid coupling), entering only through `1/k3 = 0`.
pub const ROBOT_MASS_A: f64 = 1.1;
pub const ROBOT_MASS_B: f64 = 0.1;
pub const ROBOT_STIFFNESS: [f64; 2] = [0.0, 5.0];
pub const ROBOT_DAMPING: [f64; 3] = [10.0, 10.0, 17.0];

fn robot_matrices() -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let (c1, c2, c3) = (ROBOT_DAMPING[0], ROBOT_DAMPING[1], ROBOT_DAMPING[2]);
    let mut r = DMatrix::zeros(5, 5);
    r[(3, 3)] = c1 + c2;
    r[(3, 4)] = -c2;
    r[(4, 3)] = -c2;
    r[(4, 4)] = c2 + c3;
    let gamma = DMatrix::from_row_slice(3, 2, &[1., 0., -1., 1., 0., -1.]);
    let mut j = DMatrix::zeros(5, 5);
    j.view_mut((0, 3), (3, 2)).copy_from(&gamma);
    j.view_mut((3, 0), (2, 3)).copy_from(&(-gamma.transpose()));
    let q = DMatrix::from_diagonal(&nalgebra::dvector![
        ROBOT_STIFFNESS[0],
        ROBOT_STIFFNESS[1],
        1.,
        1.,
        1.
    ]);
    let b = DMatrix::from_column_slice(5, 1, &[0., 0., 0., 1., 0.]);
    (j, r, q, b)
}

/// Robot descriptor system in the index-one realization: the rigid coupling
/// (`1/k3 = 0`) pins mass B, so both the compliance slot of spring 3 and the
/// momentum slot of the pinned mass carry zeros in `E`. States are
/// (elongation 1, elongation 2, coupling force, velocity A, velocity B);
/// the two algebraic rows determine the coupling force and pin velocity B.
pub fn robot_system() -> PhDaeSystem {
    let (j, r, q, b) = robot_matrices();
    let e = DMatrix::from_diagonal(&nalgebra::dvector![1., 1., 0., ROBOT_MASS_A, 0.]);
    PhDaeSystem::validate(e, j, r, q, b).expect("robot system is valid")
}

/// Variant of [`robot_system`] that keeps the momentum coordinate of the
/// pinned mass (`E_55 = m_B`). Structurally valid, but its pencil has
/// differentiation index two: the third row constrains the differential
/// variable `x5` instead of an algebraic one. Kept for pencil analysis;
/// the reduction and OCP pipeline refuse it.
pub fn robot_system_full_momentum() -> PhDaeSystem {
    let (j, r, q, b) = robot_matrices();
    let e = DMatrix::from_diagonal(&nalgebra::dvector![1., 1., 0., ROBOT_MASS_A, ROBOT_MASS_B]);
    PhDaeSystem::validate(e, j, r, q, b).expect("robot variant is valid")
}

/// Horizon/grid pairs of the bundled robot experiment.
pub const ROBOT_HORIZONS: [(f64, usize); 3] = [(5.0, 1000), (10.0, 2000), (15.0, 3000)];

/// The minimal-energy steering problem for [`robot_system`]:
/// w0 = (1,1,0,1,0) to the point (1,1,0,2,0) in `im E`.
///
/// The admissible box must exceed the terminal thrust `~ (c1+c2) vA(T)`
/// against the heavy damping; with a +-10 box the target velocity is not
/// reachable (the sustainable velocity at the target elongation is 0.75).
/// The default is +-100, wide enough to stay inactive.
pub fn robot_ocp(horizon: f64, steps: usize) -> OcpSpec {
    let sys = robot_system();
    let m = sys.m();
    OcpSpec {
        system: SystemSpec::Dae(sys),
        horizon,
        steps,
        initial: DVector::from_row_slice(&[1., 1., 0., 1., 0.]),
        target: TargetSet::Point(DVector::from_row_slice(&[1., 1., 0., 2., 0.])),
        control_set: ControlSet::symmetric_box(m, 100.0),
        tolerances: SolverTolerances::default(),
        control_set_defaulted: true,
    }
}
