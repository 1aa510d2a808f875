//! Linear dissipative port-Hamiltonian descriptor systems: structural
//! certification, index analysis, structure-preserving DAE-to-ODE reduction,
//! simulation, minimal-energy-supply optimal control, and subspace turnpike
//! diagnostics.
//!
//! The crate is organised in layers:
//!
//! * [`numerics`] — dense linear-algebra kernels (rank/nullspace, real Schur
//!   with reordering, matrix exponential, Sylvester/Lyapunov, banded LU),
//!   no domain knowledge;
//! * [`model`] — system data types (`PhDaeSystem`, `PhOdeSystem`), control and
//!   target sets, problem statements, structural validation, JSON I/O;
//! * [`pencil`] — Wong sequences, quasi-Weierstrass form, regularity and
//!   index tests, dissipative-Hamiltonian certification, index-1 DAE solves;
//! * [`decomp`] — structure-preserving reduction of a regular index-1 pH-DAE
//!   to a pH-ODE with feed-through, state recovery and lifting, spectral
//!   conservative/dissipative splitting;
//! * [`control`] — Kalman subspace, R-controllability, optimal steady states,
//!   controllability Gramians, growth bounds, feasibility and minimal time;
//! * [`ocp`] — direct transcription to a convex QP, sparse active-set QP
//!   solver, adjoint recovery, energy-balance audits;
//! * [`turnpike`] — distance profiles, integral/measure turnpike statistics,
//!   theoretical bound constants, multi-horizon reports.

pub mod control;
pub mod decomp;
pub mod model;
pub mod numerics;
pub mod ocp;
pub mod pencil;
pub mod presets;
pub mod turnpike;
