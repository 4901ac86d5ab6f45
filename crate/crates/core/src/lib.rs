//! Numerical toolkit for axisymmetric perturbations of Poiseuille flow in a
//! circular pipe with Navier slip boundary conditions.
//!
//! The perturbation velocity is decomposed into Fourier modes in the axial
//! direction. For each axial wavenumber the swirl-free part is governed by a
//! fourth-order stream-function equation and the swirl component by a
//! second-order advection-diffusion equation, both posed on the radius
//! `r in (0, 1]` with regularity conditions at the axis and slip conditions at
//! the wall. This crate provides:
//!
//! - a Chebyshev collocation discretization of the radial direction
//!   ([`radial`]), including quadrature rules for the cylindrical measures
//!   `r dr` and `dr / r`;
//! - the laminar base profile and its slip-dependent shape ([`baseflow`]);
//! - direct solvers for the per-mode stream-function and swirl problems
//!   ([`stream`], [`swirl`]) with energy-balance diagnostics;
//! - asymptotic regime classification and boundary-layer profiles for small
//!   and large slip ([`regime`]);
//! - sweep, scaling-fit, and inequality-verification drivers ([`harness`]);
//! - a Picard iteration for the full nonlinear coupled system on a periodic
//!   pipe section ([`nonlinear`]).
//!
//! All solvers work on shared immutable operator tables and are safe to call
//! from multiple threads.

pub mod baseflow;
pub mod error;
pub mod forcing;
pub mod harness;
pub mod nonlinear;
pub mod radial;
pub mod regime;
pub mod stream;
pub mod swirl;

pub use baseflow::{poiseuille_profile, FlowParams, PoiseuilleProfile};
pub use error::Error;
pub use forcing::ForcingFamily;
pub use harness::{
    bound_report, fit_scaling, gate_resolution, inequality_suite, run_linear_sweep,
    run_swirl_sweep, BoundReport, LemmaReport, SlopeFit, SweepOptions, SweepOutcome, SweepRecord,
    SwirlSweepOutcome, SwirlSweepRecord,
};
pub use nonlinear::{
    apply_t, momentum_residual, nonlinear_terms, picard_iterate, picard_iterate_from, AxisymField,
    ForcingModes, IterationTrace, PicardConfig, Termination,
};
pub use radial::{build_radial_operators, resolution_for_beta, RadialOperators};
pub use regime::{beta_theta, classify, RegimeLabel, RegimeThresholds};
pub use stream::{solve_mode, ModeForcing, StreamSolution};
pub use swirl::{nullspace_probe, solve_swirl_mode, SwirlSolution};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;

/// Convenience result alias.
pub type Result<T> = std::result::Result<T, Error>;
