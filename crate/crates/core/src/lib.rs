//! Stationary two-dimensional quantum mechanics in hydrodynamic variables.
//!
//! The wavefunction `psi = a exp(i S / hbar)` can be traded for the real
//! pair `(a, S)`: the amplitude obeys a continuity equation for `a^2` with
//! velocity `v = grad S / m`, and the phase obeys a Hamilton-Jacobi equation
//! carrying the extra "quantum potential" `Q = -(hbar^2/2m) lap(a) / a`.
//! This crate provides the numerical toolkit for working with stationary
//! states in both pictures on 2D grids:
//!
//! * [`grid`], [`field`], [`diffops`], [`potential`] — grids, sampled
//!   fields, second-order differential operators, and the residual of the
//!   time-independent Schrodinger equation;
//! * [`special`] — self-contained Gamma and Bessel-J machinery for real
//!   order;
//! * [`separable`] — separated solutions `Phi(phi) R(r)` in a central
//!   potential: the angular factor with its two periodicity checks, and a
//!   shooting/bisection radial eigensolver;
//! * [`madelung`] — the decomposition `psi -> (a, S, v, Q)`, its inverse,
//!   residuals of the stationary hydrodynamic equations, and a probe for
//!   the kinetic/quantum-potential cancellation at nodal points;
//! * [`topology`] — nodal-point (vortex) detection, loop circulation, and
//!   the winding-number sum rule;
//! * [`spurious`] — candidate states `exp(i nu phi) J_nu(k r)` for
//!   arbitrary real `nu`, their branch-cut discontinuity, and a plane-wave
//!   expansion fit that separates physical from spurious values of `nu`.
//!
//! The guide in `book/` walks through the same material chapter by chapter;
//! its code snippets compile and run as doc-tests of [`guide`].

pub mod constants;
pub mod diffops;
pub mod error;
pub mod field;
pub mod grid;
pub mod guide;
pub mod madelung;
pub mod potential;
pub mod separable;
pub mod special;
pub mod spurious;
pub mod topology;

pub use constants::PhysicalConstants;
pub use error::{Error, Result};
pub use field::{build_field, RealField2D, ScalarField2D, VectorField2D};
pub use grid::{CartesianGrid, Grid2D, PolarGrid};
pub use potential::{Potential, SingularityClass};
