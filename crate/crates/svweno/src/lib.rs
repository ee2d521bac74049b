//! High-order (2nd–5th) spectral volume solver for 1D/2D hyperbolic
//! conservation laws with a control-volume-wise simplified WENO limiter.
//!
//! The computational domain is partitioned into spectral volumes (SVs), each
//! subdivided into control volumes (CVs) at Gauss-Lobatto points. The solver
//! evolves CV averages: a degree-(k-1) polynomial is reconstructed per SV
//! from its CV averages, a TVB minmod detector flags oscillatory CVs, and
//! flagged CVs get a new polynomial built as a nonlinear blend of one
//! least-squares high-order polynomial and a few linear candidates. Fluxes
//! are continuous at untouched interior CV faces and Lax-Friedrichs at SV
//! boundaries and around limited CVs. Time stepping is explicit Runge-Kutta
//! of matching order.
//!
//! Entry points:
//! - [`harness::preset`] / [`harness::run`] for the benchmark problems
//!   (shock tubes, blast wave, 2D Riemann problems, double Mach reflection),
//! - [`solver::Solver1D`] / [`solver::Solver2D`] for custom problems,
//! - `svweno run|convergence|presets` on the command line.

pub mod error;
pub mod harness;
pub mod integrator;
pub mod limiter;
pub mod mesh;
pub mod physics;
pub mod reconstruction;
pub mod solver;

pub use error::{Result, SvError};
