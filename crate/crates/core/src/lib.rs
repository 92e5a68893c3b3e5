//! Limiting-absorption studies for second-order divergence-form elliptic
//! operators in the plane.
//!
//! The crate builds the regularized problems `(-div(a grad) + sigma) u = f`
//! on a truncated square, drives the absorption `eps` and the wave number `k`
//! toward zero, and checks the resulting fields against exact free-space
//! kernels, boundary representation formulas and weighted decay norms.
//!
//! Module map:
//!
//! - [`special_functions`]: Bessel/Hankel functions and the free-space kernels.
//! - [`problem_model`]: coefficient fields, sources, spectral shifts, catalog.
//! - [`fd_solver`]: flux-conservative discretization, sparse solver, oracle.
//! - [`exterior_representation`]: traces on circles, fluxes, exterior evaluation.
//! - [`analysis`]: weighted norms, decay fits, convergence ladders.
//! - [`harness`]: end-to-end studies, configuration and reports.

pub mod analysis;
pub mod error;
pub mod exterior_representation;
pub mod fd_solver;
pub mod harness;
pub mod problem_model;
pub mod special_functions;

pub use error::{Error, Result};

/// A point of the plane.
pub type Point2 = [f64; 2];

/// Euclidean norm of a point.
#[inline]
pub fn norm2(p: Point2) -> f64 {
    p[0].hypot(p[1])
}
