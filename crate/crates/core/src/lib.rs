//! Qualitative analysis of the Ricci flow of invariant metrics on the full
//! flag manifold SU(3)/T.
//!
//! The crate is organized bottom-up:
//!
//! * [`model`] evaluates the Ricci components, the Ricci flow, its quadratic
//!   polynomial reparametrization and the algebraic verifiers (Einstein
//!   residual, tangency of invariant rays).
//! * [`poly`] holds a small multivariate polynomial type used to describe
//!   polynomial vector fields on R^3.
//! * [`compactify`] implements the Poincare compactification: ball
//!   projection, sphere charts, the compactified field and the search for
//!   singularities at infinity.
//! * [`dynamics`] contains an adaptive Dormand-Prince integrator, event
//!   handling, chart-switching integration on the compactified ball and a
//!   Benettin-style Lyapunov spectrum estimator.
//! * [`experiments`] packages the numerical checks: the octant scan, the
//!   Lyapunov table along the invariant lines, cylinder basins and the
//!   classification of limit metrics.
//! * [`report`], [`plot`] and [`cli`] provide the stable output formats and
//!   the command-line front end.

pub mod cli;
pub mod compactify;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod model;
pub mod plot;
pub mod poly;
pub mod report;

pub use error::{Error, Result};

/// A point or vector of R^3.
pub type Vec3 = [f64; 3];

/// Row-major 3x3 matrix.
pub type Matrix3 = [[f64; 3]; 3];

pub(crate) fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn scale(c: f64, a: &Vec3) -> Vec3 {
    [c * a[0], c * a[1], c * a[2]]
}
