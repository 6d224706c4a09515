//! Numerical toolkit for many-particle Hardy inequalities.
//!
//! The crate evaluates the closed-form constants bounding
//! `∫|∇u|² ≥ C ∫|u|² Σ_{i<j} 1/r_ij²` on `R^{dN}`, checks the geometric
//! and vector-field identities behind them, estimates Rayleigh quotients of
//! explicit trial functions by Monte Carlo, and searches for good atomic
//! measures for the Menger–Melnikov curvature ratio `K`.
//!
//! Module map:
//!
//! * [`geometry`]: pair and circumradius kernels on point configurations.
//! * [`fields`]: explicit vector fields with closed-form divergences.
//! * [`bounds`]: every closed-form constant, as [`bounds::BoundReport`]s.
//! * [`trials`]: trial-function families with gradients and samplers.
//! * [`estimate`]: Monte Carlo, Metropolis and quadrature primitives.
//! * [`functionals`]: quotient evaluation and inequality checks.
//! * [`optimize`]: curvature-ratio maximization, sharpness scans, quotient search.
//! * [`report`] and [`verify`]: run reports and the verification suites used by the CLI.

pub mod bounds;
pub mod error;
pub mod estimate;
pub mod fields;
pub mod functionals;
pub mod geometry;
pub mod optimize;
pub mod report;
pub mod trials;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::Configuration;
