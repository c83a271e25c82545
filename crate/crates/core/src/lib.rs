//! Discretized sub-/supersolution machinery for the singular quasilinear
//! Neumann system
//!
//! ```text
//! -Δ_{p1} u + |u|^{p1-2} u = u^{alpha1} + v^{beta1}   in Ω
//! -Δ_{p2} v + |v|^{p2-2} v = u^{alpha2} + v^{beta2}   in Ω
//! ∂u/∂η = ∂v/∂η = 0                                  on ∂Ω
//! ```
//!
//! on intervals and rectangles: scalar p-Laplacian solves, eigenpairs and
//! torsion functions, explicit barrier pairs with discrete certificates, the
//! truncated fixed-point iteration and the uniqueness experiment.

mod banded;
pub mod bounds;
pub mod enclosure;
pub mod error;
pub mod exponents;
pub mod field;
pub mod grid;
pub mod plap;
pub mod spectral;

pub use error::{Error, Result};
pub use exponents::{validate_exponents, ExponentSet, IntervalCheck, ValidationReport};
pub use field::ScalarField;
pub use grid::{build_grid, distance_field, DomainKind, Grid, GridSpec};
pub use plap::{
    discrete_energy, nodal_residual, solve_scalar, solve_scalar_from, BoundaryCondition,
    ScalarSolveConfig, ScalarSolveResult,
};
