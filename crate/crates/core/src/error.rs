use thiserror::Error;

use crate::enclosure::SystemSolution;
use crate::field::ScalarField;

/// Errors produced by the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("field shape mismatch: {0}")]
    Shape(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("recipe mismatch: {0}")]
    RecipeMismatch(String),

    /// The scalar Newton solve stopped before reaching its residual tolerance.
    /// `best` is the iterate with the smallest residual seen.
    #[error("scalar solve stopped after {iterations} iterations with residual {residual:.3e}")]
    IterationLimit {
        iterations: usize,
        residual: f64,
        best: Box<ScalarField>,
    },

    #[error("certificate failure: {0}")]
    Certificate(String),

    /// A nonpositive base was raised to a negative power. Signals a barrier
    /// that fails to keep the iterates positive.
    #[error("singular right-hand side at node {node} {coords:?}: base {base:e} with exponent {exponent}")]
    Singularity {
        node: usize,
        coords: Vec<f64>,
        base: f64,
        exponent: f64,
    },

    /// Outer fixed-point iteration hit its limit; carries the last iterate.
    #[error("fixed-point iteration not converged after {} outer iterations (change {:.3e})", .0.outer_iterations, .0.final_change)]
    NotConverged(Box<SystemSolution>),

    #[error("enclosure violated at node {node}: {detail}")]
    Enclosure { node: usize, detail: String },

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
