use thiserror::Error;

/// Failure classes raised by the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("x = {x} outside tabulated range [{min}, {max}]")]
    Range { x: f64, min: f64, max: f64 },

    #[error("quantum number {n} is not bound (bound-state count {count})")]
    Unbound { n: usize, count: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{0} not supported for tabulated potentials")]
    Unsupported(&'static str),

    #[error("Riccati blow-up near x = {x} (|s| = {value:e})")]
    Stiffness { x: f64, value: f64 },

    #[error("step doubling did not converge (gap {gap:e} at {substeps} substeps per cell)")]
    Unresolved { gap: f64, substeps: usize },

    #[error("family member degenerates: {0}")]
    FamilyDegeneracy(String),

    #[error("energy is not an eigenvalue: {side} derivative mismatch {defect:e}")]
    NotEigenvalue { side: &'static str, defect: f64 },

    #[error("step near x = {x} straddles more than one pole; refine the grid")]
    Refinement { x: f64 },

    #[error("node estimate {estimate} is {cells:.1} cells from the nearest sign change")]
    BadNodeEstimate { estimate: f64, cells: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
