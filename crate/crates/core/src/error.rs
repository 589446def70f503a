use thiserror::Error;

/// Errors raised by the linear-algebra kernel and the EP analyses built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {detail}")]
    Shape { op: &'static str, detail: String },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("numerical kernel has dimension {found}, expected {expected}")]
    Degenerate { expected: usize, found: usize },

    #[error(
        "linear system is inconsistent: residual {residual:.3e} exceeds allowance {allowance:.3e}"
    )]
    NoSolution { residual: f64, allowance: f64 },

    #[error("{op} did not converge within {iterations} iterations")]
    NoConvergence { op: &'static str, iterations: usize },

    #[error(
        "matrix is not at an exceptional point of full order (order {order:?}, dimension {dim})"
    )]
    NotFullOrder { order: Option<usize>, dim: usize },

    #[error("E coincides with the EP eigenvalue; the Green's function has a pole there")]
    Pole,

    #[error("subsystems have different EP eigenvalues: {a} vs {b}")]
    IncompatibleSubsystems { a: String, b: String },

    #[error(
        "degenerate coupling: genericity product vanishes (norm {c_norm:.3e} <= {threshold:.3e}); \
         composite order is {achieved_order:?} instead of {full_order}"
    )]
    DegenerateCoupling {
        c_norm: f64,
        threshold: f64,
        achieved_order: Option<usize>,
        full_order: usize,
    },

    #[error("Jordan chain check failed: {0}")]
    Structure(String),

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::NonFinite(_) => 2,
            Error::Shape { .. }
            | Error::Parameter(_)
            | Error::NotFullOrder { .. }
            | Error::Pole
            | Error::IncompatibleSubsystems { .. }
            | Error::DegenerateCoupling { .. }
            | Error::Fit(_) => 3,
            Error::Degenerate { .. }
            | Error::NoSolution { .. }
            | Error::NoConvergence { .. }
            | Error::Structure(_)
            | Error::Consistency(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
