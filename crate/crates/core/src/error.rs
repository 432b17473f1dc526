use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// Exact integer arithmetic would exceed the configured capacity.
    #[error("arithmetic capacity exceeded: {0}")]
    ArithmeticCapacity(String),

    #[error("quadrature did not reach tolerance {tolerance:e}: best estimate {estimate} with error bound {error_bound:e}")]
    Quadrature {
        estimate: f64,
        error_bound: f64,
        tolerance: f64,
    },

    /// No cubic root could be identified as the Stieltjes transform.
    #[error("branch selection failed at z = {z}: candidate roots {candidates:?}")]
    BranchSelection {
        z: Complex64,
        candidates: [Complex64; 3],
    },

    #[error("kernel denominator 1 - 3 s^2 = {denominator:e} is too close to zero at z = {z}")]
    NearPole { z: Complex64, denominator: f64 },

    #[error("singular value decomposition did not converge (frobenius norm {frobenius_norm}, max abs entry {max_abs_entry})")]
    Decomposition {
        frobenius_norm: f64,
        max_abs_entry: f64,
    },

    /// A required input condition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }
}
