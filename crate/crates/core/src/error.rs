use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller broke an operation's precondition (shape, range, parameter).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(
        "eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})"
    )]
    NoConvergence { sweeps: usize, residual: f64 },

    /// Mixture covariance is (numerically) rank deficient.
    #[error("degenerate mixture: eigenvalue {min_eigenvalue:e} below floor relative to {max_eigenvalue:e}")]
    DegenerateMixture {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("non-finite cost in plane ({plane_row}, {plane_col}) at theta = {theta}")]
    NonFiniteCost {
        plane_row: usize,
        plane_col: usize,
        theta: f64,
    },

    /// The extreme points condition does not hold: `vertex` (entries in {-1, +1},
    /// scaled by the amplitude) is absent from the source samples.
    #[error("extreme points condition violated: vertex {vertex:?} missing")]
    MissingVertex { vertex: Vec<i8> },

    #[error("counterexample ({reason}): vector {vector:?} gives {value}")]
    Counterexample {
        reason: String,
        vector: Vec<f64>,
        value: f64,
    },
}

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
