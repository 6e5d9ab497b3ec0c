//! Blind separation of bounded sources by minimizing the sum of infinity
//! norms of the estimates over orthogonal separators.
//!
//! Everything numeric is generic over [`Scalar`]; the aliases below fix the
//! working precision to `f64`, which all experiments use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod rng;
pub mod scalar;
pub mod separation;
pub mod signal;

pub use error::{Error, Result};
pub use rng::Rng;
pub use scalar::Scalar;
pub use separation::{separate, Criterion, SeparationConfig};

pub type Matrix = linalg::DenseMatrix<f64>;
pub type Matrix32 = linalg::DenseMatrix<f32>;
pub type SourceEnsemble = signal::SourceEnsemble<f64>;
pub type Separation = separation::Separation<f64>;
pub type SeparationOutcome = separation::SeparationOutcome<f64>;
pub type WhiteningResult = separation::WhiteningResult<f64>;
pub type MatchResult = metrics::MatchResult<f64>;
