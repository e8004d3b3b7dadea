use num_complex::Complex64;
use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("branch cut ambiguity: {0}")]
    Branch(String),

    #[error("pole of the fractional linear map at {0}")]
    Pole(String),

    #[error("matrix is not self-dual (residual {residual:e} > tolerance {tol:e})")]
    NotSelfDual { residual: f64, tol: f64 },

    #[error("determinant of the complex embedding is negative ({0:e})")]
    NegativeDeterminant(f64),

    #[error("matrix is not a quaternion embedding (block residual {0:e})")]
    NotQuaternion(f64),

    #[error("matrix is not skew-symmetric (residual {residual:e} > tolerance {tol:e})")]
    NotSkewSymmetric { residual: f64, tol: f64 },

    #[error("quadrature did not converge: estimate {estimate} with error {abs_error:e} (requested {requested:e})")]
    Quadrature {
        estimate: Complex64,
        abs_error: f64,
        requested: f64,
    },

    #[error("linear solve failed after {attempts} attempts (last condition estimate {cond:e})")]
    SolveFailure { attempts: u32, cond: f64 },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("conjugate pairing failed: {0}")]
    Pairing(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("batch aborted: {failed} of {total} draws failed")]
    BatchAborted { failed: usize, total: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
