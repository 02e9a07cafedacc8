use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A matrix required to be symmetric positive definite had a
    /// non-positive Cholesky pivot.
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    /// A finite-difference perturbation broke positive definiteness.
    #[error("perturbed matrix is not positive definite")]
    NotSpd,

    /// Argument outside the supported domain of a special function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Operands with incompatible dimensions.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A vector or matrix entry was NaN or infinite.
    #[error("non-finite entry")]
    NonFinite,

    /// The exponentially modified Gaussian closed form divides by
    /// `alpha' * inv(Sigma) * alpha`, which vanishes at `alpha = 0`.
    #[error("degenerate skew: alpha' * inv(Sigma) * alpha = 0")]
    DegenerateSkew,

    /// Shape parameter outside its admissible range.
    #[error("invalid shape parameter: {0}")]
    InvalidShape(f64),

    /// An operation requiring `alpha = 0` was given a nonzero asymmetry.
    #[error("alpha must be zero for this family")]
    NonzeroAlpha,

    /// Evaluation point outside the distribution's support.
    #[error("point {z} outside support ({lo}, {hi})")]
    OutOfSupport { z: f64, lo: f64, hi: f64 },

    /// A conditional density underflowed, so the triangular solve for the
    /// implicit velocities would divide by zero.
    #[error("singular triangular system: density underflowed")]
    SingularTriangle,

    /// An estimator requiring second-order smoothness was applied to a
    /// function that only has an almost-everywhere gradient.
    #[error("smoothness violation: {0}")]
    SmoothnessViolation(String),

    /// A weight-decomposition component has no sampler.
    #[error("no sampler for decomposition component {0}")]
    MissingSampler(usize),

    /// A mixing law without declared finite moments was used where closed
    /// form moments are required.
    #[error("mixing law does not declare finite moments")]
    MissingMoments,

    /// A quadrature or finite-difference refinement failed its Richardson
    /// agreement check.
    #[error("not converged: {0}")]
    NotConverged(String),

    /// Quadratic test functions require a symmetric coefficient matrix.
    #[error("quadratic coefficient matrix is not symmetric")]
    AsymmetricA,

    /// Estimator configuration rejected at construction.
    #[error("invalid estimator configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
