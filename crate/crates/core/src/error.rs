use thiserror::Error;

/// Every failure the library can report.
///
/// Variants named `InvariantViolated` and `EigenStructureMismatch` indicate a
/// numerical breakdown or a bug rather than a property of the input.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SecrecyError {
    #[error("matrix is singular (|det| = {det:e})")]
    SingularMatrix { det: f64 },
    #[error("matrix is not positive definite (min eigenvalue {min_eig:e})")]
    NotPositiveDefinite { min_eig: f64 },
    #[error("rank-one update is singular (denominator {denominator:e})")]
    SingularUpdate { denominator: f64 },
    #[error("noise correlation is degenerate (|a| = {norm})")]
    NoiseDegenerate { norm: f64 },
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("|H^-T g| = {norm} is within the classification tolerance of 1; choose a branch explicitly")]
    BoundaryAmbiguous { norm: f64 },
    #[error("main channel is full rank; no 2-1-1 reduction applies")]
    NotRankDeficient,
    #[error("main channel is rank deficient")]
    RankDeficient,
    #[error("covariance is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },
    #[error("covariance trace {trace} exceeds power budget {power}")]
    PowerExceeded { trace: f64, power: f64 },
    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),
    #[error("eavesdropper channel vector is zero")]
    ZeroEavesdropperVector,
    #[error("alpha = 0 gives a = H^-T g, which is not an admissible correlation")]
    ZeroAlpha,
    #[error("correlation vector has unit norm (|a|^2 = {norm_sq}); theta has a pole here")]
    NormOne { norm_sq: f64 },
    #[error("g^T (H^T H)^-1 q_perp vanishes; the optimal alpha is unbounded")]
    DegenerateDirection,
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("covariance is not unit rank (min eigenvalue {min_eig:e})")]
    NotUnitRank { min_eig: f64 },
    #[error("eigen-structure mismatch: {0}")]
    EigenStructureMismatch(String),
    #[error("invariant violated: {0}")]
    InvariantViolated(String),
}

pub type Result<T> = std::result::Result<T, SecrecyError>;
