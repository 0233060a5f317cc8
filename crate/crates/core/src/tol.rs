//! Numerical tolerances.
//!
//! Every identity the library checks is exact in real arithmetic; these
//! thresholds decide when a floating-point residual counts as zero.

/// Unit-norm check on vectors (relative).
pub const UNIT: f64 = 1e-10;
/// Identity residuals such as `M * M^-1 = I` and two-formula agreement (relative).
pub const ID: f64 = 1e-10;
/// Eigen-equation residuals (relative).
pub const EIG: f64 = 1e-10;
/// Determinant threshold for invertibility, relative to the squared matrix scale.
pub const SING: f64 = 1e-12;
/// Minimum eigenvalue for positive definiteness, relative to the matrix scale.
pub const PD: f64 = 1e-12;
/// Admissible noise correlations satisfy `|a| < 1 - NORM`.
pub const NORM: f64 = 1e-9;
/// Negative eigenvalues above `-PSD * scale` are rounded to zero in covariances.
pub const PSD: f64 = 1e-12;
/// Trace slack on the power constraint, relative to `max(1, P)`.
pub const TRACE: f64 = 1e-12;
/// Singular-value ratio at or below which `H` is treated as rank deficient.
pub const RANK: f64 = 1e-8;
/// Half-width of the ambiguous band around `|H^-T g| = 1`.
pub const CLASS: f64 = 1e-9;
/// KKT residual threshold.
pub const KKT: f64 = 1e-8;
/// Relative gap between upper and lower bound accepted as tight.
pub const CERT: f64 = 1e-9;
/// Absolute tolerance on the unit eigenvalue of the upper-bound matrix.
pub const UNIT_EIGENVALUE: f64 = 1e-8;
/// Unit-coupling residual `|g^T A(a*)^-1 g - 1|`.
pub const COUPLING: f64 = 1e-9;

/// `|x - y| <= tol * max(1, |x|, |y|)`.
pub fn close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * 1f64.max(x.abs()).max(y.abs())
}

/// Scaled difference used for reporting residuals of two-route checks.
pub fn rel_diff(x: f64, y: f64) -> f64 {
    (x - y).abs() / 1f64.max(x.abs()).max(y.abs())
}
