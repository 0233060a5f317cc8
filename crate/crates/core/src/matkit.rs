//! Closed-form dense linear algebra for 2×2 and 3×3 real matrices.
//!
//! Everything here is a pure function of its inputs. Eigenproblems are solved
//! from the quadratic characteristic polynomial, never iteratively.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SecrecyError};
use crate::tol;

/// Components below this fraction of the vector norm do not decide its sign.
const SIGN_EPS: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Vec2 {
    fn from(v: [f64; 2]) -> Self {
        Vec2 { x: v[0], y: v[1] }
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector at angle `phi` from the first axis.
    pub fn from_angle(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Vec2::new(c, s)
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// `self / |self|`, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }

    pub fn is_unit(self) -> bool {
        (self.norm() - 1.0).abs() <= tol::UNIT
    }

    /// Flips the vector so its first non-negligible component is positive.
    pub fn canonical_sign(self) -> Vec2 {
        let n = self.norm();
        let lead = if self.x.abs() > SIGN_EPS * n { self.x } else { self.y };
        if lead < 0.0 {
            -self
        } else {
            self
        }
    }

    /// `self self^T`.
    pub fn outer(self) -> SymMat2 {
        SymMat2::new(self.x * self.x, self.x * self.y, self.y * self.y)
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs())
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

/// General 2×2 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[[f64; 2]; 2]", into = "[[f64; 2]; 2]")]
pub struct Mat2 {
    pub m: [[f64; 2]; 2],
}

impl From<[[f64; 2]; 2]> for Mat2 {
    fn from(m: [[f64; 2]; 2]) -> Self {
        Mat2 { m }
    }
}

impl From<Mat2> for [[f64; 2]; 2] {
    fn from(m: Mat2) -> Self {
        m.m
    }
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 { m: [[1.0, 0.0], [0.0, 1.0]] };

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { m: [[a, b], [c, d]] }
    }

    pub fn diag(a: f64, d: f64) -> Self {
        Mat2::new(a, 0.0, 0.0, d)
    }

    /// Counter-clockwise rotation by `phi`.
    pub fn rotation(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Mat2::new(c, -s, s, c)
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.m[0][0], self.m[1][0], self.m[0][1], self.m[1][1])
    }

    pub fn row(&self, i: usize) -> Vec2 {
        Vec2::new(self.m[i][0], self.m[i][1])
    }

    pub fn frobenius(&self) -> f64 {
        self.m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|v| v.is_finite())
    }

    /// `M^T M`.
    pub fn gram(&self) -> SymMat2 {
        let (c0, c1) = (
            Vec2::new(self.m[0][0], self.m[1][0]),
            Vec2::new(self.m[0][1], self.m[1][1]),
        );
        SymMat2::new(c0.norm_sq(), c0.dot(c1), c1.norm_sq())
    }

    /// `(M + M^T) / 2`.
    pub fn sym_part(&self) -> SymMat2 {
        SymMat2::new(self.m[0][0], 0.5 * (self.m[0][1] + self.m[1][0]), self.m[1][1])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.m[i][0] * o.m[0][j] + self.m[i][1] * o.m[1][j];
            }
        }
        Mat2 { m: out }
    }
}

impl Mul<Vec2> for Mat2 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y,
            self.m[1][0] * v.x + self.m[1][1] * v.y,
        )
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        Mat2 { m: self.m.map(|r| r.map(|v| v * s)) }
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.m[0][0] + o.m[0][0],
            self.m[0][1] + o.m[0][1],
            self.m[1][0] + o.m[1][0],
            self.m[1][1] + o.m[1][1],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + o * -1.0
    }
}

/// Symmetric 2×2 matrix `[[xx, xy], [xy, yy]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[[f64; 2]; 2]", into = "[[f64; 2]; 2]")]
pub struct SymMat2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl From<[[f64; 2]; 2]> for SymMat2 {
    fn from(m: [[f64; 2]; 2]) -> Self {
        Mat2 { m }.sym_part()
    }
}

impl From<SymMat2> for [[f64; 2]; 2] {
    fn from(s: SymMat2) -> Self {
        s.to_mat().m
    }
}

impl SymMat2 {
    pub const IDENTITY: SymMat2 = SymMat2 { xx: 1.0, xy: 0.0, yy: 1.0 };
    pub const ZERO: SymMat2 = SymMat2 { xx: 0.0, xy: 0.0, yy: 0.0 };

    pub const fn new(xx: f64, xy: f64, yy: f64) -> Self {
        SymMat2 { xx, xy, yy }
    }

    pub fn diag(xx: f64, yy: f64) -> Self {
        SymMat2::new(xx, 0.0, yy)
    }

    pub fn to_mat(&self) -> Mat2 {
        Mat2::new(self.xx, self.xy, self.xy, self.yy)
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// `v^T M v`.
    pub fn quad(&self, v: Vec2) -> f64 {
        self.xx * v.x * v.x + 2.0 * self.xy * v.x * v.y + self.yy * v.y * v.y
    }

    /// `u^T M v`.
    pub fn bilinear(&self, u: Vec2, v: Vec2) -> f64 {
        u.dot(*self * v)
    }

    pub fn max_abs(&self) -> f64 {
        self.xx.abs().max(self.xy.abs()).max(self.yy.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.xx.is_finite() && self.xy.is_finite() && self.yy.is_finite()
    }

    pub fn inverse(&self) -> Result<SymMat2> {
        Ok(inv2(&self.to_mat())?.sym_part())
    }

    /// `V diag(f(lambda)) V^T` for the spectral decomposition of `self`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> SymMat2 {
        let e = sym_eig2(self);
        let (v1, v2) = (e.vectors[0], e.vectors[1]);
        v1.outer() * f(e.values[0]) + v2.outer() * f(e.values[1])
    }

    /// `X^T M X` for a general `X`.
    pub fn congruence(&self, x: &Mat2) -> SymMat2 {
        (x.transpose() * self.to_mat() * *x).sym_part()
    }
}

impl Add for SymMat2 {
    type Output = SymMat2;
    fn add(self, o: SymMat2) -> SymMat2 {
        SymMat2::new(self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)
    }
}

impl Sub for SymMat2 {
    type Output = SymMat2;
    fn sub(self, o: SymMat2) -> SymMat2 {
        SymMat2::new(self.xx - o.xx, self.xy - o.xy, self.yy - o.yy)
    }
}

impl Mul<f64> for SymMat2 {
    type Output = SymMat2;
    fn mul(self, s: f64) -> SymMat2 {
        SymMat2::new(self.xx * s, self.xy * s, self.yy * s)
    }
}

impl Mul<Vec2> for SymMat2 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        Vec2::new(self.xx * v.x + self.xy * v.y, self.xy * v.x + self.yy * v.y)
    }
}

impl Mul<SymMat2> for SymMat2 {
    type Output = Mat2;
    fn mul(self, o: SymMat2) -> Mat2 {
        self.to_mat() * o.to_mat()
    }
}

/// General 3×3 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat3 {
    pub m: [[f64; 3]; 3],
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3 { m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] };

    pub fn det(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.m[i][k] * o.m[k][j]).sum();
            }
        }
        Mat3 { m: out }
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, o: Mat3) -> Mat3 {
        let mut out = self.m;
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell += o.m[i][j];
            }
        }
        Mat3 { m: out }
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, o: Mat3) -> Mat3 {
        let mut out = self.m;
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell -= o.m[i][j];
            }
        }
        Mat3 { m: out }
    }
}

/// Symmetric 3×3 matrix. Stored densely; constructors keep it symmetric.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat3Sym {
    m: [[f64; 3]; 3],
}

impl Mat3Sym {
    /// `[[top, off], [off^T, corner]]`.
    pub fn from_blocks(top: SymMat2, off: Vec2, corner: f64) -> Self {
        Mat3Sym {
            m: [
                [top.xx, top.xy, off.x],
                [top.xy, top.yy, off.y],
                [off.x, off.y, corner],
            ],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[i][j]
    }

    pub fn to_mat(&self) -> Mat3 {
        Mat3 { m: self.m }
    }

    pub fn det(&self) -> f64 {
        self.to_mat().det()
    }
}

impl Mul for Mat3Sym {
    type Output = Mat3;
    fn mul(self, o: Mat3Sym) -> Mat3 {
        self.to_mat() * o.to_mat()
    }
}

/// 3×2 matrix, row-major; holds the stacked channel `[H; g^T]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat32 {
    pub m: [[f64; 2]; 3],
}

impl Mat32 {
    /// `[top; bottom^T]`.
    pub fn stack(top: &Mat2, bottom: Vec2) -> Self {
        Mat32 { m: [top.m[0], top.m[1], [bottom.x, bottom.y]] }
    }

    fn row(&self, i: usize) -> Vec2 {
        Vec2::new(self.m[i][0], self.m[i][1])
    }

    /// `X^T W X` (2×2).
    pub fn weighted_gram(&self, w: &Mat3Sym) -> SymMat2 {
        let mut out = [[0.0; 2]; 2];
        for (a, row) in out.iter_mut().enumerate() {
            for (b, cell) in row.iter_mut().enumerate() {
                let mut acc = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        acc += self.m[i][a] * w.get(i, j) * self.m[j][b];
                    }
                }
                *cell = acc;
            }
        }
        Mat2 { m: out }.sym_part()
    }

    /// `X S X^T` (3×3).
    pub fn congruence(&self, s: &SymMat2) -> Mat3Sym {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = s.bilinear(self.row(i), self.row(j));
            }
        }
        Mat3Sym { m }
    }
}

/// Spectral decomposition of a symmetric 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEigen {
    /// Descending.
    pub values: [f64; 2],
    /// Orthonormal, each with its first non-negligible component positive.
    pub vectors: [Vec2; 2],
}

pub fn inv2(m: &Mat2) -> Result<Mat2> {
    let det = m.det();
    let scale = m.frobenius();
    if !det.is_finite() || det.abs() <= tol::SING * scale * scale {
        return Err(SecrecyError::SingularMatrix { det });
    }
    let r = 1.0 / det;
    Ok(Mat2::new(m.m[1][1] * r, -m.m[0][1] * r, -m.m[1][0] * r, m.m[0][0] * r))
}

pub fn sym_eig2(s: &SymMat2) -> SymEigen {
    let mean = 0.5 * (s.xx + s.yy);
    let half_diff = 0.5 * (s.xx - s.yy);
    let radius = half_diff.hypot(s.xy);
    let values = [mean + radius, mean - radius];
    let e1 = Vec2::new(1.0, 0.0);
    let e2 = Vec2::new(0.0, 1.0);
    let vectors = if s.xy == 0.0 {
        if s.xx >= s.yy {
            [e1, e2]
        } else {
            [e2, e1]
        }
    } else {
        let phi = 0.5 * (2.0 * s.xy).atan2(s.xx - s.yy);
        let v1 = Vec2::from_angle(phi);
        [v1.canonical_sign(), orth_perp(v1).canonical_sign()]
    };
    SymEigen { values, vectors }
}

/// Top generalized eigenpair of the symmetric pencil `(A, B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighMax {
    pub lambda: f64,
    /// The other generalized eigenvalue.
    pub lambda_min: f64,
    /// Unit-norm maximizer of `q^T A q / q^T B q`.
    pub q: Vec2,
    /// The two generalized eigenvalues coincide, so every direction is optimal.
    pub degenerate: bool,
}

/// Maximizes the generalized Rayleigh quotient `q^T A q / q^T B q` through the
/// whitened matrix `B^{-1/2} A B^{-1/2}`.
pub fn gen_rayleigh_max(a: &SymMat2, b: &SymMat2) -> Result<RayleighMax> {
    let eb = sym_eig2(b);
    let min_eig = eb.values[1];
    if !(min_eig > tol::PD * eb.values[0].abs().max(1.0)) {
        return Err(SecrecyError::NotPositiveDefinite { min_eig });
    }
    let b_inv_sqrt = b.map_spectrum(|l| 1.0 / l.sqrt());
    let whitened = a.congruence(&b_inv_sqrt.to_mat());
    let ew = sym_eig2(&whitened);
    let [lambda, lambda_min] = ew.values;
    let degenerate = lambda - lambda_min <= tol::EIG * lambda.abs().max(1.0);
    let q = (b_inv_sqrt * ew.vectors[0])
        .normalized()
        .ok_or_else(|| SecrecyError::InvariantViolated("whitened eigenvector vanished".into()))?
        .canonical_sign();
    Ok(RayleighMax { lambda, lambda_min, q, degenerate })
}

/// `(M + c u u^T)^{-1}` from `M^{-1}` by the Sherman–Morrison formula.
pub fn rank1_update_inverse(m_inv: &Mat2, c: f64, u: Vec2) -> Result<Mat2> {
    let m_inv_u = *m_inv * u;
    let ut_m_inv = m_inv.transpose() * u;
    let coupling = c * u.dot(m_inv_u);
    let denominator = 1.0 + coupling;
    if !denominator.is_finite() || denominator.abs() <= tol::SING * coupling.abs().max(1.0) {
        return Err(SecrecyError::SingularUpdate { denominator });
    }
    let f = c / denominator;
    let correction = Mat2::new(
        m_inv_u.x * ut_m_inv.x,
        m_inv_u.x * ut_m_inv.y,
        m_inv_u.y * ut_m_inv.x,
        m_inv_u.y * ut_m_inv.y,
    );
    Ok(*m_inv - correction * f)
}

/// Joint noise covariance `[[I, a], [a^T, 1]]`.
pub fn noise_matrix(a: Vec2) -> Mat3Sym {
    Mat3Sym::from_blocks(SymMat2::IDENTITY, a, 1.0)
}

/// Closed-form inverse of [`noise_matrix`] with `k = 1 - |a|^2`.
pub fn inv_n(a: Vec2) -> Result<Mat3Sym> {
    let norm = a.norm();
    if !a.is_finite() || norm >= 1.0 - tol::NORM {
        return Err(SecrecyError::NoiseDegenerate { norm });
    }
    let k = 1.0 - a.norm_sq();
    Ok(Mat3Sym::from_blocks(SymMat2::IDENTITY + a.outer() * (1.0 / k), a * (-1.0 / k), 1.0 / k))
}

/// Counter-clockwise quarter turn `(x, y) -> (-y, x)`.
pub fn orth_perp(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

/// Real eigenvalues (descending) of a 2×2 matrix known to be similar to a
/// symmetric one. The smaller root comes from the product of roots to avoid
/// cancellation.
pub fn similar_to_symmetric_eigenvalues(trace: f64, det: f64) -> [f64; 2] {
    let disc = (trace * trace - 4.0 * det).max(0.0).sqrt();
    if trace >= 0.0 {
        let big = 0.5 * (trace + disc);
        let small = if big != 0.0 { det / big } else { 0.0 };
        [big, small]
    } else {
        let small = 0.5 * (trace - disc);
        let big = if small != 0.0 { det / small } else { 0.0 };
        [big, small]
    }
}

/// Eigenvalues (descending) of `B^{-1} A` for symmetric `A` and positive
/// definite `B`, from `det(A - mu B) = 0`.
pub fn pencil_eigenvalues(a: &SymMat2, b: &SymMat2, det_a: f64) -> Result<[f64; 2]> {
    let det_b = b.det();
    if !(det_b > tol::PD * b.max_abs().max(1.0).powi(2)) || !(b.trace() > 0.0) {
        return Err(SecrecyError::NotPositiveDefinite { min_eig: sym_eig2(b).values[1] });
    }
    let cross = a.xx * b.yy + a.yy * b.xx - 2.0 * a.xy * b.xy;
    Ok(similar_to_symmetric_eigenvalues(cross / det_b, det_a / det_b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assert_mat_close(a: &Mat2, b: &Mat2, tol: f64) {
        for i in 0..2 {
            for j in 0..2 {
                assert!((a.m[i][j] - b.m[i][j]).abs() <= tol, "{a:?} vs {b:?}");
            }
        }
    }

    fn assert_vec_close(a: Vec2, b: Vec2, tol: f64) {
        assert!((a - b).max_abs() <= tol, "{a:?} vs {b:?}");
    }

    #[test]
    fn inv2_examples() {
        assert_eq!(inv2(&Mat2::IDENTITY).unwrap(), Mat2::IDENTITY);
        assert_eq!(inv2(&Mat2::diag(2.0, 4.0)).unwrap(), Mat2::diag(0.5, 0.25));
        let swap = Mat2::new(0.0, 1.0, 1.0, 0.0);
        assert_eq!(inv2(&swap).unwrap(), swap);
    }

    #[test]
    fn inv2_rejects_singular() {
        let m = Mat2::new(1.0, 2.0, 2.0, 4.0);
        assert!(matches!(inv2(&m), Err(SecrecyError::SingularMatrix { .. })));
        assert!(inv2(&Mat2::default()).is_err());
    }

    #[test]
    fn sym_eig2_diagonal_and_circulant() {
        let e = sym_eig2(&SymMat2::diag(3.0, 1.0));
        assert_eq!(e.values, [3.0, 1.0]);
        assert_eq!(e.vectors, [Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)]);

        let e = sym_eig2(&SymMat2::diag(1.0, 3.0));
        assert_eq!(e.values, [3.0, 1.0]);
        assert_eq!(e.vectors, [Vec2::new(0.0, 1.0), Vec2::new(1.0, 0.0)]);

        let e = sym_eig2(&SymMat2::new(2.0, 1.0, 2.0));
        assert_relative_eq!(e.values[0], 3.0, epsilon = 1e-14);
        assert_relative_eq!(e.values[1], 1.0, epsilon = 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_vec_close(e.vectors[0], Vec2::new(s, s), 1e-15);
        assert_vec_close(e.vectors[1], Vec2::new(s, -s), 1e-15);
    }

    #[test]
    fn sym_eig2_reconstructs_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let s = SymMat2::new(
                rng.random_range(-10.0..10.0),
                rng.random_range(-10.0..10.0),
                rng.random_range(-10.0..10.0),
            );
            let e = sym_eig2(&s);
            let rebuilt = e.vectors[0].outer() * e.values[0] + e.vectors[1].outer() * e.values[1];
            let scale = s.max_abs().max(1.0);
            assert!((rebuilt - s).max_abs() <= tol::EIG * scale, "{s:?}");
            assert!(e.vectors[0].dot(e.vectors[1]).abs() <= 1e-14);
            assert!(e.values[0] >= e.values[1]);
            for (v, l) in e.vectors.iter().zip(e.values) {
                assert!((s * *v - *v * l).max_abs() <= tol::EIG * scale);
                let lead = if v.x.abs() > SIGN_EPS { v.x } else { v.y };
                assert!(lead > 0.0);
            }
        }
    }

    #[test]
    fn gen_rayleigh_max_examples() {
        let r = gen_rayleigh_max(&SymMat2::diag(2.0, 2.0), &SymMat2::diag(5.0, 1.0)).unwrap();
        assert_relative_eq!(r.lambda, 2.0, epsilon = 1e-14);
        assert_eq!(r.q, Vec2::new(0.0, 1.0));
        assert!(!r.degenerate);

        let r = gen_rayleigh_max(&SymMat2::IDENTITY, &SymMat2::IDENTITY).unwrap();
        assert_eq!(r.lambda, 1.0);
        assert_eq!(r.q, Vec2::new(1.0, 0.0));
        assert!(r.degenerate);
    }

    #[test]
    fn gen_rayleigh_max_rejects_indefinite_b() {
        let err = gen_rayleigh_max(&SymMat2::IDENTITY, &SymMat2::new(1.0, 2.0, 1.0));
        assert!(matches!(err, Err(SecrecyError::NotPositiveDefinite { .. })));
    }

    fn random_spd(rng: &mut ChaCha8Rng) -> SymMat2 {
        let m = Mat2::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        );
        m.gram() + SymMat2::IDENTITY * 0.1
    }

    /// Roots of `det(A - t B) = 0` written out directly from the entries.
    fn char_poly_roots(a: &SymMat2, b: &SymMat2) -> (f64, f64) {
        let qa = b.xx * b.yy - b.xy * b.xy;
        let qb = -(a.xx * b.yy + a.yy * b.xx - 2.0 * a.xy * b.xy);
        let qc = a.xx * a.yy - a.xy * a.xy;
        let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
        ((-qb + disc) / (2.0 * qa), (-qb - disc) / (2.0 * qa))
    }

    #[test]
    fn gen_rayleigh_max_matches_characteristic_polynomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let (a, b) = (random_spd(&mut rng), random_spd(&mut rng));
            let r = gen_rayleigh_max(&a, &b).unwrap();
            let (hi, lo) = char_poly_roots(&a, &b);
            assert!(tol::close(r.lambda, hi, 1e-8), "{} vs {hi}", r.lambda);
            assert!(tol::close(r.lambda_min, lo, 1e-8), "{} vs {lo}", r.lambda_min);
            assert!(r.q.is_unit());
            let rq = a.quad(r.q) / b.quad(r.q);
            assert!(tol::close(rq, r.lambda, tol::EIG));
            let b_inv_a = inv2(&b.to_mat()).unwrap() * a.to_mat();
            let resid = (b_inv_a * r.q - r.q * r.lambda).max_abs();
            assert!(resid <= 1e-9 * r.lambda.max(1.0), "{resid}");
            // maximality witness
            for _ in 0..100 {
                let q = Vec2::from_angle(rng.random_range(0.0..std::f64::consts::PI));
                assert!(a.quad(q) / b.quad(q) <= r.lambda * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn rank1_update_examples() {
        let u = Vec2::new(0.3, -1.7);
        assert_eq!(rank1_update_inverse(&Mat2::IDENTITY, 0.0, u).unwrap(), Mat2::IDENTITY);
        let r = rank1_update_inverse(&Mat2::IDENTITY, 3.0, Vec2::new(1.0, 0.0)).unwrap();
        assert_mat_close(&r, &Mat2::diag(0.25, 1.0), 1e-15);
        let err = rank1_update_inverse(&Mat2::IDENTITY, -1.0, Vec2::new(1.0, 0.0));
        assert!(matches!(err, Err(SecrecyError::SingularUpdate { .. })));
    }

    #[test]
    fn rank1_update_matches_direct_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut checked = 0;
        while checked < 5000 {
            let m = Mat2::new(
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
            );
            let c = rng.random_range(-3.0..3.0);
            let u = Vec2::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let updated = m + Mat2::new(u.x * u.x, u.x * u.y, u.y * u.x, u.y * u.y) * c;
            let cond = |x: &Mat2| x.frobenius() * inv2(x).map(|i| i.frobenius()).unwrap_or(f64::INFINITY);
            if cond(&m) > 1e6 || cond(&updated) > 1e6 {
                continue;
            }
            let fast = rank1_update_inverse(&inv2(&m).unwrap(), c, u).unwrap();
            let direct = inv2(&updated).unwrap();
            let rel = (fast - direct).frobenius() / direct.frobenius();
            assert!(rel <= 1e-10, "rel error {rel}");
            checked += 1;
        }
    }

    #[test]
    fn inv_n_examples() {
        let i3 = inv_n(Vec2::ZERO).unwrap();
        assert_eq!(i3.to_mat(), Mat3::IDENTITY);

        let n = inv_n(Vec2::new(0.5, 0.0)).unwrap();
        let expected = [[4.0 / 3.0, 0.0, -2.0 / 3.0], [0.0, 1.0, 0.0], [-2.0 / 3.0, 0.0, 4.0 / 3.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(n.get(i, j), expected[i][j], epsilon = 1e-15);
            }
        }
        assert_relative_eq!(noise_matrix(Vec2::new(0.5, 0.0)).det(), 0.75, epsilon = 1e-15);
    }

    #[test]
    fn inv_n_rejects_unit_norm() {
        for a in [Vec2::new(1.0, 0.0), Vec2::new(0.6, 0.8), Vec2::new(3.0, 0.0)] {
            assert!(matches!(inv_n(a), Err(SecrecyError::NoiseDegenerate { .. })));
        }
    }

    #[test]
    fn orth_perp_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(orth_perp(Vec2::new(1.0, 0.0)), Vec2::new(0.0, 1.0));
        assert_eq!(orth_perp(Vec2::new(0.0, 1.0)), Vec2::new(-1.0, 0.0));
        assert_eq!(orth_perp(Vec2::new(s, s)), Vec2::new(-s, s));
    }

    #[test]
    fn similar_eigenvalues_are_descending() {
        assert_eq!(similar_to_symmetric_eigenvalues(3.0, 2.0), [2.0, 1.0]);
        assert_eq!(similar_to_symmetric_eigenvalues(-3.0, 2.0), [-1.0, -2.0]);
        let ev = pencil_eigenvalues(&SymMat2::diag(5.0, 2.0), &SymMat2::diag(5.0, 1.0), 10.0).unwrap();
        assert_eq!(ev, [2.0, 1.0]);
    }

    fn arb_mat2() -> impl Strategy<Value = Mat2> {
        prop::array::uniform4(-5.0f64..5.0).prop_map(|v| Mat2::new(v[0], v[1], v[2], v[3]))
    }

    proptest! {
        #[test]
        fn double_inverse_round_trips(m in arb_mat2()) {
            prop_assume!(m.det().abs() > 1e-3 * m.frobenius().powi(2));
            let back = inv2(&inv2(&m).unwrap()).unwrap();
            prop_assert!((back - m).max_abs() <= tol::ID * m.max_abs().max(1.0) * 10.0);
            prop_assert!((m * inv2(&m).unwrap() - Mat2::IDENTITY).max_abs() <= 1e-10);
        }

        #[test]
        fn inv_n_times_n_is_identity(r in 0.0f64..0.99, phi in 0.0f64..std::f64::consts::TAU) {
            let a = Vec2::from_angle(phi) * r;
            let prod = noise_matrix(a) * inv_n(a).unwrap();
            prop_assert!((prod - Mat3::IDENTITY).max_abs() <= 1e-12);
            prop_assert!((noise_matrix(a).det() - (1.0 - a.norm_sq())).abs() <= 1e-14);
        }

        #[test]
        fn orth_perp_is_orthonormal(phi in 0.0f64..std::f64::consts::TAU) {
            let v = Vec2::from_angle(phi);
            let p = orth_perp(v);
            prop_assert!(p.is_unit());
            prop_assert!(p.dot(v).abs() <= 1e-15);
        }
    }
}
