//! The 2-2-1 wiretap channel `y = H x + n_y`, `z = g^T x + n_z` with
//! independent unit-variance Gaussian noises and average power budget `P`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SecrecyError};
use crate::matkit::{inv2, sym_eig2, Mat2, SymMat2, Vec2};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WiretapChannel {
    /// Main channel gain.
    pub h: Mat2,
    /// Eavesdropper channel gain.
    pub g: Vec2,
    /// Average power budget.
    pub power: f64,
}

impl WiretapChannel {
    pub fn new(h: Mat2, g: Vec2, power: f64) -> Result<Self> {
        if !h.is_finite() || !g.is_finite() {
            return Err(SecrecyError::InvalidChannel("non-finite channel entry".into()));
        }
        if !(power > 0.0 && power.is_finite()) {
            return Err(SecrecyError::InvalidChannel(format!("power must be positive and finite, got {power}")));
        }
        Ok(WiretapChannel { h, g, power })
    }

    pub fn with_power(&self, power: f64) -> Result<Self> {
        WiretapChannel::new(self.h, self.g, power)
    }

    /// `H^T H`.
    pub fn hth(&self) -> SymMat2 {
        self.h.gram()
    }

    /// Largest and smallest singular values of `H`.
    pub fn singular_values(&self) -> (f64, f64) {
        let top = sym_eig2(&self.hth()).values[0].max(0.0).sqrt();
        // |det H| = s1 * s2 is accurate where the small eigenvalue of H^T H is not.
        let bottom = if top > 0.0 { self.h.det().abs() / top } else { 0.0 };
        (top, bottom)
    }

    /// `s_min / s_max`, zero for `H = 0`.
    pub fn rank_ratio(&self) -> f64 {
        let (top, bottom) = self.singular_values();
        if top > 0.0 {
            bottom / top
        } else {
            0.0
        }
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank_ratio() > tol::RANK
    }

    /// `H^{-T}`.
    pub fn h_inv_t(&self) -> Result<Mat2> {
        if !self.is_full_rank() {
            return Err(SecrecyError::RankDeficient);
        }
        Ok(inv2(&self.h)?.transpose())
    }

    /// `|H^{-T} g|`, the degradedness statistic.
    pub fn degradedness(&self) -> Result<f64> {
        Ok((self.h_inv_t()? * self.g).norm())
    }

    /// `I + P H^T H`.
    pub fn main_pencil(&self) -> SymMat2 {
        SymMat2::IDENTITY + self.hth() * self.power
    }

    /// `I + P g g^T`.
    pub fn eve_pencil(&self) -> SymMat2 {
        SymMat2::IDENTITY + self.g.outer() * self.power
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum ChannelClass {
    /// Full rank with `|H^{-T} g| <= 1`: `z` is a noisy copy of `y`.
    Degraded { norm: f64 },
    /// `H` is numerically rank one (or zero).
    ReducedRank,
    /// Full rank with `|H^{-T} g| > 1`.
    General { norm: f64 },
}

impl ChannelClass {
    pub fn norm(&self) -> Option<f64> {
        match *self {
            ChannelClass::Degraded { norm } | ChannelClass::General { norm } => Some(norm),
            ChannelClass::ReducedRank => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ChannelClass::Degraded { .. } => "degraded",
            ChannelClass::ReducedRank => "reduced_rank",
            ChannelClass::General { .. } => "general",
        }
    }

    pub fn is_general(&self) -> bool {
        matches!(self, ChannelClass::General { .. })
    }
}

pub fn classify(ch: &WiretapChannel) -> Result<ChannelClass> {
    if !ch.is_full_rank() {
        return Ok(ChannelClass::ReducedRank);
    }
    let norm = ch.degradedness()?;
    if (norm - 1.0).abs() < tol::CLASS {
        Err(SecrecyError::BoundaryAmbiguous { norm })
    } else if norm > 1.0 {
        Ok(ChannelClass::General { norm })
    } else {
        Ok(ChannelClass::Degraded { norm })
    }
}

/// Equivalent 2-1-1 channel: the legitimate receiver sees `h^T x + n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MisoChannel {
    pub h: Vec2,
    pub g: Vec2,
    pub power: f64,
}

/// Rotates the receiver onto the top left-singular vector of a rank-one `H`;
/// the surviving gain is `h = s1 v1` with `v1` the top right-singular vector.
pub fn reduce_rank_deficient(ch: &WiretapChannel) -> Result<MisoChannel> {
    if ch.is_full_rank() {
        return Err(SecrecyError::NotRankDeficient);
    }
    let e = sym_eig2(&ch.hth());
    let s1 = e.values[0].max(0.0).sqrt();
    if s1 == 0.0 {
        return Err(SecrecyError::InvalidChannel("main channel is identically zero".into()));
    }
    Ok(MisoChannel { h: e.vectors[0] * s1, g: ch.g, power: ch.power })
}

/// A transmit covariance that has passed [`validate_covariance`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct CovMat(SymMat2);

impl CovMat {
    pub fn matrix(&self) -> &SymMat2 {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Beamforming covariance `P q q^T` for a unit vector `q`.
    pub fn beam(power: f64, q: Vec2) -> Result<CovMat> {
        let q = q.normalized().ok_or_else(|| SecrecyError::InvalidCovariance("zero beam direction".into()))?;
        validate_covariance(q.outer() * power, power)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        sym_eig2(&self.0).values[1]
    }
}

/// Accepts `S` iff it is PSD with `tr(S) <= P`, rounding eigenvalues in
/// `[-PSD * scale, 0)` up to zero.
pub fn validate_covariance(s: SymMat2, power: f64) -> Result<CovMat> {
    if !s.is_finite() {
        return Err(SecrecyError::InvalidCovariance("non-finite entry".into()));
    }
    let e = sym_eig2(&s);
    let scale = s.max_abs().max(1.0);
    let min_eig = e.values[1];
    if min_eig < -tol::PSD * scale {
        return Err(SecrecyError::NotPsd { min_eig });
    }
    let s = if min_eig < 0.0 {
        let top = e.values[0].max(0.0);
        e.vectors[0].outer() * top
    } else {
        s
    };
    let trace = s.trace();
    if trace > power + tol::TRACE * power.max(1.0) {
        return Err(SecrecyError::PowerExceeded { trace, power });
    }
    Ok(CovMat(s))
}

/// `(1/2) log det(I + H S H^T) - (1/2) log(1 + g^T S g)` in nats, unclamped.
///
/// The main-channel determinant is evaluated both as `det(I + H S H^T)` and
/// as `det(I + H^T H S)`; a disagreement is reported as an invariant failure.
pub fn gaussian_rate(ch: &WiretapChannel, s: &CovMat) -> Result<f64> {
    let power_slack = tol::TRACE * ch.power.max(1.0);
    if s.trace() > ch.power + power_slack {
        return Err(SecrecyError::InvalidCovariance(format!(
            "trace {} exceeds the channel's power budget {}",
            s.trace(),
            ch.power
        )));
    }
    let (receive, transmit) = main_determinants(ch, s.matrix());
    if !tol::close(receive, transmit, tol::ID) {
        return Err(SecrecyError::InvariantViolated(format!(
            "det(I + H S H^T) = {receive} but det(I + H^T H S) = {transmit}"
        )));
    }
    let eve = 1.0 + s.matrix().quad(ch.g);
    Ok(0.5 * (receive.ln() - eve.ln()))
}

/// `(det(I + H S H^T), det(I + H^T H S))`.
pub fn main_determinants(ch: &WiretapChannel, s: &SymMat2) -> (f64, f64) {
    let receive = (SymMat2::IDENTITY + s.congruence(&ch.h.transpose())).det();
    let transmit = (Mat2::IDENTITY + ch.hth() * *s).det();
    (receive, transmit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{LN_2, PI};

    fn ch(h: Mat2, g: Vec2, p: f64) -> WiretapChannel {
        WiretapChannel::new(h, g, p).unwrap()
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(WiretapChannel::new(Mat2::IDENTITY, Vec2::new(1.0, 0.0), 0.0).is_err());
        assert!(WiretapChannel::new(Mat2::IDENTITY, Vec2::new(1.0, 0.0), -1.0).is_err());
        assert!(WiretapChannel::new(Mat2::IDENTITY, Vec2::new(f64::NAN, 0.0), 1.0).is_err());
        assert!(WiretapChannel::new(Mat2::new(f64::INFINITY, 0.0, 0.0, 1.0), Vec2::ZERO, 1.0).is_err());
    }

    #[test]
    fn classify_examples() {
        let c = classify(&ch(Mat2::IDENTITY, Vec2::new(2.0, 0.0), 1.0)).unwrap();
        assert_eq!(c, ChannelClass::General { norm: 2.0 });
        let c = classify(&ch(Mat2::IDENTITY, Vec2::new(0.5, 0.0), 1.0)).unwrap();
        assert_eq!(c, ChannelClass::Degraded { norm: 0.5 });
        let c = classify(&ch(Mat2::new(1.0, 1.0, 1.0, 1.0), Vec2::new(1.0, 0.0), 1.0)).unwrap();
        assert_eq!(c, ChannelClass::ReducedRank);
        let c = classify(&ch(Mat2::default(), Vec2::new(1.0, 0.0), 1.0)).unwrap();
        assert_eq!(c, ChannelClass::ReducedRank);
    }

    #[test]
    fn classify_refuses_boundary() {
        let err = classify(&ch(Mat2::IDENTITY, Vec2::new(1.0, 0.0), 1.0)).unwrap_err();
        assert!(matches!(err, SecrecyError::BoundaryAmbiguous { .. }));
        let err = classify(&ch(Mat2::IDENTITY, Vec2::new(0.6, 0.8 + 1e-12), 1.0)).unwrap_err();
        assert!(matches!(err, SecrecyError::BoundaryAmbiguous { .. }));
    }

    #[test]
    fn reduce_examples() {
        let m = reduce_rank_deficient(&ch(Mat2::new(1.0, 1.0, 1.0, 1.0), Vec2::new(1.0, 0.0), 1.0)).unwrap();
        assert_relative_eq!(m.h.x, 2f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(m.h.y, 2f64.sqrt(), epsilon = 1e-14);

        let m = reduce_rank_deficient(&ch(Mat2::diag(1.0, 0.0), Vec2::new(1.0, 0.0), 3.0)).unwrap();
        assert_eq!(m.h, Vec2::new(1.0, 0.0));
        assert_eq!(m.power, 3.0);

        // rank one: s1 equals the Frobenius norm
        let h = Mat2::new(2.0, 4.0, 1.0, 2.0);
        let m = reduce_rank_deficient(&ch(h, Vec2::new(0.3, 0.1), 1.0)).unwrap();
        assert_relative_eq!(m.h.norm(), h.frobenius(), epsilon = 1e-14);
        // every row of H is a multiple of h, so |H x| = |h^T x| for all x
        for phi in [0.0, 0.4, 1.3, 2.9] {
            let x = Vec2::from_angle(phi);
            assert_relative_eq!((h * x).norm(), m.h.dot(x).abs(), epsilon = 1e-13);
        }

        assert_eq!(
            reduce_rank_deficient(&ch(Mat2::IDENTITY, Vec2::new(2.0, 0.0), 1.0)),
            Err(SecrecyError::NotRankDeficient)
        );
    }

    #[test]
    fn validate_covariance_examples() {
        let p = 2.0;
        assert!(validate_covariance(SymMat2::diag(p / 2.0, p / 2.0), p).is_ok());
        assert!(matches!(
            validate_covariance(SymMat2::diag(p, p), p),
            Err(SecrecyError::PowerExceeded { .. })
        ));
        assert!(matches!(
            validate_covariance(SymMat2::new(1.0, 2.0, 1.0), 10.0),
            Err(SecrecyError::NotPsd { .. })
        ));
        // rounding noise below zero is clamped away
        let s = validate_covariance(SymMat2::new(1.0, 1.0, 1.0 - 1e-15), 2.0).unwrap();
        assert!(s.min_eigenvalue() >= 0.0);
    }

    #[test]
    fn gaussian_rate_examples() {
        let c = ch(Mat2::IDENTITY, Vec2::new(2.0, 0.0), 1.0);
        let zero = validate_covariance(SymMat2::ZERO, 1.0).unwrap();
        assert_eq!(gaussian_rate(&c, &zero).unwrap(), 0.0);
        let s = validate_covariance(SymMat2::diag(0.0, 1.0), 1.0).unwrap();
        assert_relative_eq!(gaussian_rate(&c, &s).unwrap(), 0.5 * LN_2, epsilon = 1e-15);
        let big = validate_covariance(SymMat2::diag(2.0, 0.0), 2.0).unwrap();
        assert!(matches!(gaussian_rate(&c, &big), Err(SecrecyError::InvalidCovariance(_))));
    }

    fn arb_channel() -> impl Strategy<Value = WiretapChannel> {
        (prop::array::uniform4(-3.0f64..3.0), prop::array::uniform2(-3.0f64..3.0), 0.1f64..10.0)
            .prop_map(|(h, g, p)| ch(Mat2::new(h[0], h[1], h[2], h[3]), g.into(), p))
    }

    fn cov(power: f64, phi: f64, t: f64, u: f64) -> CovMat {
        let (p1, p2) = (t * power, (1.0 - t) * u * power);
        validate_covariance(SymMat2::diag(p1, p2).congruence(&Mat2::rotation(phi).transpose()), power).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn sylvester_forms_agree(c in arb_channel(), phi in 0.0f64..PI, t in 0.0f64..1.0, u in 0.0f64..1.0) {
            let s = cov(c.power, phi, t, u);
            let (a, b) = main_determinants(&c, s.matrix());
            prop_assert!(tol::close(a, b, tol::ID));
            prop_assert!(gaussian_rate(&c, &s).is_ok());
        }

        #[test]
        fn invariant_under_rotations(c in arb_channel(), rx in 0.0f64..PI, tx in 0.0f64..PI, phi in 0.0f64..PI, t in 0.0f64..1.0) {
            let s = cov(c.power, phi, t, 1.0);
            let base = gaussian_rate(&c, &s).unwrap();

            // receiver rotation H -> Q H
            let q = Mat2::rotation(rx);
            let rotated = ch(q * c.h, c.g, c.power);
            prop_assert!(tol::close(gaussian_rate(&rotated, &s).unwrap(), base, 1e-10));
            match (classify(&c), classify(&rotated)) {
                (Ok(a), Ok(b)) => {
                    prop_assert_eq!(a.name(), b.name());
                    if let (Some(x), Some(y)) = (a.norm(), b.norm()) {
                        prop_assert!(tol::close(x, y, 1e-8));
                    }
                }
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
            }

            // joint transmitter rotation H -> H Q, g -> Q^T g, S -> Q^T S Q
            let q = Mat2::rotation(tx);
            let turned = ch(c.h * q, q.transpose() * c.g, c.power);
            let s_turned = validate_covariance(s.matrix().congruence(&q), c.power).unwrap();
            prop_assert!(tol::close(gaussian_rate(&turned, &s_turned).unwrap(), base, 1e-10));
        }
    }
}
