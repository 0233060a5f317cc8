//! Achievable secrecy rate with Gaussian beamforming.
//!
//! With `S = P q q^T` the rate becomes the generalized Rayleigh quotient
//! `(1/2) log(q^T (I + P H^T H) q / q^T (I + P g g^T) q)`, maximized by the top
//! generalized eigenvector `q_a` with value `(1/2) log lambda_1`.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelClass, MisoChannel, WiretapChannel};
use crate::error::{Result, SecrecyError};
use crate::matkit::{gen_rayleigh_max, inv2, orth_perp, sym_eig2, SymMat2, Vec2};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSolution {
    /// Unit-norm optimal beam direction.
    pub q_a: Vec2,
    /// Largest generalized eigenvalue of `(I + P H^T H, I + P g g^T)`.
    pub lambda1: f64,
    /// The other generalized eigenvalue.
    pub lambda2: f64,
    /// `(1/2) log lambda1`, nats.
    pub rate: f64,
    /// `lambda1 == lambda2`: every beam is optimal and `q_a` is a convention.
    pub degenerate: bool,
    /// `g = 0`; the beam is the top eigenvector of `H^T H`.
    pub no_eavesdropper: bool,
}

/// Rate of the beam `q` (not necessarily optimal), nats.
pub fn beam_rate(ch: &WiretapChannel, q: Vec2) -> f64 {
    let main = 1.0 + ch.power * (ch.h * q).norm_sq();
    let eve = 1.0 + ch.power * ch.g.dot(q).powi(2);
    0.5 * (main / eve).ln()
}

pub fn optimal_beam(ch: &WiretapChannel) -> Result<BeamSolution> {
    if !ch.is_full_rank() {
        return Err(SecrecyError::RankDeficient);
    }
    let a = ch.main_pencil();
    let b = ch.eve_pencil();
    let top = gen_rayleigh_max(&a, &b)?;
    let q_a = top.q;

    let fixed_point = inv2(&b.to_mat())? * (a * q_a) - q_a * top.lambda;
    if fixed_point.max_abs() > tol::EIG * top.lambda.max(1.0) {
        return Err(SecrecyError::InvariantViolated(format!(
            "(I + P g g^T)^-1 (I + P H^T H) q_a != lambda1 q_a (residual {:e})",
            fixed_point.max_abs()
        )));
    }
    let rate = 0.5 * top.lambda.ln();
    let direct = beam_rate(ch, q_a);
    if !tol::close(rate, direct, tol::ID) {
        return Err(SecrecyError::InvariantViolated(format!(
            "(1/2) log lambda1 = {rate} but the beam's rate is {direct}"
        )));
    }
    Ok(BeamSolution {
        q_a,
        lambda1: top.lambda,
        lambda2: top.lambda_min,
        rate,
        degenerate: top.degenerate,
        no_eavesdropper: ch.g == Vec2::ZERO,
    })
}

/// Best Gaussian beam for the equivalent 2-1-1 channel, used when `H` is
/// rank deficient. The pencil is `(I + P h h^T, I + P g g^T)`.
pub fn optimal_miso_beam(ch: &MisoChannel) -> Result<BeamSolution> {
    let a = SymMat2::IDENTITY + ch.h.outer() * ch.power;
    let b = SymMat2::IDENTITY + ch.g.outer() * ch.power;
    let top = gen_rayleigh_max(&a, &b)?;
    Ok(BeamSolution {
        q_a: top.q,
        lambda1: top.lambda,
        lambda2: top.lambda_min,
        rate: 0.5 * top.lambda.ln(),
        degenerate: top.degenerate,
        no_eavesdropper: ch.g == Vec2::ZERO,
    })
}

/// Rate of transmitting at full power orthogonally to `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullBeam {
    /// `g_perp`, or the top eigenvector of `H^T H` when `g = 0`.
    pub direction: Vec2,
    /// `P |H g_perp|^2`; the rate is `(1/2) log(1 + gain)`.
    pub gain: f64,
    pub rate: f64,
    pub no_eavesdropper: bool,
}

pub fn null_beam_rate(ch: &WiretapChannel) -> Result<NullBeam> {
    if !ch.is_full_rank() {
        return Err(SecrecyError::RankDeficient);
    }
    let (direction, no_eavesdropper) = match ch.g.normalized() {
        Some(unit) => (orth_perp(unit), false),
        None => (sym_eig2(&ch.hth()).vectors[0], true),
    };
    let gain = ch.power * (ch.h * direction).norm_sq();
    Ok(NullBeam { direction, gain, rate: 0.5 * gain.ln_1p(), no_eavesdropper })
}

/// Checks `lambda1 > 1` on a general channel with the margin the null beam
/// guarantees: `lambda1 - 1 >= P |H g_perp|^2 > 0`.
pub fn assert_lambda_exceeds_one(sol: &BeamSolution, class: &ChannelClass, null: &NullBeam) -> Result<()> {
    if !class.is_general() {
        return Err(SecrecyError::PreconditionFailed(format!(
            "lambda1 > 1 is only guaranteed on general channels, got {}",
            class.name()
        )));
    }
    let gap = (1.0 - tol::EIG) * null.gain;
    if null.gain > 0.0 && sol.lambda1 - 1.0 >= gap {
        Ok(())
    } else {
        Err(SecrecyError::InvariantViolated(format!(
            "lambda1 = {} does not exceed 1 + {gap:e}",
            sol.lambda1
        )))
    }
}
