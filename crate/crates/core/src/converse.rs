//! Correlated-noise upper bound and the capacity certificate.
//!
//! Giving the receiver the eavesdropper's output, with noise correlation
//! `a = E[n_y n_z]`, yields the bound `max_S U(S, a)` for every `|a| < 1`,
//! where `U(S, a) = (1/2) log det(I + A(a) S) - (1/2) log(1 + g^T S g)` and
//! `A(a) = H^T H + (H^T a - g)(H^T a - g)^T / (1 - |a|^2)`.
//!
//! Choosing `a* = H^{-T}(alpha* q_perp + g)` turns `A(a*)` into
//! `H^T H + theta* q_perp q_perp^T` with `g^T A(a*)^{-1} g = 1`. The bound is
//! then again a generalized Rayleigh quotient whose spectrum is
//! `{lambda_1, 1}`, so it meets the achievable rate `(1/2) log lambda_1`.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::achievable::{
    assert_lambda_exceeds_one, null_beam_rate, optimal_beam, optimal_miso_beam, BeamSolution,
};
use crate::channel::{
    classify, gaussian_rate, main_determinants, reduce_rank_deficient, ChannelClass, CovMat, WiretapChannel,
};
use crate::error::{Result, SecrecyError};
use crate::matkit::{
    inv_n, noise_matrix, orth_perp, pencil_eigenvalues, rank1_update_inverse, Mat2, Mat32, Mat3, Mat3Sym, SymMat2,
    Vec2,
};
use crate::oracle::{brute_force_gaussian, GridSpec};
use crate::tol;

/// An admissible noise correlation with its joint covariance and inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseCorrelation {
    pub a: Vec2,
    /// `1 - |a|^2 = det N`.
    pub k: f64,
    pub n: Mat3Sym,
    pub n_inv: Mat3Sym,
}

impl NoiseCorrelation {
    pub fn new(a: Vec2) -> Result<Self> {
        let n_inv = inv_n(a)?;
        let n = noise_matrix(a);
        let k = 1.0 - a.norm_sq();
        let product = (n * n_inv - Mat3::IDENTITY).max_abs();
        if product > tol::ID / k || !tol::close(n.det(), k, tol::ID) {
            return Err(SecrecyError::InvariantViolated(format!(
                "N N^-1 - I = {product:e}, det N = {} vs k = {k}",
                n.det()
            )));
        }
        Ok(NoiseCorrelation { a, k, n, n_inv })
    }

    /// `A(a) = Hbar^T N^-1 Hbar` with `Hbar = [H; g^T]`.
    pub fn bound_matrix(&self, ch: &WiretapChannel) -> SymMat2 {
        Mat32::stack(&ch.h, ch.g).weighted_gram(&self.n_inv)
    }

    /// `A(a) = H^T H + (H^T a - g)(H^T a - g)^T / k`.
    pub fn bound_matrix_rank1(&self, ch: &WiretapChannel) -> SymMat2 {
        let u = ch.h.transpose() * self.a - ch.g;
        ch.hth() + u.outer() * (1.0 / self.k)
    }
}

/// `u = H^-T g`, `w = H^-T q` and the cross product `u x w`, which carry
/// every quadratic form in `(H^T H)^-1` that the construction needs.
#[derive(Debug, Clone, Copy)]
struct Whitened {
    u: Vec2,
    w: Vec2,
    /// `g^T (H^T H)^-1 g`.
    d: f64,
    /// `q^T (H^T H)^-1 q`.
    c: f64,
    /// `g^T (H^T H)^-1 q`.
    b: f64,
    /// `u x w = (g x q) / det H`, taken from the unwhitened vectors.
    x: f64,
}

impl Whitened {
    fn new(ch: &WiretapChannel, q: Vec2) -> Result<Self> {
        let hit = ch.h_inv_t()?;
        let (u, w) = (hit * ch.g, hit * q);
        let x = (ch.g.x * q.y - ch.g.y * q.x) / ch.h.det();
        Ok(Whitened { u, w, d: u.norm_sq(), c: w.norm_sq(), b: u.dot(w), x })
    }
}

/// `theta(alpha) = alpha^2 / (1 - |a|^2)` for `a = H^{-T}(alpha q_perp + g)`.
///
/// Cross-checked against the quadratic in `1/alpha`:
/// `1/theta = -q^T M q - 2 g^T M q / alpha - (g^T M g - 1) / alpha^2`, `M = (H^T H)^-1`.
pub fn theta_of_alpha(ch: &WiretapChannel, q_perp: Vec2, alpha: f64) -> Result<f64> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(SecrecyError::ZeroAlpha);
    }
    let wh = Whitened::new(ch, q_perp)?;
    let a = wh.w * alpha + wh.u;
    let norm_sq = a.norm_sq();
    if (1.0 - norm_sq).abs() <= tol::NORM {
        return Err(SecrecyError::NormOne { norm_sq });
    }
    let theta = alpha * alpha / (1.0 - norm_sq);

    let terms = [-wh.c, -2.0 * wh.b / alpha, -(wh.d - 1.0) / (alpha * alpha)];
    let scale = terms.iter().map(|t| t.abs()).sum::<f64>() + 1.0 / (alpha * alpha);
    let reciprocal: f64 = terms.iter().sum();
    if (reciprocal - 1.0 / theta).abs() > tol::ID * scale {
        return Err(SecrecyError::InvariantViolated(format!(
            "1/theta = {} directly but {reciprocal} from the quadratic in 1/alpha",
            1.0 / theta
        )));
    }
    Ok(theta)
}

/// The tightening correlation `a*` and the quantities derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TightCorrelation {
    pub alpha_star: f64,
    pub theta_star: f64,
    pub a_star: Vec2,
    /// `A(a*) = H^T H + theta* q_perp q_perp^T`.
    pub a_star_matrix: SymMat2,
    pub q_perp: Vec2,
    /// `g^T A(a*)^-1 g`; equals one.
    pub unit_coupling: f64,
    /// Largest disagreement between the routes to `1/theta*`, each scaled by
    /// the size of the terms it cancels.
    pub theta_residual: f64,
    /// Largest disagreement between the forms of `A(a*)`, scaled likewise.
    pub matrix_residual: f64,
}

/// Picks `alpha*` on the family `a = H^-T(alpha q_perp + g)` so that
/// `g^T A(a)^-1 g = 1`; `1/theta(alpha)` is maximal there.
///
/// With `d = g^T M g`, `c = q^T M q`, `b = g^T M q` and `x = u x w`:
/// `alpha* = (1 - d) / b`, `theta* = (d - 1) / (c - x^2)` and
/// `a* = u / d - ((d - 1) x / (b d)) J u`. These forms avoid the
/// cancellations of the textbook expressions when `H` is ill-conditioned;
/// the textbook expressions are kept as cross-checks.
pub fn optimize_alpha(ch: &WiretapChannel, q_perp: Vec2) -> Result<TightCorrelation> {
    if !q_perp.is_unit() {
        return Err(SecrecyError::PreconditionFailed("q_perp must be unit norm".into()));
    }
    let wh = Whitened::new(ch, q_perp)?;
    let Whitened { u, w, d, c, b, x } = wh;
    if !(d > 1.0) {
        return Err(SecrecyError::PreconditionFailed(format!("g^T (H^T H)^-1 g = {d} must exceed 1")));
    }
    if b.abs() <= tol::SING * (c * d).sqrt() {
        return Err(SecrecyError::DegenerateDirection);
    }
    let alpha_star = (1.0 - d) / b;
    let gap = c - x * x;
    if !(gap > 0.0) {
        return Err(SecrecyError::InvariantViolated(format!("theta* has non-positive denominator {gap:e}")));
    }
    let theta_star = (d - 1.0) / gap;
    let inv_theta = gap / (d - 1.0);

    let theta_direct = theta_of_alpha(ch, q_perp, alpha_star)?;
    let a_naive = w * alpha_star + u;
    let direct_scale = (1.0 + a_naive.norm_sq()) / (alpha_star * alpha_star);
    let inv_completed = -c + b * b / (d - 1.0);
    let completed_scale = c + b * b / (d - 1.0);
    let theta_residual =
        ((1.0 / theta_direct - inv_theta).abs() / direct_scale).max((inv_completed - inv_theta).abs() / completed_scale);

    let a_star = u * (1.0 / d) - orth_perp(u) * ((d - 1.0) * x / (b * d));
    let noise = NoiseCorrelation::new(a_star)?;
    let hth = ch.hth();
    let a_star_matrix = hth + q_perp.outer() * theta_star;
    // H^T a* - g = alpha* q_perp, recovered by cancellation against g
    let lifted = ch.h.transpose() * a_star;
    let matrix_scale = a_star_matrix.max_abs() + (lifted.norm() + ch.g.norm()).powi(2) / noise.k;
    let matrix_residual = (a_star_matrix - noise.bound_matrix_rank1(ch))
        .max_abs()
        .max((a_star_matrix - noise.bound_matrix(ch)).max_abs())
        / matrix_scale;

    // g^T A*^-1 g = u^T (I + theta w w^T)^-1 u, written with the adjugate
    let unit_coupling = (d + theta_star * x * x) / (1.0 + theta_star * c);
    if (unit_coupling - 1.0).abs() > tol::COUPLING {
        return Err(SecrecyError::InvariantViolated(format!(
            "g^T A(a*)^-1 g = {unit_coupling}, expected 1"
        )));
    }
    Ok(TightCorrelation {
        alpha_star,
        theta_star,
        a_star,
        a_star_matrix,
        q_perp,
        unit_coupling,
        theta_residual,
        matrix_residual,
    })
}

/// `g^T A^-1 g` for `A = H^T H + theta q q^T` through the Sherman-Morrison
/// update of `(H^T H)^-1`. Loses accuracy as `H` approaches singularity.
pub fn coupling_by_rank_one_update(ch: &WiretapChannel, theta: f64, q: Vec2) -> Result<f64> {
    let hit = ch.h_inv_t()?;
    let m = (hit.transpose() * hit).sym_part();
    let inv = rank1_update_inverse(&m.to_mat(), theta, q)?;
    Ok(ch.g.dot(inv * ch.g))
}

/// `a0 = (g^T q_a / |H q_a|^2) H q_a`, a member of the `alpha` family with
/// `|a0| < 1`. It witnesses that `theta(alpha*) > 0`.
pub fn a_zero_witness(ch: &WiretapChannel, q_a: Vec2) -> Result<Vec2> {
    let hq = ch.h * q_a;
    let gain = hq.norm_sq();
    if !(gain > 0.0) {
        return Err(SecrecyError::InvariantViolated("H q_a vanishes".into()));
    }
    let gq = ch.g.dot(q_a);
    let a0 = hq * (gq / gain);
    let norm = gq.abs() / gain.sqrt();
    if !(norm < 1.0) {
        return Err(SecrecyError::InvariantViolated(format!("|a0| = {norm} is not below 1")));
    }
    let along_beam = (ch.h.transpose() * a0 - ch.g).dot(q_a);
    if along_beam.abs() > tol::ID * ch.g.norm().max(1.0) {
        return Err(SecrecyError::InvariantViolated(format!(
            "H^T a0 - g has component {along_beam:e} along q_a"
        )));
    }
    Ok(a0)
}

/// `U(S, a)` evaluated three independent ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperPaths {
    /// `(1/2) log(det(I_3 + N^-1 Hbar S Hbar^T) / (1 + g^T S g))`.
    pub joint: f64,
    /// `(1/2) log(det(I_2 + Hbar^T N^-1 Hbar S) / (1 + g^T S g))`.
    pub reduced: f64,
    /// `(1/2) log(det E / det N)` with `E` the LMMSE error covariance of `y` from `z`.
    pub lmmse: f64,
    /// Largest scaled pairwise disagreement.
    pub residual: f64,
}

pub fn upper_value_paths(ch: &WiretapChannel, s: &CovMat, a: Vec2) -> Result<UpperPaths> {
    if s.trace() > ch.power * (1.0 + tol::TRACE) + tol::TRACE {
        return Err(SecrecyError::InvalidCovariance(format!(
            "trace {} exceeds the channel's power budget {}",
            s.trace(),
            ch.power
        )));
    }
    let noise = NoiseCorrelation::new(a)?;
    let sm = s.matrix();
    let eve = 1.0 + sm.quad(ch.g);
    let stacked = Mat32::stack(&ch.h, ch.g);

    let joint_det = (Mat3::IDENTITY + noise.n_inv * stacked.congruence(sm)).det();
    let reduced_det = (Mat2::IDENTITY + noise.bound_matrix(ch) * *sm).det();

    let cross = ch.h * (*sm * ch.g) + a;
    let received = SymMat2::IDENTITY + sm.congruence(&ch.h.transpose());
    let error_cov = received - cross.outer() * (1.0 / eve);

    let joint = 0.5 * (joint_det / eve).ln();
    let reduced = 0.5 * (reduced_det / eve).ln();
    let lmmse = 0.5 * (error_cov.det() / noise.k).ln();
    let residual = tol::rel_diff(joint, reduced)
        .max(tol::rel_diff(joint, lmmse))
        .max(tol::rel_diff(reduced, lmmse));
    Ok(UpperPaths { joint, reduced, lmmse, residual })
}

/// `U(S, a)`, after checking that all three evaluation routes agree.
pub fn upper_value(ch: &WiretapChannel, s: &CovMat, a: Vec2) -> Result<f64> {
    let paths = upper_value_paths(ch, s, a)?;
    if !(paths.residual <= tol::ID) {
        return Err(SecrecyError::InvariantViolated(format!(
            "U(S, a) routes disagree: {paths:?}"
        )));
    }
    Ok(paths.reduced)
}

/// Maximum of `U(S, a*)` over `S` and the spectrum that certifies it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundMax {
    /// `(1/2) log` of the top eigenvalue, nats.
    pub value: f64,
    /// Eigenvalues of `(I + P g g^T)^-1 (I + P H^T H + P theta* q_perp q_perp^T)`, descending.
    pub eigenvalues: [f64; 2],
    /// `q1 = -theta* (H^T H - g g^T)^-1 q_perp`, the eigenvector for eigenvalue 1.
    pub q1: Vec2,
    /// `|q1^T q_perp - 1|`.
    pub q1_coupling_residual: f64,
    /// Scaled residual of the eigen-equations for `q_a` and `q1`.
    pub eigenvector_residual: f64,
}

pub fn upper_bound_max(ch: &WiretapChannel, beam: &BeamSolution, tight: &TightCorrelation) -> Result<UpperBoundMax> {
    let p = ch.power;
    let base = ch.main_pencil();
    let bumped = base + tight.q_perp.outer() * (p * tight.theta_star);
    let eve = ch.eve_pencil();
    // det(base + c u u^T) = det(base) (1 + c u^T base^-1 u)
    let det_bumped = base.det() * (1.0 + p * tight.theta_star * base.inverse()?.quad(tight.q_perp));
    let eigenvalues = pencil_eigenvalues(&bumped, &eve, det_bumped)?;

    let top_off = (eigenvalues[0] - beam.lambda1).abs() / beam.lambda1;
    let unit_off = (eigenvalues[1] - 1.0).abs();
    if top_off > tol::EIG || unit_off > tol::UNIT_EIGENVALUE {
        return Err(SecrecyError::EigenStructureMismatch(format!(
            "spectrum {eigenvalues:?}, expected {{{}, 1}}",
            beam.lambda1
        )));
    }

    // (H^T H - g g^T)^-1 = H^-1 (I - u u^T)^-1 H^-T with the adjugate of I - u u^T
    let wh = Whitened::new(ch, tight.q_perp)?;
    let h_inv = ch.h_inv_t()?.transpose();
    let q1 = h_inv * (wh.w - orth_perp(wh.u) * wh.x) * (tight.theta_star / (wh.d - 1.0));
    let q1_coupling_residual = (q1.dot(tight.q_perp) - 1.0).abs();
    let eve_inv = eve.inverse()?;
    let pencil = eve_inv * bumped;
    let qa_res = (pencil * beam.q_a - beam.q_a * beam.lambda1).max_abs() / beam.lambda1;
    let q1_res = (pencil * q1 - q1).max_abs() / q1.max_abs();
    let eigenvector_residual = qa_res.max(q1_res);
    if q1_coupling_residual > tol::ID || eigenvector_residual > tol::EIG {
        return Err(SecrecyError::EigenStructureMismatch(format!(
            "q1^T q_perp - 1 = {q1_coupling_residual:e}, eigenvector residual {eigenvector_residual:e}"
        )));
    }
    Ok(UpperBoundMax {
        value: 0.5 * eigenvalues[0].ln(),
        eigenvalues,
        q1,
        q1_coupling_residual,
        eigenvector_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// Upper and lower bounds meet and every identity check passed.
    Tight,
    /// The construction ran on a general channel but did not certify.
    NotTight,
    /// The channel is degraded or rank deficient; the capacity comes from
    /// another computation recorded in the certificate.
    Inapplicable,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Tight => "Tight",
            Verdict::NotTight => "NotTight",
            Verdict::Inapplicable => "Inapplicable",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CertificateFlags {
    /// The beam's generalized eigenvalues coincide.
    pub degenerate: bool,
    /// `g = 0`.
    pub no_eavesdropper: bool,
    /// `g^T q_a = 0`, so `a0 = 0` and `alpha0 = -g^T q_perp`.
    pub orthogonal_beam: bool,
    /// How a degraded channel's capacity was obtained.
    pub degraded_formula: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityCertificate {
    pub channel: WiretapChannel,
    pub class: String,
    /// `|H^-T g|` when `H` is full rank.
    pub degradedness: Option<f64>,
    pub verdict: Verdict,
    /// Achievable rate `(1/2) log lambda1`, nats.
    pub lower: f64,
    /// `max_S U(S, a*)`, nats.
    pub upper: Option<f64>,
    /// Unclamped; reporting layers apply `max(0, .)`.
    pub capacity_nats: f64,
    pub capacity_bits: f64,
    pub lambda1: f64,
    pub q_a: Vec2,
    pub null_beam_rate: Option<f64>,
    pub q_perp: Option<Vec2>,
    pub alpha_star: Option<f64>,
    pub theta_star: Option<f64>,
    pub a_star: Option<Vec2>,
    pub a_star_norm: Option<f64>,
    pub a_star_matrix: Option<SymMat2>,
    pub unit_coupling: Option<f64>,
    pub eigenvalues_of_bound: Option<[f64; 2]>,
    /// Grid-search rate, when the oracle was consulted.
    pub oracle_rate: Option<f64>,
    pub residuals: BTreeMap<String, f64>,
    pub failed_checks: Vec<String>,
    pub flags: CertificateFlags,
    pub notes: Vec<String>,
    /// First upstream error on the general path, if any.
    pub failure: Option<String>,
    /// Relative tolerance of the tightness verdict.
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateOptions {
    /// Relative gap accepted between the bounds.
    pub tolerance: f64,
    /// Grid used when the oracle has to supply or confirm the capacity.
    pub oracle_grid: GridSpec,
    pub oracle_seed: u64,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        CertificateOptions { tolerance: tol::CERT, oracle_grid: GridSpec::square(512), oracle_seed: 0 }
    }
}

pub fn capacity_certificate(ch: &WiretapChannel) -> Result<CapacityCertificate> {
    capacity_certificate_with(ch, &CertificateOptions::default())
}

/// Builds the certificate. Only classification errors (the ambiguous
/// `|H^-T g| = 1` band) are returned as `Err`; failures further down are
/// recorded in the certificate with verdict `NotTight`.
pub fn capacity_certificate_with(ch: &WiretapChannel, opts: &CertificateOptions) -> Result<CapacityCertificate> {
    let class = classify(ch)?;
    let mut cert = CapacityCertificate {
        channel: *ch,
        class: class.name().to_string(),
        degradedness: class.norm(),
        verdict: Verdict::Inapplicable,
        lower: 0.0,
        upper: None,
        capacity_nats: 0.0,
        capacity_bits: 0.0,
        lambda1: 1.0,
        q_a: Vec2::ZERO,
        null_beam_rate: None,
        q_perp: None,
        alpha_star: None,
        theta_star: None,
        a_star: None,
        a_star_norm: None,
        a_star_matrix: None,
        unit_coupling: None,
        eigenvalues_of_bound: None,
        oracle_rate: None,
        residuals: BTreeMap::new(),
        failed_checks: Vec::new(),
        flags: CertificateFlags::default(),
        notes: Vec::new(),
        failure: None,
        tolerance: opts.tolerance,
    };

    match class {
        ChannelClass::ReducedRank => {
            let miso = reduce_rank_deficient(ch)?;
            let beam = optimal_miso_beam(&miso)?;
            cert.record_beam(&beam);
            cert.capacity_nats = beam.rate;
            cert.notes.push("H is rank deficient; capacity is the best Gaussian beam of the equivalent 2-1-1 channel".into());
        }
        ChannelClass::Degraded { .. } => {
            let beam = optimal_beam(ch)?;
            cert.record_beam(&beam);
            let grid = brute_force_gaussian(ch, opts.oracle_grid, opts.oracle_seed)?;
            cert.oracle_rate = Some(grid.rate);
            cert.capacity_nats = grid.rate.max(beam.rate);
            cert.flags.degraded_formula = Some("numerical".into());
            cert.notes.push(
                "degraded channel: capacity is the Gaussian-input maximum found by grid search over all covariances".into(),
            );
        }
        ChannelClass::General { .. } => {
            if let Err(e) = cert.run_general(ch, &class, opts) {
                cert.failure = Some(e.to_string());
            }
            cert.judge_general(ch, opts)?;
        }
    }
    cert.capacity_bits = cert.capacity_nats / LN_2;
    Ok(cert)
}

struct Check {
    name: &'static str,
    value: f64,
    limit: f64,
}

impl CapacityCertificate {
    fn record_beam(&mut self, beam: &BeamSolution) {
        self.lower = beam.rate;
        self.lambda1 = beam.lambda1;
        self.q_a = beam.q_a;
        self.flags.degenerate = beam.degenerate;
        self.flags.no_eavesdropper = beam.no_eavesdropper;
    }

    fn run_general(&mut self, ch: &WiretapChannel, class: &ChannelClass, opts: &CertificateOptions) -> Result<()> {
        let beam = optimal_beam(ch)?;
        self.record_beam(&beam);
        self.capacity_nats = beam.rate;

        let null = null_beam_rate(ch)?;
        self.null_beam_rate = Some(null.rate);
        assert_lambda_exceeds_one(&beam, class, &null)?;

        let q_perp = orth_perp(beam.q_a);
        self.q_perp = Some(q_perp);
        a_zero_witness(ch, beam.q_a)?;
        self.flags.orthogonal_beam = ch.g.dot(beam.q_a).abs() <= tol::ID * ch.g.norm();
        if self.flags.orthogonal_beam {
            self.notes.push("beam is orthogonal to g: a0 = 0 corresponds to alpha0 = -g^T q_perp".into());
        }

        let tight = optimize_alpha(ch, q_perp)?;
        self.alpha_star = Some(tight.alpha_star);
        self.theta_star = Some(tight.theta_star);
        self.a_star = Some(tight.a_star);
        self.a_star_norm = Some(tight.a_star.norm());
        self.a_star_matrix = Some(tight.a_star_matrix);
        self.unit_coupling = Some(tight.unit_coupling);
        self.residuals.insert("theta_routes".into(), tight.theta_residual);
        self.residuals.insert("a_matrix_forms".into(), tight.matrix_residual);

        let bound = upper_bound_max(ch, &beam, &tight)?;
        self.upper = Some(bound.value);
        self.eigenvalues_of_bound = Some(bound.eigenvalues);
        self.residuals.insert("q1_coupling".into(), bound.q1_coupling_residual);
        self.residuals.insert("eigenvectors".into(), bound.eigenvector_residual);

        let s_star = CovMat::beam(ch.power, beam.q_a)?;
        let (receive, transmit) = main_determinants(ch, s_star.matrix());
        self.residuals.insert("sylvester".into(), tol::rel_diff(receive, transmit));
        let rate_at_beam = gaussian_rate(ch, &s_star)?;
        self.residuals.insert("rate_at_beam".into(), tol::rel_diff(rate_at_beam, beam.rate));
        let paths = upper_value_paths(ch, &s_star, tight.a_star)?;
        self.residuals.insert("upper_three_path".into(), paths.residual);
        self.residuals.insert("upper_at_beam".into(), tol::rel_diff(paths.reduced, beam.rate));

        if beam.degenerate {
            let grid = brute_force_gaussian(ch, opts.oracle_grid, opts.oracle_seed)?;
            self.oracle_rate = Some(grid.rate);
            self.notes.push("generalized eigenvalues coincide; beam direction is conventional, oracle rate reported".into());
        }
        Ok(())
    }

    fn judge_general(&mut self, ch: &WiretapChannel, opts: &CertificateOptions) -> Result<()> {
        let eig = self
            .eigenvalues_of_bound
            .map(|e| ((e[0] - self.lambda1).abs() / self.lambda1, (e[1] - 1.0).abs()))
            .unwrap_or((f64::INFINITY, f64::INFINITY));
        self.residuals.insert("eigen_pair_top".into(), eig.0);
        self.residuals.insert("eigen_pair_unit".into(), eig.1);
        let norm_excess = self.a_star_norm.map_or(f64::INFINITY, |n| (n - (1.0 - tol::NORM)).max(0.0));
        self.residuals.insert("a_star_norm_excess".into(), norm_excess);
        let coupling = self.unit_coupling.map_or(f64::INFINITY, |c| (c - 1.0).abs());
        self.residuals.insert("unit_coupling".into(), coupling);
        let gap = self.upper.map_or(f64::INFINITY, |u| tol::rel_diff(u, self.lower));
        self.residuals.insert("bound_gap".into(), gap);
        let r = |name: &str| self.residuals.get(name).copied().unwrap_or(f64::INFINITY);

        let checks = [
            Check { name: "a_star_norm_excess", value: norm_excess, limit: 0.0 },
            Check { name: "unit_coupling", value: coupling, limit: tol::COUPLING },
            Check { name: "eigen_pair_top", value: eig.0, limit: tol::EIG },
            Check { name: "eigen_pair_unit", value: eig.1, limit: tol::UNIT_EIGENVALUE },
            Check { name: "sylvester", value: r("sylvester"), limit: tol::ID },
            Check { name: "upper_three_path", value: r("upper_three_path"), limit: tol::ID },
            Check { name: "theta_routes", value: r("theta_routes"), limit: tol::ID },
            Check { name: "a_matrix_forms", value: r("a_matrix_forms"), limit: tol::ID },
            Check { name: "q1_coupling", value: r("q1_coupling"), limit: tol::ID },
            Check { name: "eigenvectors", value: r("eigenvectors"), limit: tol::EIG },
            Check { name: "rate_at_beam", value: r("rate_at_beam"), limit: tol::ID },
            Check { name: "upper_at_beam", value: r("upper_at_beam"), limit: opts.tolerance },
            Check { name: "bound_gap", value: gap, limit: opts.tolerance },
        ];
        self.failed_checks = checks
            .iter()
            .filter(|c| !(c.value <= c.limit))
            .map(|c| c.name.to_string())
            .collect();

        self.verdict = if self.failure.is_none() && self.failed_checks.is_empty() {
            Verdict::Tight
        } else {
            Verdict::NotTight
        };
        if self.verdict == Verdict::NotTight && self.oracle_rate.is_none() {
            let grid = brute_force_gaussian(ch, opts.oracle_grid, opts.oracle_seed)?;
            self.oracle_rate = Some(grid.rate);
            if self.lower == 0.0 {
                self.capacity_nats = grid.rate;
            }
            self.notes.push("bounds not certified; oracle grid rate reported for confirmation".into());
        }
        Ok(())
    }
}
