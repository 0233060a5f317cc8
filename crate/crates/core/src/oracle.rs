//! Brute-force and certificate-style checks that do not reuse the closed-form
//! eigen-solution: grid search over transmit covariances, a KKT residual
//! checker, the quadratic sign test behind unit-rank optimality, and sampling
//! of admissible noise correlations.
//!
//! All randomness comes from seeded ChaCha streams, and every parallel
//! reduction is ordered, so results do not depend on the thread count.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::achievable::optimal_beam;
use crate::channel::{classify, validate_covariance, CovMat, WiretapChannel};
use crate::converse::{optimize_alpha, NoiseCorrelation};
use crate::error::{Result, SecrecyError};
use crate::matkit::{inv2, orth_perp, sym_eig2, Mat2, SymMat2, Vec2};
use crate::tol;

/// Grids coarser than this per axis are allowed but not trusted.
pub const MIN_RECOMMENDED_GRID: usize = 64;

/// Default slack between a grid maximum and the closed-form value, nats.
pub const GRID_TOL: f64 = 1e-3;

/// Transmit covariance `S = R(phi) diag(p1, p2) R(phi)^T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovParam {
    /// Rotation of the eigenbasis, `[0, pi)`.
    pub phi: f64,
    /// Power along `(cos phi, sin phi)`.
    pub p1: f64,
    /// Power along the orthogonal direction.
    pub p2: f64,
}

impl CovParam {
    pub fn matrix(&self) -> SymMat2 {
        let (s, c) = self.phi.sin_cos();
        SymMat2::new(
            self.p1 * c * c + self.p2 * s * s,
            (self.p1 - self.p2) * c * s,
            self.p1 * s * s + self.p2 * c * c,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Rotation angles in `[0, pi)`; also the number of refinement points.
    pub nphi: usize,
    /// Power splits `p1 / P` in `[1/2, 1]`.
    pub npower: usize,
}

impl GridSpec {
    pub fn square(n: usize) -> Self {
        GridSpec { nphi: n, npower: n }
    }

    pub fn below_recommended(&self) -> bool {
        self.nphi < MIN_RECOMMENDED_GRID || self.npower < MIN_RECOMMENDED_GRID
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::square(256)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridOptimum {
    pub param: CovParam,
    pub s_best: CovMat,
    pub rate: f64,
}

impl GridOptimum {
    /// Smallest eigenvalue of the best covariance over the power budget.
    pub fn unit_rank_margin(&self, power: f64) -> f64 {
        self.param.p2.min(self.param.p1) / power
    }
}

/// Maximizes `objective` over covariances with `tr(S) = P`.
///
/// Both objectives searched here have a positive semidefinite gradient
/// (`(D^-1 + S)^-1 - g g^T / (1 + g^T S g)` with `g^T D^-1 g <= 1`) or a
/// strictly increasing optimum in `P`, so restricting to the full-trace face
/// loses nothing. The face is covered by `p1 >= p2` and `phi in [0, pi)`.
fn maximize_on_face<F>(power: f64, grid: GridSpec, seed: u64, objective: F) -> Result<GridOptimum>
where
    F: Fn(&SymMat2) -> f64 + Sync,
{
    if grid.nphi < 2 || grid.npower < 2 {
        return Err(SecrecyError::PreconditionFailed("grid needs at least 2 points per axis".into()));
    }
    let score = |v: f64| if v.is_nan() { f64::NEG_INFINITY } else { v };
    let split = |j: usize| 0.5 + 0.5 * j as f64 / (grid.npower - 1) as f64;
    let param = |phi: f64, t: f64| CovParam { phi, p1: t * power, p2: (1.0 - t) * power };

    let rows: Vec<(f64, usize)> = (0..grid.nphi)
        .into_par_iter()
        .map(|i| {
            let phi = PI * i as f64 / grid.nphi as f64;
            let mut best = (f64::NEG_INFINITY, 0);
            for j in 0..grid.npower {
                let v = score(objective(&param(phi, split(j)).matrix()));
                if v > best.0 {
                    best = (v, j);
                }
            }
            best
        })
        .collect();

    let mut best_i = 0;
    for (i, row) in rows.iter().enumerate() {
        if row.0 > rows[best_i].0 {
            best_i = i;
        }
    }
    let (mut best_val, best_j) = rows[best_i];
    let dphi = PI / grid.nphi as f64;
    let dt = 0.5 / (grid.npower - 1) as f64;
    let (phi0, t0) = (dphi * best_i as f64, split(best_j));
    let (mut phi_best, mut t_best) = (phi0, t0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..grid.nphi {
        let phi = phi0 + dphi * rng.random_range(-1.0..1.0);
        let t = (t0 + dt * rng.random_range(-1.0..1.0)).clamp(0.5, 1.0);
        let v = score(objective(&param(phi, t).matrix()));
        if v > best_val {
            best_val = v;
            phi_best = phi;
            t_best = t;
        }
    }

    let param = param(phi_best.rem_euclid(PI), t_best);
    let s_best = validate_covariance(param.matrix(), power)?;
    Ok(GridOptimum { param, s_best, rate: best_val })
}

/// `(1/2) log(det(I + D S) / (1 + g^T S g))` for symmetric `D`.
fn log_det_ratio(d: &SymMat2, det_d: f64, g: Vec2, s: &SymMat2) -> f64 {
    let trace_ds = d.xx * s.xx + 2.0 * d.xy * s.xy + d.yy * s.yy;
    let main = 1.0 + trace_ds + det_d * s.det();
    0.5 * (main / (1.0 + s.quad(g))).ln()
}

/// Grid search of the Gaussian secrecy rate over all feasible covariances.
pub fn brute_force_gaussian(ch: &WiretapChannel, grid: GridSpec, seed: u64) -> Result<GridOptimum> {
    let d = ch.hth();
    let det_d = d.det();
    maximize_on_face(ch.power, grid, seed, |s| log_det_ratio(&d, det_d, ch.g, s))
}

/// Grid search of the correlated-noise upper bound `U(S, a)` over `S`.
pub fn brute_force_upper(ch: &WiretapChannel, a: Vec2, grid: GridSpec, seed: u64) -> Result<GridOptimum> {
    let d = NoiseCorrelation::new(a)?.bound_matrix(ch);
    let det_d = d.det();
    maximize_on_face(ch.power, grid, seed, |s| log_det_ratio(&d, det_d, ch.g, s))
}

/// KKT residuals of `max log det(I + D S) - log(1 + g^T S g)` at a unit-rank `S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    /// Multiplier of the power constraint, `q^T G q`.
    pub lambda: f64,
    /// `|G q - lambda q|`, scaled by `max(1, |G|)`.
    pub residual_stationarity: f64,
    /// `|C S|` with `C = lambda I - G`, scaled.
    pub residual_complementarity: f64,
    /// `|lambda (tr S - P)|`.
    pub residual_slackness: f64,
    /// Smallest eigenvalue of `C`; must be non-negative.
    pub psd_margin_c: f64,
    pub passes: bool,
}

pub fn kkt_check(d: &Mat2, g: Vec2, power: f64, s: &CovMat) -> Result<KktReport> {
    let sm = s.matrix();
    let e = sym_eig2(sm);
    let scale_s = power.max(1.0);
    if e.values[0] <= tol::KKT * scale_s || e.values[1] > tol::KKT * scale_s {
        return Err(SecrecyError::NotUnitRank { min_eig: e.values[1] });
    }
    let q = e.vectors[0];
    inv2(d)?;
    let gain = inv2(&(Mat2::IDENTITY + *d * sm.to_mat()))? * *d;
    let gradient = gain - g.outer().to_mat() * (1.0 / (1.0 + sm.quad(g)));
    let scale = gradient.max_abs().max(1.0);

    let gq = gradient * q;
    let lambda = q.dot(gq);
    let residual_stationarity = (gq - q * lambda).max_abs() / scale;
    let c = Mat2::IDENTITY * lambda - gradient;
    let residual_complementarity = (c * sm.to_mat()).max_abs() / (scale * scale_s);
    let residual_slackness = (lambda * (s.trace() - power)).abs();
    let psd_margin_c = sym_eig2(&c.sym_part()).values[1];

    let passes = residual_stationarity <= tol::KKT
        && residual_complementarity <= tol::KKT
        && residual_slackness <= tol::KKT * scale_s
        && psd_margin_c >= -tol::KKT * scale
        && lambda >= -tol::KKT;
    Ok(KktReport {
        lambda,
        residual_stationarity,
        residual_complementarity,
        residual_slackness,
        psd_margin_c,
        passes,
    })
}

/// The quadratic in `gamma = g^T S g` that a full-rank KKT point would have
/// to satisfy, and whether it has a non-negative root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticRoots {
    /// `[1, 1 + g^T D^-1 g, g^T D^-1 g + (|g|^2 / lambda)(g^T D^-1 g - 1)]`.
    pub coefficients: [f64; 3],
    /// Real roots, descending, if any.
    pub roots: Option<[f64; 2]>,
    /// Both coefficients after the leading one are positive, so no root is
    /// non-negative.
    pub passes: bool,
}

pub fn no_nonneg_roots(d: &Mat2, g: Vec2, lambda: f64) -> Result<QuadraticRoots> {
    let coupling = g.dot(inv2(d)? * g);
    if coupling < 1.0 {
        return Err(SecrecyError::PreconditionFailed(format!("g^T D^-1 g = {coupling} < 1")));
    }
    if !(lambda > 0.0) {
        return Err(SecrecyError::PreconditionFailed(format!("lambda = {lambda} must be positive")));
    }
    let linear = 1.0 + coupling;
    let constant = coupling + g.norm_sq() / lambda * (coupling - 1.0);
    let disc = linear * linear - 4.0 * constant;
    let roots = (disc >= 0.0).then(|| {
        let s = disc.sqrt();
        [0.5 * (-linear + s), 0.5 * (-linear - s)]
    });
    let signs_ok = linear > 0.0 && constant > 0.0;
    let roots_ok = roots.is_none_or(|r| r[0] < 0.0);
    Ok(QuadraticRoots { coefficients: [1.0, linear, constant], roots, passes: signs_ok && roots_ok })
}

/// Result of minimizing the grid upper bound over sampled correlations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinOverA {
    /// Best sampled correlation (the first sample is always `a = 0`).
    pub a_best: Vec2,
    pub value: f64,
    /// Grid upper bound at `a = 0`.
    pub independent_value: f64,
    pub a_star: Vec2,
    pub a_star_value: f64,
    /// Closed-form achievable rate.
    pub lower: f64,
    pub evaluated: usize,
    /// Every sampled bound is at least `lower - tolerance`.
    pub sound: bool,
    /// `a_star_value <= value + tolerance`.
    pub a_star_dominates: bool,
    pub tolerance: f64,
}

/// Uniform sample from the open disk `|a| < 1 - NORM`.
pub fn sample_unit_disk<R: Rng>(rng: &mut R) -> Vec2 {
    loop {
        let r = rng.random::<f64>().sqrt();
        let a = Vec2::from_angle(rng.random_range(0.0..2.0 * PI)) * r;
        if a.norm() < 1.0 - tol::NORM {
            return a;
        }
    }
}

pub fn min_over_a(ch: &WiretapChannel, samples: usize, seed: u64, grid: GridSpec) -> Result<MinOverA> {
    let class = classify(ch)?;
    if !class.is_general() {
        return Err(SecrecyError::PreconditionFailed(format!(
            "minimizing over a needs a general channel, got {}",
            class.name()
        )));
    }
    let beam = optimal_beam(ch)?;
    let tight = optimize_alpha(ch, orth_perp(beam.q_a))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates = vec![Vec2::ZERO];
    candidates.extend((0..samples).map(|_| sample_unit_disk(&mut rng)));
    let values = candidates
        .par_iter()
        .map(|a| brute_force_upper(ch, *a, grid, seed).map(|o| o.rate))
        .collect::<Result<Vec<f64>>>()?;

    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    let a_star_value = brute_force_upper(ch, tight.a_star, grid, seed)?.rate;
    let tolerance = GRID_TOL;
    Ok(MinOverA {
        a_best: candidates[best],
        value: values[best],
        independent_value: values[0],
        a_star: tight.a_star,
        a_star_value,
        lower: beam.rate,
        evaluated: candidates.len(),
        sound: values[best] >= beam.rate - tolerance,
        a_star_dominates: a_star_value <= values[best] + tolerance,
        tolerance,
    })
}

/// Channel with i.i.d. standard normal `H` and `g` and log-uniform
/// `P in [0.1, 10]`, resampled until it classifies as general. Returns the
/// channel and the number of draws it took.
pub fn random_general_channel<R: Rng>(rng: &mut R) -> (WiretapChannel, usize) {
    let mut attempts = 0;
    loop {
        attempts += 1;
        let mut n = || rng.sample::<f64, _>(StandardNormal);
        let h = Mat2::new(n(), n(), n(), n());
        let g = Vec2::new(n(), n());
        let power = 10f64.powf(rng.random_range(-1.0..1.0));
        let Ok(ch) = WiretapChannel::new(h, g, power) else { continue };
        if matches!(classify(&ch), Ok(c) if c.is_general()) {
            return (ch, attempts);
        }
    }
}

/// `count` general channels from one seeded stream, plus the total number of
/// draws (the acceptance rate is `count / draws`).
pub fn random_general_channels(seed: u64, count: usize) -> (Vec<WiretapChannel>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = 0;
    let channels = (0..count)
        .map(|_| {
            let (ch, n) = random_general_channel(&mut rng);
            draws += n;
            ch
        })
        .collect();
    (channels, draws)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::achievable::optimal_beam;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, LN_2};

    fn example_a() -> WiretapChannel {
        WiretapChannel::new(Mat2::IDENTITY, Vec2::new(2.0, 0.0), 1.0).unwrap()
    }

    #[test]
    fn cov_param_is_feasible() {
        let p = CovParam { phi: 0.7, p1: 1.5, p2: 0.5 };
        let s = p.matrix();
        assert_relative_eq!(s.trace(), 2.0, epsilon = 1e-15);
        let e = sym_eig2(&s);
        assert_relative_eq!(e.values[0], 1.5, epsilon = 1e-14);
        assert_relative_eq!(e.values[1], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn grid_finds_example_a_optimum() {
        let best = brute_force_gaussian(&example_a(), GridSpec::square(256), 1).unwrap();
        assert!(best.rate <= 0.5 * LN_2 + 1e-15);
        assert!(best.rate >= 0.5 * LN_2 - 1e-6);
        assert!(best.param.p2 <= 1e-3);
        assert!((best.param.phi - FRAC_PI_2).abs() < 0.02);
    }

    /// Degraded `H = I, g = (0.5, 0), P = 1`: the optimum is diagonal with
    /// `s_xx = x` maximizing `log(1 + x) + log(2 - x) - log(1 + x / 4)`.
    #[test]
    fn grid_matches_degraded_water_level() {
        let ch = WiretapChannel::new(Mat2::IDENTITY, Vec2::new(0.5, 0.0), 1.0).unwrap();
        let f = |x: f64| 0.5 * ((1.0 + x).ln() + (2.0 - x).ln() - (1.0 + x / 4.0).ln());
        let fp = |x: f64| 1.0 / (1.0 + x) - 1.0 / (2.0 - x) - 1.0 / (4.0 + x);
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if fp(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let exact = f(0.5 * (lo + hi)).max(f(0.0));
        let best = brute_force_gaussian(&ch, GridSpec::square(256), 4).unwrap();
        assert!(best.rate <= exact + 1e-12);
        assert!(best.rate >= exact - 1e-6, "{} vs {exact}", best.rate);
        // full-rank optimum beats the best beam here
        let beam = optimal_beam(&ch).unwrap();
        assert!(best.rate > beam.rate + 1e-3);
    }

    #[test]
    fn grid_is_deterministic() {
        let ch = example_a();
        let a = brute_force_gaussian(&ch, GridSpec::square(64), 9).unwrap();
        let b = brute_force_gaussian(&ch, GridSpec::square(64), 9).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| brute_force_gaussian(&ch, GridSpec::square(64), 9).unwrap());
        assert_eq!(a, c);
    }

    #[test]
    fn kkt_examples() {
        let ch = example_a();
        let opt = CovMat::beam(1.0, Vec2::new(0.0, 1.0)).unwrap();
        let r = kkt_check(&ch.hth().to_mat(), ch.g, 1.0, &opt).unwrap();
        assert!(r.passes, "{r:?}");
        assert_relative_eq!(r.lambda, 0.5, epsilon = 1e-15);

        let along_g = CovMat::beam(1.0, Vec2::new(1.0, 0.0)).unwrap();
        let r = kkt_check(&ch.hth().to_mat(), ch.g, 1.0, &along_g).unwrap();
        assert!(!r.passes);
        assert!(r.psd_margin_c < 0.0 && r.lambda < 0.0);

        let full = validate_covariance(SymMat2::diag(0.5, 0.5), 1.0).unwrap();
        assert!(matches!(
            kkt_check(&ch.hth().to_mat(), ch.g, 1.0, &full),
            Err(SecrecyError::NotUnitRank { .. })
        ));
    }

    #[test]
    fn quadratic_examples() {
        let r = no_nonneg_roots(&Mat2::IDENTITY, Vec2::new(2.0, 0.0), 1.0).unwrap();
        assert_eq!(r.coefficients, [1.0, 5.0, 16.0]);
        assert!(r.passes);
        assert!(r.roots.is_none());

        // g^T D^-1 g = 1 exactly
        let r = no_nonneg_roots(&Mat2::diag(4.0, 1.0), Vec2::new(2.0, 0.0), 0.3).unwrap();
        assert_eq!(r.coefficients, [1.0, 2.0, 1.0]);
        assert!(r.passes);

        assert!(matches!(
            no_nonneg_roots(&Mat2::IDENTITY, Vec2::new(0.5, 0.0), 1.0),
            Err(SecrecyError::PreconditionFailed(_))
        ));
    }

    #[test]
    fn random_channels_are_general_and_seeded() {
        let (a, draws) = random_general_channels(5, 20);
        let (b, _) = random_general_channels(5, 20);
        assert_eq!(a, b);
        assert!(draws >= 20);
        assert!(a.iter().all(|c| classify(c).unwrap().is_general()));
        let (c, _) = random_general_channels(6, 20);
        assert_ne!(a, c);
    }

    #[test]
    fn disk_samples_are_admissible() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10_000 {
            assert!(sample_unit_disk(&mut rng).norm() < 1.0 - tol::NORM);
        }
    }
}
