use secrecy_core::achievable::{optimal_beam, optimal_miso_beam};
use secrecy_core::channel::reduce_rank_deficient;
use secrecy_core::oracle::{brute_force_gaussian, kkt_check, min_over_a, GridOptimum, GridSpec, KktReport, MinOverA, GRID_TOL};
use secrecy_core::{
    capacity_certificate_with, classify, tol, CapacityCertificate, CertificateOptions, ChannelClass, CovMat, Verdict,
};
use serde::Serialize;

use crate::io::{fmt_f64, load_channel, to_json, ChannelSpecFile, CliError};
use crate::{CapacityArgs, OracleArgs, RandomArgs, SweepArgs};

const TOL_ENV: &str = "SECRECY_TOL";

/// Tightness tolerance: `--tol`, then `SECRECY_TOL`, then the library default.
fn resolve_tolerance(flag: Option<f64>) -> Result<(f64, &'static str), CliError> {
    let (value, source) = match (flag, std::env::var(TOL_ENV)) {
        (Some(t), _) => (t, "flag"),
        (None, Ok(text)) => {
            let t = text
                .trim()
                .parse::<f64>()
                .map_err(|e| CliError::usage(format!("{TOL_ENV}={text:?}: {e}")))?;
            (t, "env")
        }
        (None, Err(_)) => (tol::CERT, "default"),
    };
    if !(value.is_finite() && value > 0.0) {
        return Err(CliError::usage(format!("tolerance must be a positive number, got {value}")));
    }
    Ok((value, source))
}

fn exit_code(verdict: Verdict) -> u8 {
    match verdict {
        Verdict::NotTight => 2,
        Verdict::Tight | Verdict::Inapplicable => 0,
    }
}

/// Positive part, applied only when reporting.
fn clamp(cert: &mut CapacityCertificate) {
    cert.capacity_nats = cert.capacity_nats.max(0.0);
    cert.capacity_bits = cert.capacity_bits.max(0.0);
}

#[derive(Serialize)]
struct CapacityReport<'a> {
    unit: &'static str,
    capacity: f64,
    tolerance_source: &'static str,
    #[serde(flatten)]
    certificate: &'a CapacityCertificate,
}

pub fn capacity(args: &CapacityArgs) -> Result<u8, CliError> {
    let ch = load_channel(&args.path)?;
    let (tolerance, source) = resolve_tolerance(args.tol)?;
    let opts = CertificateOptions { tolerance, ..CertificateOptions::default() };
    let mut cert = capacity_certificate_with(&ch, &opts)?;
    clamp(&mut cert);
    let (unit, value) = if args.bits { ("bits", cert.capacity_bits) } else { ("nats", cert.capacity_nats) };
    let report = CapacityReport { unit, capacity: value, tolerance_source: source, certificate: &cert };
    println!("{}", to_json(&report));
    Ok(exit_code(cert.verdict))
}

fn sweep_powers(pmin: f64, pmax: f64, steps: usize, log: bool) -> Vec<f64> {
    let last = (steps - 1) as f64;
    (0..steps)
        .map(|i| {
            let t = i as f64 / last;
            if i + 1 == steps {
                pmax
            } else if log {
                pmin * (pmax / pmin).powf(t)
            } else {
                pmin + (pmax - pmin) * t
            }
        })
        .collect()
}

pub fn sweep(args: &SweepArgs) -> Result<u8, CliError> {
    if args.steps < 2 {
        return Err(CliError::usage(format!("--steps must be at least 2, got {}", args.steps)));
    }
    if !(args.pmin.is_finite() && args.pmax.is_finite() && args.pmin > 0.0 && args.pmin <= args.pmax) {
        return Err(CliError::usage(format!(
            "need 0 < pmin <= pmax, got pmin = {}, pmax = {}",
            args.pmin, args.pmax
        )));
    }
    let ch = load_channel(&args.path)?;
    let (tolerance, _) = resolve_tolerance(args.tol)?;
    let opts = CertificateOptions { tolerance, ..CertificateOptions::default() };

    let mut rows = Vec::with_capacity(args.steps);
    for p in sweep_powers(args.pmin, args.pmax, args.steps, args.log_spacing) {
        let mut cert = capacity_certificate_with(&ch.with_power(p)?, &opts)?;
        clamp(&mut cert);
        rows.push((p, cert));
    }

    let mut code = 0;
    println!("P,capacity_nats,capacity_bits,lambda1,verdict");
    for (p, cert) in &rows {
        println!(
            "{},{},{},{},{}",
            fmt_f64(*p),
            fmt_f64(cert.capacity_nats),
            fmt_f64(cert.capacity_bits),
            fmt_f64(cert.lambda1),
            cert.verdict.as_str()
        );
        code = code.max(exit_code(cert.verdict));
    }
    for pair in rows.windows(2) {
        let (prev, next) = (&pair[0].1, &pair[1].1);
        let slack = if prev.verdict == Verdict::Tight { tolerance } else { GRID_TOL };
        if next.capacity_nats < prev.capacity_nats - slack * prev.capacity_nats.abs().max(1.0) {
            eprintln!(
                "warning: capacity decreased from {} at P = {} to {} at P = {}",
                prev.capacity_nats, pair[0].0, next.capacity_nats, pair[1].0
            );
        }
    }
    Ok(code)
}

#[derive(Serialize)]
struct GridSummary {
    rate: f64,
    phi: f64,
    p1: f64,
    p2: f64,
    unit_rank_margin: f64,
}

impl GridSummary {
    fn new(opt: &GridOptimum, power: f64) -> Self {
        GridSummary {
            rate: opt.rate,
            phi: opt.param.phi,
            p1: opt.param.p1,
            p2: opt.param.p2,
            unit_rank_margin: opt.unit_rank_margin(power),
        }
    }
}

#[derive(Serialize)]
struct OracleReport {
    channel: ChannelSpecFile,
    class: &'static str,
    seed: u64,
    grid: GridSpec,
    samples: usize,
    warnings: Vec<String>,
    closed_form: f64,
    grid_optimum: GridSummary,
    gap: f64,
    kkt: Option<KktReport>,
    min_over_a: Option<MinOverA>,
    failed_checks: Vec<&'static str>,
    passes: bool,
}

pub fn oracle(args: &OracleArgs) -> Result<u8, CliError> {
    if args.grid < 2 {
        return Err(CliError::usage(format!("--grid must be at least 2, got {}", args.grid)));
    }
    let ch = load_channel(&args.path)?;
    let class = classify(&ch)?;
    let grid = GridSpec::square(args.grid);
    let mut warnings = Vec::new();
    if grid.below_recommended() {
        warnings.push(format!(
            "resolution below recommended minimum ({} < {})",
            args.grid,
            secrecy_core::oracle::MIN_RECOMMENDED_GRID
        ));
    }

    let best = brute_force_gaussian(&ch, grid, args.seed)?;
    let mut failed = Vec::new();
    let (closed_form, kkt, min_a) = match class {
        ChannelClass::General { .. } => {
            let beam = optimal_beam(&ch)?;
            let s = CovMat::beam(ch.power, beam.q_a)?;
            let kkt = kkt_check(&ch.hth().to_mat(), ch.g, ch.power, &s)?;
            let min_a = min_over_a(&ch, args.samples, args.seed, grid)?;
            if !kkt.passes {
                failed.push("kkt");
            }
            if !min_a.sound {
                failed.push("upper_bound_validity");
            }
            if !min_a.a_star_dominates {
                failed.push("a_star_minimal");
            }
            if best.unit_rank_margin(ch.power) > GRID_TOL {
                failed.push("unit_rank");
            }
            (beam.rate, Some(kkt), Some(min_a))
        }
        ChannelClass::ReducedRank => (optimal_miso_beam(&reduce_rank_deficient(&ch)?)?.rate, None, None),
        ChannelClass::Degraded { .. } => {
            warnings.push("degraded channel: the beam rate is only a lower bound, no KKT or correlation checks".into());
            (optimal_beam(&ch)?.rate, None, None)
        }
    };
    let gap = closed_form - best.rate;
    if gap > GRID_TOL {
        failed.push("grid_gap");
    }
    if class.is_general() && best.rate > closed_form * (1.0 + 1e-12) + 1e-15 {
        failed.push("grid_above_closed_form");
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let report = OracleReport {
        channel: ChannelSpecFile::from(&ch),
        class: class.name(),
        seed: args.seed,
        grid,
        samples: args.samples,
        warnings,
        closed_form,
        grid_optimum: GridSummary::new(&best, ch.power),
        gap,
        kkt,
        min_over_a: min_a,
        passes: failed.is_empty(),
        failed_checks: failed,
    };
    println!("{}", to_json(&report));
    Ok(if report.passes { 0 } else { 2 })
}

pub fn random(args: &RandomArgs) -> Result<u8, CliError> {
    if args.count == 0 {
        return Err(CliError::usage("--count must be at least 1"));
    }
    let (channels, _) = secrecy_core::oracle::random_general_channels(args.seed, args.count);
    for ch in &channels {
        println!("{}", to_json(&ChannelSpecFile::from(ch)));
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_powers_hit_both_ends() {
        assert_eq!(sweep_powers(1.0, 4.0, 2, false), vec![1.0, 4.0]);
        assert_eq!(sweep_powers(1.0, 3.0, 3, false), vec![1.0, 2.0, 3.0]);
        let p = sweep_powers(0.1, 10.0, 3, true);
        assert_eq!(p[0], 0.1);
        assert!((p[1] - 1.0).abs() < 1e-15);
        assert_eq!(p[2], 10.0);
    }

    #[test]
    fn exact_float_formatting_round_trips() {
        for x in [0.5, 1.0 / 3.0, 0.1 + 0.2, 1e-300, -2.5e17, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(to_json(&[f64::NAN, 0.0]), "[null,0.0]");
    }

    #[test]
    fn spec_file_rejects_unknown_fields() {
        let bad = r#"{"H": [[1,0],[0,1]], "g": [2,0], "P": 1, "extra": 3}"#;
        assert!(serde_json::from_str::<ChannelSpecFile>(bad).is_err());
        let good = r#"{"H": [[1,0],[0,1]], "g": [2,0], "P": 1}"#;
        let spec: ChannelSpecFile = serde_json::from_str(good).unwrap();
        assert_eq!(spec.channel().unwrap().power, 1.0);
    }
}
