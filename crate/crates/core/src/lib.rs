//! Secrecy capacity of the 2-2-1 Gaussian MIMO wiretap channel.
//!
//! The transmitter and the legitimate receiver have two antennas each, the
//! eavesdropper has one. For a full-rank main channel with `|H^{-T} g| > 1`
//! the capacity is `(1/2) log lambda_1`, where `lambda_1` is the largest
//! generalized eigenvalue of `(I + P H^T H, I + P g g^T)`.
//!
//! * [`achievable`] computes the optimal Gaussian beam and its rate.
//! * [`converse`] builds the correlated-noise upper bound, checks the
//!   algebraic identities that make it meet the achievable rate, and
//!   assembles a [`converse::CapacityCertificate`].
//! * [`oracle`] provides independent brute-force and KKT checks.
//! * [`matkit`] holds the closed-form 2×2/3×3 linear algebra underneath.

// `!(x > y)` is used deliberately so that NaN fails every guard.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod achievable;
pub mod channel;
pub mod converse;
pub mod error;
pub mod matkit;
pub mod oracle;
pub mod tol;

pub use converse::{capacity_certificate, capacity_certificate_with, CapacityCertificate, CertificateOptions, Verdict};
pub use channel::{classify, ChannelClass, CovMat, WiretapChannel};

pub use error::{Result, SecrecyError};
pub use matkit::{Mat2, SymMat2, Vec2};
