//! Extreme-value statistics of the coupon collector problem.
//!
//! The continuous coupon collector with `n` types has inter-arrival gaps
//! `W_j ~ Exp((n-j)/n)`; rescaling gives an infinite sequence `X_i ~ Exp(i)`
//! whose supremum `M` is the scaled limit of the maximal gap. This crate
//! computes
//!
//! * the moments `E(M^k)` by three independent routes (alternating series,
//!   Hurwitz-zeta closed form, Bernoulli closed form),
//! * the probability that the m-th variable attains the maximum, together
//!   with its Hardy-Ramanujan asymptotics,
//! * exact finite-`n` counterparts of both quantities, and
//! * the supporting number theory: Bernoulli numbers, Hurwitz zeta values at
//!   rational arguments with denominator 2, 3, 4, 6, Euler's function and the
//!   integer partition function.
//!
//! A seeded Monte Carlo simulator validates the analytic results.

pub mod exact;
pub mod finite;
mod kahan;
pub mod maxprob;
pub mod moments;
pub mod partition;
pub mod quadrature;
pub mod simulator;
pub mod zeta;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An argument lies outside the supported range of the operation.
    #[error("range error: {0}")]
    Range(String),
    /// A series or quadrature could not reach the requested tolerance.
    /// Carries the partial value and the achieved error estimate so callers
    /// can report degraded results instead of silently using them.
    #[error("convergence error: {reason} (partial value {partial:e}, error estimate {error_estimate:e})")]
    Convergence {
        reason: String,
        partial: f64,
        error_estimate: f64,
    },
    /// A configuration field violates its invariant.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    /// The requested work exceeds the configured resource budget.
    #[error("resource budget exceeded: {0}")]
    Budget(String),
}

pub type Result<T> = std::result::Result<T, Error>;
