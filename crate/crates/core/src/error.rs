use thiserror::Error;

use crate::model::Link;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A special-function or kernel argument fell outside its domain.
    #[error("domain error: {what} must be finite and positive, got {value}")]
    Domain { what: &'static str, value: f64 },

    /// A scenario field violates its invariant.
    #[error("invalid configuration field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    /// The estimation-error variance swallows a link: Ω_i ≤ σ_ε².
    #[error(
        "model invalid on link {link}: path gain {omega:e} does not exceed the estimation-error variance {sigma_eps2:e}"
    )]
    ModelInvalid {
        link: Link,
        omega: f64,
        sigma_eps2: f64,
    },

    #[error("too many primary receivers: {m} (at most {max} supported)")]
    TooManyPrimaryReceivers { m: usize, max: usize },

    /// Adaptive quadrature could not reach the requested accuracy.
    #[error("quadrature failed to converge: {0}")]
    Convergence(String),

    /// An evaluation produced NaN or an infinity.
    #[error("non-finite {0}")]
    NonFinite(&'static str),

    /// A rate that is provably non-negative came out clearly negative.
    #[error("internal consistency error: secrecy rate evaluated to {0:e}")]
    NegativeRate(f64),

    #[error("strong-user rate is not monotone in a_s: g({a_lo}) = {g_lo:e} > g({a_hi}) = {g_hi:e}")]
    NonMonotone {
        a_lo: f64,
        g_lo: f64,
        a_hi: f64,
        g_hi: f64,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
