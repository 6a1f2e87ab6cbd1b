//! Ergodic secrecy rates of a two-user downlink NOMA pair that shares
//! spectrum with `M` primary receivers, under imperfect channel estimates.
//!
//! * [`closed_form`] — exact rates for both users, their sum, and the
//!   large-interference-budget asymptote.
//! * [`oracles`] — Monte Carlo and nested quadrature, independent of the
//!   closed forms.
//! * [`power_alloc`] — the power split that holds the strong user at its
//!   OMA secrecy rate.
//! * [`cli`] — the `noma-secrecy` command-line front end.
//!
//! ```
//! use noma_secrecy::{closed_form, SystemConfig};
//!
//! let cfg = SystemConfig::reference();
//! let (strong, weak) = closed_form::esr_both(&cfg)?;
//! assert!(strong.total > 0.0 && weak.total > 0.0);
//! # Ok::<(), noma_secrecy::Error>(())
//! ```

pub mod cli;
pub mod closed_form;
pub mod error;
pub mod model;
pub mod oracles;
pub mod power_alloc;
pub mod special_fn;

pub use error::{Error, Result};
pub use model::SystemConfig;

/// The guide in `book/`, compiled here so its examples run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/closed-forms.md")]
    mod closed_forms {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/allocation.md")]
    mod allocation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
