//! Independent ground truth for the closed forms: a Monte Carlo simulator of
//! the expectation definitions and a nested-quadrature engine.

pub mod gauss_kronrod;
pub mod monte_carlo;
pub mod quadrature;

pub use monte_carlo::{mc_esr, mc_esr_with, McEstimate};
pub use quadrature::{quad_breakdown, quad_esr_strong, quad_esr_weak, quad_oma_esr, quad_oma_esr_with, QuadBreakdown};

/// Which secrecy rate to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateMode {
    NomaStrong,
    NomaWeak,
    OmaStrong,
    OmaWeak,
}

impl RateMode {
    pub const ALL: [RateMode; 4] = [RateMode::NomaStrong, RateMode::NomaWeak, RateMode::OmaStrong, RateMode::OmaWeak];

    pub fn name(self) -> &'static str {
        match self {
            RateMode::NomaStrong => "noma_strong",
            RateMode::NomaWeak => "noma_weak",
            RateMode::OmaStrong => "oma_strong",
            RateMode::OmaWeak => "oma_weak",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OmaUser {
    Strong,
    Weak,
}

/// How the OMA rates treat the estimation-error term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum OmaGains {
    /// `½ log₂((1 + g̃_k P)/(1 + g̃_e P))`: no estimation-noise term.
    #[default]
    Unshifted,
    /// Adds `σ_ε²` to every gain, matching the NOMA rates.
    WithEstimationNoise,
}
