//! Exact and asymptotic closed-form ergodic secrecy rates.
//!
//! Both users' rates split along the transmit-power rule
//! `P = min(P_max, I_p/g̃_p)`: the region `g̃_p ≤ Θ` runs at `P_max` and
//! contributes `J₁` kernels; the region `g̃_p > Θ` is interference-limited and
//! contributes `J₂` kernels summed over the max-gain expansion.
//!
//! # Kernels
//!
//! With `σ² = σ_ε²`,
//!
//! ```text
//! Ω·J₁(Ω) = ∫_{σ²}^∞ ln(1 + P_max x) e^{−x/Ω} dx
//! Ω·J₂(Ω) = ∫_Θ^∞ B e^{−B y} ∫_{σ²}^∞ ln(1 + I_p x / y) e^{−x/Ω} dx dy
//! ```
//!
//! Each kernel carries a prefactor `e^{−σ²/Ω}`, and every coefficient it is
//! multiplied by carries the matching `e^{+σ²/Ω}` (the shifted-support
//! factor). The evaluators here work with the reduced kernels
//! `J̄ = e^{σ²/Ω}·J` and drop both factors, so nothing overflows even when
//! `σ²` dwarfs a scaled link variance. [`j1`] and [`j2`] expose the kernels
//! themselves.
//!
//! In reduced form, with `u = (1/P_max + σ²)/Ω`, `c = I_p σ²`, `z = Θ + c`,
//! `q = 1/(I_p Ω)`, `x = B/q` and `ε(t) = eᵗ E₁(t)`:
//!
//! ```text
//! J̄₁ = ln(1 + σ² P_max) + ε(u)
//! J̄₂ = e^{−BΘ} [ ln(1 + c/Θ) − ε(BΘ) + ε(qz) + (ε(Bz) − ε(qz)) / (1 − x) ]
//! ```
//!
//! The last quotient has a removable singularity at `x = 1`.

use std::f64::consts::LOG2_E;

use crate::error::{Error, Result};
use crate::model::{derive_stats, phi_expansion, ChannelStats, PhiExpansion, SystemConfig, MIXTURE_SIGNS};
use crate::special_fn::{e1_scaled_raw, PositiveReal};

/// Totals in `[−NEGATIVE_SLACK, 0)` are reported as zero.
pub const NEGATIVE_SLACK: f64 = 1e-9;

/// `|1 − I_p Ω B| below which `J₂` is evaluated by symmetric perturbation.
pub const SINGULAR_BAND: f64 = 1e-8;
const SINGULAR_STEP: f64 = 1e-6;

/// A secrecy rate and the four integrals it is assembled from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsrBreakdown {
    /// bits/s/Hz.
    pub total: f64,
    /// `(𝓘₁, 𝓘₂, 𝓘₃, 𝓘₄)` with `total = 𝓘₁ + 𝓘₂ − 𝓘₃ − 𝓘₄`.
    pub components: [f64; 4],
    /// Set when rounding produced a tiny negative total that was clamped to zero.
    pub clamped: bool,
}

impl EsrBreakdown {
    pub fn from_components(components: [f64; 4]) -> Result<Self> {
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("secrecy-rate component"));
        }
        let [i1, i2, i3, i4] = components;
        let raw = i1 + i2 - i3 - i4;
        if raw < -NEGATIVE_SLACK {
            return Err(Error::NegativeRate(raw));
        }
        Ok(Self {
            total: raw.max(0.0),
            components,
            clamped: raw < 0.0,
        })
    }
}

/// `J₁(Ω)`.
///
/// ```
/// use noma_secrecy::closed_form::j1;
/// use noma_secrecy::special_fn::PositiveReal;
///
/// // Without estimation error J₁(1) = e^{0.1} E₁(0.1) at P_max = 10.
/// let v = j1(PositiveReal::new(1.0)?, PositiveReal::new(10.0)?, 0.0)?;
/// assert!((v - 2.014_642_544_708_452).abs() < 1e-12);
/// # Ok::<(), noma_secrecy::Error>(())
/// ```
pub fn j1(omega: PositiveReal, p_max: PositiveReal, sigma_eps2: f64) -> Result<f64> {
    check_sigma(sigma_eps2)?;
    let omega = omega.get();
    Ok((-sigma_eps2 / omega).exp() * j1_reduced(omega, p_max.get(), sigma_eps2))
}

/// `J₂(Ω)` for one term `B_η` of the max-gain expansion.
pub fn j2(
    omega: PositiveReal,
    b_eta: PositiveReal,
    theta: PositiveReal,
    i_peak: PositiveReal,
    sigma_eps2: f64,
) -> Result<f64> {
    check_sigma(sigma_eps2)?;
    let omega = omega.get();
    let reduced = j2_reduced(omega, b_eta.get(), theta.get(), i_peak.get(), sigma_eps2);
    Ok((-sigma_eps2 / omega).exp() * reduced)
}

fn check_sigma(sigma_eps2: f64) -> Result<()> {
    if sigma_eps2.is_finite() && sigma_eps2 >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "sigma_eps2",
            value: sigma_eps2,
        })
    }
}

/// `e^{σ²/Ω}·J₁(Ω)`.
pub(crate) fn j1_reduced(omega: f64, p_max: f64, s2: f64) -> f64 {
    (s2 * p_max).ln_1p() + e1_scaled_raw((1.0 / p_max + s2) / omega)
}

/// `e^{σ²/Ω}·J₂(Ω)`.
pub(crate) fn j2_reduced(omega: f64, b: f64, theta: f64, i_peak: f64, s2: f64) -> f64 {
    let x = i_peak * omega * b;
    if (1.0 - x).abs() < SINGULAR_BAND {
        let below = j2_reduced_regular(omega, b * (1.0 - SINGULAR_STEP), theta, i_peak, s2);
        let above = j2_reduced_regular(omega, b * (1.0 + SINGULAR_STEP), theta, i_peak, s2);
        return 0.5 * (below + above);
    }
    j2_reduced_regular(omega, b, theta, i_peak, s2)
}

fn j2_reduced_regular(omega: f64, b: f64, theta: f64, i_peak: f64, s2: f64) -> f64 {
    let bt = b * theta;
    let envelope = (-bt).exp();
    if envelope == 0.0 {
        return 0.0;
    }
    let c = i_peak * s2;
    let z = theta + c;
    let q = 1.0 / (i_peak * omega);
    let x = b / q;
    let eps_qz = e1_scaled_raw(q * z);
    let bracket = (c / theta).ln_1p() - e1_scaled_raw(bt) + eps_qz
        + (e1_scaled_raw(b * z) - eps_qz) / (1.0 - x);
    envelope * bracket
}

/// Shared state for one configuration.
struct Evaluator {
    stats: ChannelStats,
    phi: PhiExpansion,
    a_s: f64,
    s2: f64,
    p_max: f64,
    i_peak: f64,
    /// `Σ_η κ_η (1 − e^{−B_η Θ})`.
    bracket: f64,
}

impl Evaluator {
    fn new(config: &SystemConfig) -> Result<Self> {
        config.validate()?;
        let stats = derive_stats(config)?;
        let phi = phi_expansion(&stats.omega_tilde_pr())?;
        let bracket = phi.bracket(stats.theta);
        Ok(Self {
            stats,
            phi,
            a_s: config.a_s,
            s2: config.sigma_eps2,
            p_max: config.p_max,
            i_peak: config.i_peak,
            bracket,
        })
    }

    fn j1r(&self, omega: f64) -> f64 {
        j1_reduced(omega, self.p_max, self.s2)
    }

    /// `Σ_η κ_η J̄₂(Ω; B_η)`.
    fn phi_j2r(&self, omega: f64) -> f64 {
        let theta = self.stats.theta;
        self.phi
            .terms()
            .iter()
            .map(|t| t.kappa * j2_reduced(omega, t.b, theta, self.i_peak, self.s2))
            .sum()
    }

    fn strong(&self) -> [f64; 4] {
        let ot_e = self.stats.eve.omega_tilde;
        let (mut s1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0);
        for l in 0..3 {
            let sign = MIXTURE_SIGNS[l];
            let xi = self.stats.xi[l];
            let xi_e = self.stats.xi_e[l];
            let (w, we) = (self.a_s * xi, self.a_s * xi_e);
            // Â_ℓ 𝒞̂_e Ξ_{ℓ,e} and 𝒜̂_ℓ Ĉ_e Ξ_{ℓ,e}, exponentials cancelled.
            let rho = xi_e / xi;
            let tau = xi_e / ot_e;
            let (j1w, j1we) = (self.j1r(w), self.j1r(we));
            let (j2w, j2we) = (self.phi_j2r(w), self.phi_j2r(we));
            s1 += sign * (j1w - rho * j1we);
            s2 += sign * (j2w - rho * j2we);
            s3 += sign * tau * j1we;
            s4 += sign * tau * j2we;
        }
        [
            -LOG2_E * s1 * self.bracket,
            -LOG2_E * s2,
            -LOG2_E * s3 * self.bracket,
            -LOG2_E * s4,
        ]
    }

    fn weak(&self) -> [f64; 4] {
        let xi2 = self.stats.xi[1];
        let xi2e = self.stats.xi_e[1];
        let rho = xi2e / xi2;
        let tau = xi2e / self.stats.eve.omega_tilde;
        let a = self.a_s;

        let legit = |k: &dyn Fn(f64) -> f64| k(xi2) - rho * k(xi2e) - k(a * xi2) + rho * k(a * xi2e);
        let eve = |k: &dyn Fn(f64) -> f64| tau * (k(xi2e) - k(a * xi2e));
        let j1 = |w: f64| self.j1r(w);
        let j2 = |w: f64| self.phi_j2r(w);
        [
            -LOG2_E * self.bracket * legit(&j1),
            -LOG2_E * legit(&j2),
            -LOG2_E * self.bracket * eve(&j1),
            -LOG2_E * eve(&j2),
        ]
    }
}

/// Ergodic secrecy rate of the strong user.
pub fn esr_strong(config: &SystemConfig) -> Result<EsrBreakdown> {
    EsrBreakdown::from_components(Evaluator::new(config)?.strong())
}

/// Ergodic secrecy rate of the weak user.
pub fn esr_weak(config: &SystemConfig) -> Result<EsrBreakdown> {
    EsrBreakdown::from_components(Evaluator::new(config)?.weak())
}

/// Both users' rates; the expansion is built once.
pub fn esr_both(config: &SystemConfig) -> Result<(EsrBreakdown, EsrBreakdown)> {
    let eval = Evaluator::new(config)?;
    Ok((
        EsrBreakdown::from_components(eval.strong())?,
        EsrBreakdown::from_components(eval.weak())?,
    ))
}

/// Ergodic sum secrecy rate.
///
/// ```
/// use noma_secrecy::{closed_form::essr, SystemConfig};
///
/// let cfg = SystemConfig::reference().with_ip_db(10.0).with_pmax_db(50.0);
/// assert!(essr(&cfg)? > 0.0);
/// # Ok::<(), noma_secrecy::Error>(())
/// ```
pub fn essr(config: &SystemConfig) -> Result<f64> {
    let (s, w) = esr_both(config)?;
    Ok(s.total + w.total)
}

/// Per-user rates in the limit `I_p → ∞`, as `(strong, weak)`.
///
/// Neither value depends on the primary receivers.
pub fn esr_asymptotic_parts(config: &SystemConfig) -> Result<(f64, f64)> {
    config.validate()?;
    let stats = derive_stats(config)?;
    let (a, s2, p_max) = (config.a_s, config.sigma_eps2, config.p_max);
    let j1r = |w: f64| j1_reduced(w, p_max, s2);
    let ot_e = stats.eve.omega_tilde;

    let mut strong = 0.0;
    for l in 0..3 {
        let (xi, xi_e) = (stats.xi[l], stats.xi_e[l]);
        let j1we = j1r(a * xi_e);
        strong += MIXTURE_SIGNS[l] * (j1r(a * xi) - (xi_e / xi) * j1we - (xi_e / ot_e) * j1we);
    }

    let (xi2, xi2e) = (stats.xi[1], stats.xi_e[1]);
    let rho = xi2e / xi2;
    let tau = xi2e / ot_e;
    let weak = j1r(xi2) - rho * j1r(xi2e) - j1r(a * xi2) + rho * j1r(a * xi2e) - tau * j1r(xi2e)
        + tau * j1r(a * xi2e);

    let strong = LOG2_E * strong;
    let weak = LOG2_E * weak;
    if !(strong.is_finite() && weak.is_finite()) {
        return Err(Error::NonFinite("asymptotic secrecy rate"));
    }
    Ok((strong.max(0.0), weak.max(0.0)))
}

/// Ergodic sum secrecy rate in the limit `I_p → ∞`.
pub fn essr_asymptotic(config: &SystemConfig) -> Result<f64> {
    let (s, w) = esr_asymptotic_parts(config)?;
    Ok(s + w)
}
