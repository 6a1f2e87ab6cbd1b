//! Scenario parameters, derived link statistics and the distribution
//! expansions of the ordered gains.
//!
//! All quantities are linear and noise-normalized. Conversion from dB happens
//! once, at the CLI boundary, via [`db_to_linear`].
//!
//! Estimated link gains are exponential with mean `Ω̃_i = Ω_i − σ_ε²`, where
//! `Ω_i = d_i^{−α}`. The two secondary users are ordered per realization:
//! the strong user sees `max(g̃_n, g̃_f)`, the weak user `min(g̃_n, g̃_f)`.
//! Their laws are short signed mixtures of exponentials with the scales
//! `Ξ₁ = Ω̃_n`, `Ξ₂ = (Ω̃_n⁻¹ + Ω̃_f⁻¹)⁻¹` and `Ξ₃ = Ω̃_f`.

use std::fmt;

use crate::error::{Error, Result};

/// Largest number of primary receivers accepted by [`phi_expansion`].
pub const MAX_PRIMARY_RECEIVERS: usize = 20;

/// `10^{db/10}`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// A transmitter-to-node link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Link {
    /// Secondary transmitter to primary receiver `m` (zero-based).
    Primary(usize),
    Near,
    Far,
    Eve,
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Link::Primary(m) => write!(f, "PR{} (d_pr[{}])", m + 1, m),
            Link::Near => f.write_str("near user (d_near)"),
            Link::Far => f.write_str("far user (d_far)"),
            Link::Eve => f.write_str("eavesdropper (d_eve)"),
        }
    }
}

/// Every scenario input.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Distances to the primary receivers (meters); its length is `M`.
    pub d_pr: Vec<f64>,
    pub d_near: f64,
    pub d_far: f64,
    pub d_eve: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// Channel-estimation error variance σ_ε².
    pub sigma_eps2: f64,
    /// Maximum transmit power of the secondary transmitter.
    pub p_max: f64,
    /// Peak interference tolerated at every primary receiver.
    pub i_peak: f64,
    /// Power fraction of the strong user. The weak user gets `1 − a_s`.
    pub a_s: f64,
}

impl SystemConfig {
    /// The default evaluation scenario: users at 30 m and 100 m, an
    /// eavesdropper at 150 m, four primary receivers at 200–215 m,
    /// `σ_ε² = 2·10⁻⁵` and free-space path loss. `P_max = 50 dB`,
    /// `I_p = 10 dB` and `a_s = 0.2`.
    pub fn reference() -> Self {
        Self {
            d_pr: vec![200.0, 205.0, 210.0, 215.0],
            d_near: 30.0,
            d_far: 100.0,
            d_eve: 150.0,
            alpha: 2.0,
            sigma_eps2: 2e-5,
            p_max: db_to_linear(50.0),
            i_peak: db_to_linear(10.0),
            a_s: 0.2,
        }
    }

    pub fn m_prs(&self) -> usize {
        self.d_pr.len()
    }

    pub fn a_w(&self) -> f64 {
        1.0 - self.a_s
    }

    pub fn with_a_s(mut self, a_s: f64) -> Self {
        self.a_s = a_s;
        self
    }

    pub fn with_ip_db(mut self, db: f64) -> Self {
        self.i_peak = db_to_linear(db);
        self
    }

    pub fn with_pmax_db(mut self, db: f64) -> Self {
        self.p_max = db_to_linear(db);
        self
    }

    pub fn with_sigma_eps2(mut self, sigma_eps2: f64) -> Self {
        self.sigma_eps2 = sigma_eps2;
        self
    }

    pub fn with_d_pr(mut self, d_pr: Vec<f64>) -> Self {
        self.d_pr = d_pr;
        self
    }

    /// Checks every invariant except the range of `a_s`.
    pub fn validate_scenario(&self) -> Result<()> {
        if self.d_pr.is_empty() {
            return Err(invalid("d_pr", "at least one primary receiver is required"));
        }
        if self.d_pr.len() > MAX_PRIMARY_RECEIVERS {
            return Err(Error::TooManyPrimaryReceivers {
                m: self.d_pr.len(),
                max: MAX_PRIMARY_RECEIVERS,
            });
        }
        for &d in &self.d_pr {
            positive("d_pr", d)?;
        }
        positive("d_near", self.d_near)?;
        positive("d_far", self.d_far)?;
        positive("d_eve", self.d_eve)?;
        positive("alpha", self.alpha)?;
        positive("p_max", self.p_max)?;
        positive("i_peak", self.i_peak)?;
        if !(self.sigma_eps2.is_finite() && self.sigma_eps2 >= 0.0) {
            return Err(invalid(
                "sigma_eps2",
                format!("must be finite and non-negative, got {}", self.sigma_eps2),
            ));
        }
        for (link, d) in self.links() {
            let omega = d.powf(-self.alpha);
            if omega <= self.sigma_eps2 {
                return Err(Error::ModelInvalid {
                    link,
                    omega,
                    sigma_eps2: self.sigma_eps2,
                });
            }
        }
        Ok(())
    }

    /// Checks every invariant, including `0 < a_s < 0.5`.
    pub fn validate(&self) -> Result<()> {
        self.validate_scenario()?;
        validate_a_s(self.a_s)
    }

    fn links(&self) -> impl Iterator<Item = (Link, f64)> + '_ {
        self.d_pr
            .iter()
            .enumerate()
            .map(|(m, &d)| (Link::Primary(m), d))
            .chain([
                (Link::Near, self.d_near),
                (Link::Far, self.d_far),
                (Link::Eve, self.d_eve),
            ])
    }
}

pub(crate) fn validate_a_s(a_s: f64) -> Result<()> {
    if a_s > 0.0 && a_s < 0.5 {
        Ok(())
    } else {
        Err(invalid("a_s", format!("must lie in (0, 0.5), got {a_s}")))
    }
}

fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidConfig {
        field,
        reason: reason.into(),
    }
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be finite and positive, got {v}")))
    }
}

/// Mean gain of one link, before and after removing the estimation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkStats {
    /// `Ω = d^{−α}`.
    pub omega: f64,
    /// `Ω̃ = Ω − σ_ε²`.
    pub omega_tilde: f64,
}

/// Statistics derived from a [`SystemConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStats {
    pub primary: Vec<LinkStats>,
    pub near: LinkStats,
    pub far: LinkStats,
    pub eve: LinkStats,
    /// `(Ξ₁, Ξ₂, Ξ₃) = (Ω̃_n, Ω̃_{n,f}, Ω̃_f)`.
    pub xi: [f64; 3],
    /// `Ξ_{ℓ,e} = (Ξ_ℓ⁻¹ + Ω̃_e⁻¹)⁻¹`.
    pub xi_e: [f64; 3],
    /// `Θ = I_p / P_max`.
    pub theta: f64,
}

impl ChannelStats {
    pub fn link(&self, link: Link) -> LinkStats {
        match link {
            Link::Primary(m) => self.primary[m],
            Link::Near => self.near,
            Link::Far => self.far,
            Link::Eve => self.eve,
        }
    }

    pub fn omega_tilde_pr(&self) -> Vec<f64> {
        self.primary.iter().map(|l| l.omega_tilde).collect()
    }
}

fn harmonic(a: f64, b: f64) -> f64 {
    a * b / (a + b)
}

/// Derives per-link variances and the composite scales.
pub fn derive_stats(config: &SystemConfig) -> Result<ChannelStats> {
    config.validate_scenario()?;
    let s2 = config.sigma_eps2;
    let link = |d: f64| {
        let omega = d.powf(-config.alpha);
        LinkStats {
            omega,
            omega_tilde: omega - s2,
        }
    };
    let primary: Vec<_> = config.d_pr.iter().map(|&d| link(d)).collect();
    let near = link(config.d_near);
    let far = link(config.d_far);
    let eve = link(config.d_eve);

    let xi = [
        near.omega_tilde,
        harmonic(near.omega_tilde, far.omega_tilde),
        far.omega_tilde,
    ];
    let xi_e = xi.map(|x| harmonic(x, eve.omega_tilde));
    Ok(ChannelStats {
        primary,
        near,
        far,
        eve,
        xi,
        xi_e,
        theta: config.i_peak / config.p_max,
    })
}

/// Coefficients of the shifted gain laws.
///
/// Hatted quantities belong to gains scaled by `a_s`, checked ones to the
/// unscaled gains; every family carries the `exp(σ_ε²/scale)` factor that
/// comes from shifting the support to start at `σ_ε²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSet {
    /// `Â_ℓ = (−1)^{ℓ+1}/(a_s Ξ_ℓ)·exp(σ_ε²/(a_s Ξ_ℓ))`.
    pub a_hat: [f64; 3],
    /// `𝒜̂_ℓ = a_s Ξ_ℓ Â_ℓ`.
    pub a_hat_cal: [f64; 3],
    /// `Ǎ₂ = exp(σ_ε²/Ξ₂)/Ξ₂`.
    pub a_check: f64,
    /// `𝒜̌₂ = Ξ₂ Ǎ₂`.
    pub a_check_cal: f64,
    /// `Ĉ_e = exp(σ_ε²/(a_s Ω̃_e))/(a_s Ω̃_e)`.
    pub c_hat_e: f64,
    /// `𝒞̂_e = a_s Ω̃_e Ĉ_e`.
    pub c_hat_scr_e: f64,
    /// `Č_e = exp(σ_ε²/Ω̃_e)/Ω̃_e`.
    pub c_check_e: f64,
    /// `𝒞̌_e = Ω̃_e Č_e`.
    pub c_check_scr_e: f64,
}

/// `(−1)^{ℓ+1}` for `ℓ = 1, 2, 3`.
pub const MIXTURE_SIGNS: [f64; 3] = [1.0, -1.0, 1.0];

/// Computes the coefficient families for a given strong-user power fraction.
///
/// The exponential factors overflow once `σ_ε²` is large against a scaled
/// link variance; the closed-form evaluators never use these raw products
/// and cancel the exponentials analytically instead.
pub fn coefficient_set(stats: &ChannelStats, a_s: f64, sigma_eps2: f64) -> Result<CoefficientSet> {
    validate_a_s(a_s)?;
    let shifted = |scale: f64| (sigma_eps2 / scale).exp() / scale;

    let mut a_hat = [0.0; 3];
    let mut a_hat_cal = [0.0; 3];
    for l in 0..3 {
        let scale = a_s * stats.xi[l];
        a_hat[l] = MIXTURE_SIGNS[l] * shifted(scale);
        a_hat_cal[l] = scale * a_hat[l];
    }
    let a_check = shifted(stats.xi[1]);
    let c_hat_e = shifted(a_s * stats.eve.omega_tilde);
    let c_check_e = shifted(stats.eve.omega_tilde);
    Ok(CoefficientSet {
        a_hat,
        a_hat_cal,
        a_check,
        a_check_cal: stats.xi[1] * a_check,
        c_hat_e,
        c_hat_scr_e: a_s * stats.eve.omega_tilde * c_hat_e,
        c_check_e,
        c_check_scr_e: stats.eve.omega_tilde * c_check_e,
    })
}

/// One signed exponential of the max-gain expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiTerm {
    /// `κ_η = Π_m (−1)^{η_m}`, either `+1` or `−1`.
    pub kappa: f64,
    /// `B_η = Σ_m η_m / Ω̃_m`.
    pub b: f64,
}

/// Inclusion–exclusion expansion of the law of `g̃_p = max_m g̃_m`.
///
/// With `Φ` the nonzero binary vectors of length `M`,
/// `f(x) = −Σ_η κ_η B_η e^{−B_η x}` and `F(x) = Π_m (1 − e^{−x/Ω̃_m})`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiExpansion {
    terms: Vec<PhiTerm>,
}

impl PhiExpansion {
    pub fn terms(&self) -> &[PhiTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Σ_η κ_η`, which is always `−1`.
    pub fn kappa_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.kappa).sum()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        -self
            .terms
            .iter()
            .map(|t| t.kappa * t.b * (-t.b * x).exp())
            .sum::<f64>()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        // 1 − e^{−Bx} through expm1 keeps small-x accuracy.
        self.terms
            .iter()
            .map(|t| t.kappa * (-t.b * x).exp_m1())
            .sum()
    }

    /// `Σ_η κ_η (1 − e^{−B_η Θ})`, i.e. `−P(g̃_p ≤ Θ)`.
    pub fn bracket(&self, theta: f64) -> f64 {
        -self.cdf(theta)
    }

    /// Smallest decay rate, `1/max_m Ω̃_m`.
    pub fn b_min(&self) -> f64 {
        self.terms.iter().map(|t| t.b).fold(f64::INFINITY, f64::min)
    }
}

/// Enumerates all `2^M − 1` terms, lexicographically over `η`.
///
/// ```
/// use noma_secrecy::model::phi_expansion;
///
/// let phi = phi_expansion(&[1.0, 1.0]).unwrap();
/// let terms: Vec<_> = phi.terms().iter().map(|t| (t.kappa, t.b)).collect();
/// assert_eq!(terms, [(-1.0, 1.0), (-1.0, 1.0), (1.0, 2.0)]);
/// ```
pub fn phi_expansion(omega_tilde_pr: &[f64]) -> Result<PhiExpansion> {
    let m = omega_tilde_pr.len();
    if m == 0 {
        return Err(invalid("d_pr", "at least one primary receiver is required"));
    }
    if m > MAX_PRIMARY_RECEIVERS {
        return Err(Error::TooManyPrimaryReceivers {
            m,
            max: MAX_PRIMARY_RECEIVERS,
        });
    }
    for &w in omega_tilde_pr {
        positive("omega_tilde_pr", w)?;
    }
    let rates: Vec<f64> = omega_tilde_pr.iter().map(|w| 1.0 / w).collect();
    let terms = (1u32..(1 << m))
        .map(|code| {
            // η_1 is the most significant bit, so counting up is lexicographic.
            let mut kappa = 1.0;
            let mut b = 0.0;
            for (i, rate) in rates.iter().enumerate() {
                if code >> (m - 1 - i) & 1 == 1 {
                    kappa = -kappa;
                    b += rate;
                }
            }
            PhiTerm { kappa, b }
        })
        .collect();
    Ok(PhiExpansion { terms })
}

/// CDF of the maximum of independent exponentials, in product form.
pub fn max_exponential_cdf(means: &[f64], x: f64) -> f64 {
    means.iter().map(|w| -(-x / w).exp_m1()).product()
}

/// Density of the maximum of independent exponentials, in product form.
pub fn max_exponential_pdf(means: &[f64], x: f64) -> f64 {
    let mut total = 0.0;
    for (m, w) in means.iter().enumerate() {
        let mut term = (-x / w).exp() / w;
        for (k, v) in means.iter().enumerate() {
            if k != m {
                term *= -(-x / v).exp_m1();
            }
        }
        total += term;
    }
    total
}

/// A signed mixture of exponentials shifted to start at `shift`:
/// `CCDF(x) = Σ_k w_k exp(−(x − shift)/s_k)` for `x ≥ shift`, with `Σ_k w_k = 1`.
///
/// Every ordered gain used here has this form. The shifted parameterization
/// keeps the densities finite where the unshifted coefficients overflow.
#[derive(Debug, Clone, PartialEq)]
pub struct GainLaw {
    pub shift: f64,
    /// `(weight, scale)` pairs.
    pub terms: Vec<(f64, f64)>,
}

impl GainLaw {
    pub fn exponential(shift: f64, scale: f64) -> Self {
        Self {
            shift,
            terms: vec![(1.0, scale)],
        }
    }

    /// `shift + factor·max(g̃_n, g̃_f)`.
    pub fn strong(stats: &ChannelStats, shift: f64, factor: f64) -> Self {
        Self {
            shift,
            terms: (0..3)
                .map(|l| (MIXTURE_SIGNS[l], factor * stats.xi[l]))
                .collect(),
        }
    }

    /// `shift + factor·min(g̃_n, g̃_f)`.
    pub fn weak(stats: &ChannelStats, shift: f64, factor: f64) -> Self {
        Self::exponential(shift, factor * stats.xi[1])
    }

    /// `shift + factor·g̃_e`.
    pub fn eve(stats: &ChannelStats, shift: f64, factor: f64) -> Self {
        Self::exponential(shift, factor * stats.eve.omega_tilde)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let t = x - self.shift;
        if t < 0.0 {
            return 0.0;
        }
        self.terms.iter().map(|&(w, s)| w / s * (-t / s).exp()).sum()
    }

    pub fn ccdf(&self, x: f64) -> f64 {
        let t = x - self.shift;
        if t <= 0.0 {
            return 1.0;
        }
        self.terms.iter().map(|&(w, s)| w * (-t / s).exp()).sum()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let t = x - self.shift;
        if t <= 0.0 {
            return 0.0;
        }
        self.terms.iter().map(|&(w, s)| -w * (-t / s).exp_m1()).sum()
    }

    pub fn max_scale(&self) -> f64 {
        self.terms.iter().map(|t| t.1).fold(0.0, f64::max)
    }
}
