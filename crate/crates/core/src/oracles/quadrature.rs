//! Deterministic nested-quadrature evaluation of the secrecy rates.
//!
//! Every rate is written as `E[(φ_P(X) − φ_P(Z))⁺]` where `X` is the
//! legitimate gain, `Z` the eavesdropper gain (both without the estimation
//! shift) and `φ_P` the per-mode capacity in nats at transmit power `P`.
//! Splitting on the transmit-power rule gives four pieces,
//!
//! ```text
//! 𝓘₁ = F_p(Θ) ∫ φ_{Pmax}(t) f_X(t) F_Z(t) dt
//! 𝓘₂ = ∫_Θ^∞ f_p(y) ∫ φ_{Ip/y}(t) f_X(t) F_Z(t) dt dy
//! 𝓘₃ = F_p(Θ) ∫ φ_{Pmax}(t) f_Z(t) F̄_X(t) dt
//! 𝓘₄ = ∫_Θ^∞ f_p(y) ∫ φ_{Ip/y}(t) f_Z(t) F̄_X(t) dt dy
//! ```
//!
//! with `R = log₂e·(𝓘₁ + 𝓘₂ − 𝓘₃ − 𝓘₄)`. The densities are built directly from
//! products of exponential CDFs, so this engine shares no algebra with the
//! signed-mixture expansions used by the closed forms.

use std::f64::consts::LOG2_E;

use super::gauss_kronrod::{breakpoints, integrate, Tolerance};
use super::{OmaGains, OmaUser, RateMode};
use crate::error::{Error, Result};
use crate::model::{derive_stats, max_exponential_cdf, max_exponential_pdf, SystemConfig};

/// Envelope span, in units of the slowest decay scale: `e^{−40} < 10⁻¹⁷`.
const SPAN: f64 = 40.0;
const MIN_REL_TOL: f64 = 1e-10;
const MAX_REL_TOL: f64 = 1e-4;

/// The four signed pieces, in bits/s/Hz, and their total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadBreakdown {
    pub total: f64,
    pub components: [f64; 4],
}

#[derive(Debug, Clone, Copy)]
enum Capacity {
    /// `ln(1 + P(σ² + a t))`.
    Strong { s2: f64, a: f64 },
    /// `ln((1 + P(σ² + t)) / (1 + P(σ² + a t)))`.
    Weak { s2: f64, a: f64 },
    /// `½ ln(1 + P(shift + t))`.
    Oma { shift: f64 },
}

impl Capacity {
    fn nats(self, p: f64, t: f64) -> f64 {
        match self {
            Capacity::Strong { s2, a } => (p * (s2 + a * t)).ln_1p(),
            Capacity::Weak { s2, a } => (p * (1.0 - a) * t / (1.0 + p * (s2 + a * t))).ln_1p(),
            Capacity::Oma { shift } => 0.5 * (p * (shift + t)).ln_1p(),
        }
    }

    /// Where `φ_P` bends: arguments at which `P·gain ≈ 1`.
    fn knees(self, p: f64) -> Vec<f64> {
        match self {
            Capacity::Strong { s2, a } | Capacity::Weak { s2, a } => {
                vec![(1.0 / p + s2) / a, 1.0 / p + s2]
            }
            Capacity::Oma { shift } => vec![1.0 / p + shift],
        }
    }
}

/// Gain of one unshifted link or ordered pair of links.
#[derive(Debug, Clone, Copy)]
enum Gain {
    Exp(f64),
    MaxOf(f64, f64),
    MinOf(f64, f64),
}

impl Gain {
    fn cdf(self, t: f64) -> f64 {
        match self {
            Gain::Exp(m) => -(-t / m).exp_m1(),
            Gain::MaxOf(a, b) => (-t / a).exp_m1() * (-t / b).exp_m1(),
            Gain::MinOf(a, b) => -(-t * (1.0 / a + 1.0 / b)).exp_m1(),
        }
    }

    fn ccdf(self, t: f64) -> f64 {
        match self {
            Gain::Exp(m) => (-t / m).exp(),
            Gain::MaxOf(a, b) => {
                let (u, v) = ((-t / a).exp(), (-t / b).exp());
                u + v - u * v
            }
            Gain::MinOf(a, b) => (-t * (1.0 / a + 1.0 / b)).exp(),
        }
    }

    fn pdf(self, t: f64) -> f64 {
        match self {
            Gain::Exp(m) => (-t / m).exp() / m,
            Gain::MaxOf(a, b) => {
                (-t / a).exp() / a * -(-t / b).exp_m1() + (-t / b).exp() / b * -(-t / a).exp_m1()
            }
            Gain::MinOf(a, b) => {
                let r = 1.0 / a + 1.0 / b;
                r * (-t * r).exp()
            }
        }
    }

    fn scales(self) -> Vec<f64> {
        match self {
            Gain::Exp(m) => vec![m],
            Gain::MaxOf(a, b) | Gain::MinOf(a, b) => vec![a, b, a * b / (a + b)],
        }
    }
}

struct Problem {
    capacity: Capacity,
    x: Gain,
    z: Gain,
    pr_means: Vec<f64>,
    theta: f64,
    p_max: f64,
    i_peak: f64,
    rel_tol: f64,
}

impl Problem {
    fn inner(&self, p: f64, eve_side: bool, rel_tol: f64) -> Result<f64> {
        let (x, z) = (self.x, self.z);
        let scales: Vec<f64> = x.scales().into_iter().chain(z.scales()).collect();
        let upper = SPAN * scales.iter().cloned().fold(0.0, f64::max);
        let pts = breakpoints(0.0, upper, scales.iter().cloned().chain(self.capacity.knees(p)));
        let cap = self.capacity;
        let tol = Tolerance::new(1e-300, rel_tol);
        let est = if eve_side {
            integrate(|t| cap.nats(p, t) * z.pdf(t) * x.ccdf(t), &pts, tol)?
        } else {
            integrate(|t| cap.nats(p, t) * x.pdf(t) * z.cdf(t), &pts, tol)?
        };
        Ok(est.value)
    }

    /// `∫_Θ^∞ f_p(y) inner(I_p/y) dy`.
    fn interference_limited(&self, eve_side: bool) -> Result<f64> {
        let means = &self.pr_means;
        let largest = means.iter().cloned().fold(0.0, f64::max);
        let smallest = means.iter().cloned().fold(f64::INFINITY, f64::min);
        let theta = self.theta;
        let upper = theta + SPAN * largest;
        let pts = breakpoints(
            theta,
            upper,
            [theta + smallest, theta + largest, theta + 5.0 * largest, 2.0 * theta, 10.0 * theta],
        );
        let inner_tol = 0.05 * self.rel_tol;
        let mut failure = None;
        let est = integrate(
            |y| {
                let weight = max_exponential_pdf(means, y);
                if weight == 0.0 || failure.is_some() {
                    return 0.0;
                }
                match self.inner(self.i_peak / y, eve_side, inner_tol) {
                    Ok(v) => weight * v,
                    Err(e) => {
                        failure = Some(e);
                        0.0
                    }
                }
            },
            &pts,
            Tolerance::new(1e-300, self.rel_tol),
        )?;
        match failure {
            Some(e) => Err(e),
            None => Ok(est.value),
        }
    }

    fn solve(&self) -> Result<QuadBreakdown> {
        let below = max_exponential_cdf(&self.pr_means, self.theta);
        let tight = 0.1 * self.rel_tol;
        let i1 = below * self.inner(self.p_max, false, tight)?;
        let i3 = below * self.inner(self.p_max, true, tight)?;
        let i2 = self.interference_limited(false)?;
        let i4 = self.interference_limited(true)?;
        let components = [i1, i2, i3, i4].map(|v| LOG2_E * v);
        let [a, b, c, d] = components;
        if components.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("quadrature component"));
        }
        Ok(QuadBreakdown {
            total: (a + b - c - d).max(0.0),
            components,
        })
    }
}

fn check_tol(rel_tol: f64) -> Result<()> {
    if (MIN_REL_TOL..=MAX_REL_TOL).contains(&rel_tol) {
        Ok(())
    } else {
        Err(Error::InvalidConfig {
            field: "quad_tol",
            reason: format!("must lie in [{MIN_REL_TOL:e}, {MAX_REL_TOL:e}], got {rel_tol:e}"),
        })
    }
}

fn problem(config: &SystemConfig, mode: RateMode, oma: OmaGains, rel_tol: f64) -> Result<Problem> {
    check_tol(rel_tol)?;
    config.validate()?;
    let st = derive_stats(config)?;
    let (n, f, e) = (st.near.omega_tilde, st.far.omega_tilde, st.eve.omega_tilde);
    let (s2, a) = (config.sigma_eps2, config.a_s);
    let oma_shift = match oma {
        OmaGains::Unshifted => 0.0,
        OmaGains::WithEstimationNoise => s2,
    };
    let (capacity, x) = match mode {
        RateMode::NomaStrong => (Capacity::Strong { s2, a }, Gain::MaxOf(n, f)),
        RateMode::NomaWeak => (Capacity::Weak { s2, a }, Gain::MinOf(n, f)),
        RateMode::OmaStrong => (Capacity::Oma { shift: oma_shift }, Gain::MaxOf(n, f)),
        RateMode::OmaWeak => (Capacity::Oma { shift: oma_shift }, Gain::MinOf(n, f)),
    };
    Ok(Problem {
        capacity,
        x,
        z: Gain::Exp(e),
        pr_means: st.omega_tilde_pr(),
        theta: st.theta,
        p_max: config.p_max,
        i_peak: config.i_peak,
        rel_tol,
    })
}

/// Rate of any mode with its four pieces.
pub fn quad_breakdown(config: &SystemConfig, mode: RateMode, oma: OmaGains, rel_tol: f64) -> Result<QuadBreakdown> {
    problem(config, mode, oma, rel_tol)?.solve()
}

/// Strong-user NOMA rate by quadrature.
pub fn quad_esr_strong(config: &SystemConfig, rel_tol: f64) -> Result<f64> {
    Ok(quad_breakdown(config, RateMode::NomaStrong, OmaGains::Unshifted, rel_tol)?.total)
}

/// Weak-user NOMA rate by quadrature.
pub fn quad_esr_weak(config: &SystemConfig, rel_tol: f64) -> Result<f64> {
    Ok(quad_breakdown(config, RateMode::NomaWeak, OmaGains::Unshifted, rel_tol)?.total)
}

/// OMA rate of one user, with the half-slot factor and unshifted gains.
pub fn quad_oma_esr(config: &SystemConfig, user: OmaUser, rel_tol: f64) -> Result<f64> {
    quad_oma_esr_with(config, user, OmaGains::Unshifted, rel_tol)
}

pub fn quad_oma_esr_with(config: &SystemConfig, user: OmaUser, gains: OmaGains, rel_tol: f64) -> Result<f64> {
    let mode = match user {
        OmaUser::Strong => RateMode::OmaStrong,
        OmaUser::Weak => RateMode::OmaWeak,
    };
    Ok(quad_breakdown(config, mode, gains, rel_tol)?.total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{esr_strong, esr_weak};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gain_laws_are_consistent() {
        for g in [Gain::Exp(2.0), Gain::MaxOf(1.0, 3.0), Gain::MinOf(1.0, 3.0)] {
            for t in [0.01, 0.5, 2.0, 7.0] {
                assert!((g.cdf(t) + g.ccdf(t) - 1.0).abs() < 1e-14);
                let h = 1e-5;
                let slope = (g.cdf(t + h) - g.cdf(t - h)) / (2.0 * h);
                assert!(rel(slope, g.pdf(t)) < 1e-6);
            }
        }
    }

    #[test]
    fn components_match_closed_form_individually() {
        let cfg = SystemConfig::reference();
        let q = quad_breakdown(&cfg, RateMode::NomaStrong, OmaGains::Unshifted, 1e-9).unwrap();
        let c = esr_strong(&cfg).unwrap();
        for k in 0..4 {
            assert!(rel(q.components[k], c.components[k]) < 1e-7, "strong {k}: {q:?} vs {c:?}");
        }
        let q = quad_breakdown(&cfg, RateMode::NomaWeak, OmaGains::Unshifted, 1e-9).unwrap();
        let c = esr_weak(&cfg).unwrap();
        for k in 0..4 {
            assert!(rel(q.components[k], c.components[k]) < 1e-7, "weak {k}: {q:?} vs {c:?}");
        }
    }

    #[test]
    fn vanishing_interference_budget() {
        let cfg = SystemConfig {
            i_peak: 1e-12,
            ..SystemConfig::reference()
        };
        assert!(quad_esr_strong(&cfg, 1e-8).unwrap() < 1e-6);
        assert!(quad_esr_weak(&cfg, 1e-8).unwrap() < 1e-6);
        assert!(quad_oma_esr(&cfg, OmaUser::Strong, 1e-8).unwrap() < 1e-6);
    }

    #[test]
    fn strong_oma_dominates_weak_oma() {
        for ip in [-10.0, 10.0, 30.0] {
            let cfg = SystemConfig::reference().with_ip_db(ip);
            let s = quad_oma_esr(&cfg, OmaUser::Strong, 1e-8).unwrap();
            let w = quad_oma_esr(&cfg, OmaUser::Weak, 1e-8).unwrap();
            assert!(s >= w, "{ip}: {s} < {w}");
        }
    }

    #[test]
    fn estimation_noise_shift_helps_both_links() {
        let cfg = SystemConfig::reference();
        let plain = quad_oma_esr(&cfg, OmaUser::Strong, 1e-8).unwrap();
        let shifted = quad_oma_esr_with(&cfg, OmaUser::Strong, OmaGains::WithEstimationNoise, 1e-8).unwrap();
        assert!(plain.is_finite() && shifted.is_finite());
        assert_ne!(plain, shifted);
    }

    #[test]
    fn rejects_tolerance_outside_range() {
        let cfg = SystemConfig::reference();
        assert!(quad_esr_strong(&cfg, 1e-12).is_err());
        assert!(quad_esr_strong(&cfg, 1e-3).is_err());
    }
}
