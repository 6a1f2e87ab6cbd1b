//! Exponential-integral kernels.
//!
//! Every closed-form rate in this crate reduces to combinations of
//! `E₁(x) = ∫ₓ^∞ e^{−t}/t dt`. The closed forms multiply `E₁` by large
//! exponentials (`exp(1/(Ω P_max))` with `Ω ~ 1e-5`), so the workhorse here is
//! the scaled variant `eˣ·E₁(x)`, which never forms `eˣ`.
//!
//! Two regimes are used:
//!
//! * `x ≤ 1`: the convergent power series
//!   `E₁(x) = −γ − ln x − Σ_{k≥1} (−x)ᵏ / (k·k!)`;
//! * `x > 1`: the continued fraction
//!   `eˣ E₁(x) = 1/(x+1− 1²/(x+3− 2²/(x+5− …)))`, evaluated with the modified
//!   Lentz algorithm.

use std::fmt;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_43;
const TINY: f64 = 1e-300;
const MAX_CF_ITER: usize = 10_000;

/// A finite, strictly positive real number.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PositiveReal(f64);

impl PositiveReal {
    pub fn new(value: f64) -> Result<Self> {
        Self::named("value", value)
    }

    /// Like [`PositiveReal::new`], but the error names the offending argument.
    pub fn named(what: &'static str, value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Self(value))
        } else {
            Err(Error::Domain { what, value })
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for PositiveReal {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<PositiveReal> for f64 {
    fn from(x: PositiveReal) -> f64 {
        x.0
    }
}

impl fmt::Display for PositiveReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `E₁(x)` for `x > 0`.
///
/// ```
/// use noma_secrecy::special_fn::{e1, PositiveReal};
///
/// let x = PositiveReal::new(1.0).unwrap();
/// assert!((e1(x) - 0.219_383_934_395_520_3).abs() < 1e-15);
/// ```
pub fn e1(x: PositiveReal) -> f64 {
    e1_raw(x.get())
}

/// `eˣ·E₁(x)` for `x > 0`, accurate for arguments where `eˣ` overflows.
pub fn e1_scaled(x: PositiveReal) -> f64 {
    e1_scaled_raw(x.get())
}

/// `Ei(−x) = −E₁(x)` for `x > 0`.
pub fn ei_neg(x: PositiveReal) -> f64 {
    -e1_raw(x.get())
}

/// Unchecked `E₁`; callers guarantee `x > 0`.
pub(crate) fn e1_raw(x: f64) -> f64 {
    debug_assert!(x > 0.0, "e1 argument {x}");
    if x <= 1.0 {
        e1_series(x)
    } else {
        continued_fraction(x) * (-x).exp()
    }
}

/// Unchecked `eˣ E₁(x)`; callers guarantee `x > 0`.
pub(crate) fn e1_scaled_raw(x: f64) -> f64 {
    debug_assert!(x > 0.0, "e1_scaled argument {x}");
    if x <= 1.0 {
        x.exp() * e1_series(x)
    } else {
        continued_fraction(x)
    }
}

fn e1_series(x: f64) -> f64 {
    // Σ_{k≥1} (−1)^{k+1} xᵏ/(k·k!); at x = 1 this needs ~18 terms.
    let mut sum = 0.0;
    let mut power_over_fact = 1.0;
    for k in 1..100 {
        let k = k as f64;
        power_over_fact *= -x / k;
        let term = power_over_fact / k;
        sum -= term;
        if term.abs() < f64::EPSILON * 0.25 * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - x.ln() + sum
}

/// Modified Lentz evaluation of `eˣ E₁(x)` for `x > 1`.
fn continued_fraction(x: f64) -> f64 {
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_CF_ITER {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() <= f64::EPSILON {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pr(x: f64) -> PositiveReal {
        PositiveReal::new(x).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // Reference values from a 50-digit mpmath evaluation of expint(1, x).
    const REFERENCE: &[(f64, f64)] = &[
        (1e-300, 690.198_312_233_312_2),
        (1e-12, 27.053_805_451_028_015),
        (1e-3, 6.331_539_364_136_149),
        (0.1, 1.822_923_958_419_390_7),
        (0.5, 0.559_773_594_776_160_8),
        (0.999, 0.219_752_182_022_944_54),
        (1.0, 0.219_383_934_395_520_27),
        (1.001, 0.219_016_422_527_468_86),
        (2.0, 0.048_900_510_708_061_12),
        (10.0, 4.156_968_929_685_324e-6),
        (50.0, 3.783_264_029_550_459e-24),
        (700.0, 1.406_518_766_234_033e-307),
    ];

    #[test]
    fn matches_reference_values() {
        for &(x, want) in REFERENCE {
            let got = e1(pr(x));
            assert!(rel(got, want) <= 1e-12, "e1({x}) = {got:e}, want {want:e}");
        }
    }

    #[test]
    fn series_oracle_at_one() {
        // Independent 40-term evaluation of the alternating series.
        let x: f64 = 1.0;
        let mut sum = 0.0;
        let mut fact = 1.0;
        for k in 1..=40 {
            fact *= k as f64;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sum += sign * x.powi(k) / (k as f64 * fact);
        }
        let want = -EULER_GAMMA - x.ln() + sum;
        assert!((e1(pr(1.0)) - want).abs() < 1e-12);
        assert!((e1(pr(1.0)) - 0.219_383_934_395_52).abs() < 1e-12);
    }

    #[test]
    fn small_argument_expansion() {
        let x = 1e-12;
        let want = -EULER_GAMMA - f64::ln(x) + x;
        assert!((e1(pr(x)) - want).abs() < 1e-6);
        assert!((e1(pr(x)) - 27.053_805_4).abs() < 1e-6);
    }

    #[test]
    fn large_argument_tail() {
        assert!(e1(pr(700.0)) < 1e-300);
        assert!(e1(pr(700.0)) > 0.0);
    }

    #[test]
    fn scaled_values() {
        let got = e1_scaled(pr(1e6));
        let lead = 1.0 / 1e6 - 1.0 / 1e12;
        assert!(rel(got, lead) < 1e-11, "{got:e}");

        let want = std::f64::consts::E * 0.219_383_934_395_520_27;
        assert!(rel(e1_scaled(pr(1.0)), want) < 1e-13);
        assert!(rel(e1_scaled(pr(1.0)), 0.596_347_362_323_194_1) < 1e-13);

        // mpmath: e^{0.1} E1(0.1)
        assert!(rel(e1_scaled(pr(0.1)), 2.014_642_544_708_451_7) < 1e-13);
    }

    #[test]
    fn scaled_quadrature_oracle() {
        // ∫₀^∞ e^{−t}/(t+x) dt = eˣ E₁(x); composite Simpson on t = u/(1−u).
        let x = 0.1;
        let f = |u: f64| {
            if u >= 1.0 {
                return 0.0;
            }
            let t = u / (1.0 - u);
            (-t).exp() / (t + x) / ((1.0 - u) * (1.0 - u))
        };
        let n = 200_000;
        let h = 1.0 / n as f64;
        let mut s = f(0.0) + f(1.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        let quad = s * h / 3.0;
        assert!(rel(e1_scaled(pr(x)), quad) < 1e-9, "{quad}");
    }

    #[test]
    fn ei_neg_is_negated_e1() {
        for &(x, _) in REFERENCE {
            assert_eq!(ei_neg(pr(x)) + e1(pr(x)), 0.0);
        }
        assert!(rel(ei_neg(pr(1.0)), -0.219_383_934_395_520_27) < 1e-14);
        assert!(rel(ei_neg(pr(0.5)), -0.559_773_594_776_160_8) < 1e-13);
    }

    #[test]
    fn rejects_bad_arguments() {
        for bad in [0.0, -1.0, f64::NAN, f64::INFINITY, f64::NEG_INFINITY] {
            assert!(PositiveReal::new(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn regime_boundary_is_continuous() {
        let below = e1_scaled_raw(1.0);
        let above = e1_scaled_raw(1.0 + f64::EPSILON);
        assert!(rel(below, above) < 1e-14);
    }
}
