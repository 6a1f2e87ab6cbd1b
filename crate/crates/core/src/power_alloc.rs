//! Power split that keeps the strong user's secrecy rate at its OMA level.
//!
//! Bisection on `g(a_s) = R̄_s(a_s) − R̄_{s,OMA}` over
//! `[1e-6, 0.5 − 1e-6]`. The OMA target does not depend on `a_s`; it is
//! evaluated once by quadrature so the root-finder sees a deterministic,
//! noise-free function. `R̄_s` grows with `a_s` (every per-sample strong-user
//! rate does), and a 9-point pre-scan rejects configurations where the
//! evaluated curve says otherwise.

use crate::closed_form::esr_strong;
use crate::error::{Error, Result};
use crate::model::SystemConfig;
use crate::oracles::{quad_oma_esr_with, OmaGains, OmaUser};

pub const BRACKET_LO: f64 = 1e-6;
pub const BRACKET_HI: f64 = 0.5 - 1e-6;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 100;
/// Relative accuracy of the OMA target.
pub const DEFAULT_TARGET_TOL: f64 = 1e-10;
const SCAN_POINTS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BracketStatus {
    Converged,
    /// Even the smallest split already beats OMA.
    ClampedLow,
    /// Even the largest split stays below OMA.
    ClampedHigh,
}

impl BracketStatus {
    pub fn name(self) -> &'static str {
        match self {
            BracketStatus::Converged => "converged",
            BracketStatus::ClampedLow => "clamped_low",
            BracketStatus::ClampedHigh => "clamped_high",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationResult {
    pub a_s: f64,
    pub a_w: f64,
    /// `|R̄_s(a_s) − R̄_{s,OMA}|`, bits/s/Hz.
    pub achieved_gap: f64,
    pub iterations: usize,
    pub bracket_status: BracketStatus,
    /// The OMA strong-user rate that was matched.
    pub target: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub target_tol: f64,
    pub oma: OmaGains,
}

impl Default for AllocationOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            target_tol: DEFAULT_TARGET_TOL,
            oma: OmaGains::Unshifted,
        }
    }
}

/// Finds `a_s` with `R̄_s(a_s) = R̄_{s,OMA}`; `config.a_s` is ignored.
///
/// ```
/// use noma_secrecy::{power_alloc::{match_strong_user, BracketStatus}, SystemConfig};
///
/// let r = match_strong_user(&SystemConfig::reference(), 1e-6, 100)?;
/// assert_eq!(r.bracket_status, BracketStatus::Converged);
/// assert!(r.achieved_gap <= 1e-6 && r.a_s < r.a_w);
/// # Ok::<(), noma_secrecy::Error>(())
/// ```
pub fn match_strong_user(config: &SystemConfig, tol: f64, max_iter: usize) -> Result<AllocationResult> {
    match_strong_user_with(
        config,
        AllocationOptions {
            tol,
            max_iter,
            ..AllocationOptions::default()
        },
    )
}

pub fn match_strong_user_with(config: &SystemConfig, opts: AllocationOptions) -> Result<AllocationResult> {
    if !(opts.tol >= 1e-8 && opts.tol.is_finite()) {
        return Err(Error::InvalidConfig {
            field: "tol",
            reason: format!("allocation tolerance must be at least 1e-8, got {:e}", opts.tol),
        });
    }
    config.validate_scenario()?;
    let probe = config.clone().with_a_s(0.25);
    let target = quad_oma_esr_with(&probe, OmaUser::Strong, opts.oma, opts.target_tol)?;
    let gap = |a: f64| -> Result<f64> { Ok(esr_strong(&config.clone().with_a_s(a))?.total - target) };

    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| BRACKET_LO + (BRACKET_HI - BRACKET_LO) * i as f64 / (SCAN_POINTS - 1) as f64)
        .collect();
    let values = grid.iter().map(|&a| gap(a)).collect::<Result<Vec<_>>>()?;
    for i in 1..SCAN_POINTS {
        if values[i] < values[i - 1] - opts.tol {
            return Err(Error::NonMonotone {
                a_lo: grid[i - 1],
                g_lo: values[i - 1],
                a_hi: grid[i],
                g_hi: values[i],
            });
        }
    }

    let result = |a_s: f64, g: f64, iterations, status| AllocationResult {
        a_s,
        a_w: 1.0 - a_s,
        achieved_gap: g.abs(),
        iterations,
        bracket_status: status,
        target,
    };
    let (g_lo, g_hi) = (values[0], values[SCAN_POINTS - 1]);
    if g_lo.abs() <= opts.tol {
        return Ok(result(grid[0], g_lo, 0, BracketStatus::Converged));
    }
    if g_lo > 0.0 {
        return Ok(result(BRACKET_LO, g_lo, 0, BracketStatus::ClampedLow));
    }
    if g_hi < 0.0 {
        let status = if -g_hi <= opts.tol {
            BracketStatus::Converged
        } else {
            BracketStatus::ClampedHigh
        };
        return Ok(result(BRACKET_HI, g_hi, 0, status));
    }

    // Narrow to the first scanned cell that changes sign.
    let k = (1..SCAN_POINTS).find(|&i| values[i] >= 0.0).expect("g_hi ≥ 0");
    let (mut lo, mut hi) = (grid[k - 1], grid[k]);
    if values[k].abs() <= opts.tol {
        return Ok(result(hi, values[k], 0, BracketStatus::Converged));
    }
    for iter in 1..=opts.max_iter {
        let mid = 0.5 * (lo + hi);
        let g = gap(mid)?;
        if g.abs() <= opts.tol {
            return Ok(result(mid, g, iter, BracketStatus::Converged));
        }
        if g < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Convergence(format!(
        "bisection did not reach |gap| ≤ {:e} within {} iterations (bracket [{lo}, {hi}])",
        opts.tol, opts.max_iter
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::esr_weak;
    use crate::oracles::quad_oma_esr;

    #[test]
    fn strong_rate_grows_with_its_share() {
        let base = SystemConfig::reference();
        let mut prev = 0.0;
        for i in 0..9 {
            let a = BRACKET_LO + (BRACKET_HI - BRACKET_LO) * i as f64 / 8.0;
            let r = esr_strong(&base.clone().with_a_s(a)).unwrap().total;
            assert!(r >= prev, "a_s = {a}");
            prev = r;
        }
    }

    #[test]
    fn matched_split_meets_tolerance() {
        let base = SystemConfig::reference();
        let r = match_strong_user(&base, 1e-6, 100).unwrap();
        assert_eq!(r.bracket_status, BracketStatus::Converged);
        let cfg = base.with_a_s(r.a_s);
        let oma_s = quad_oma_esr(&cfg, OmaUser::Strong, 1e-10).unwrap();
        let s = esr_strong(&cfg).unwrap().total;
        assert!((s - oma_s).abs() <= 1e-6);
        assert_eq!(r.a_w, 1.0 - r.a_s);
    }

    #[test]
    fn weak_user_gains_against_consistent_oma() {
        let opts = AllocationOptions {
            oma: OmaGains::WithEstimationNoise,
            ..AllocationOptions::default()
        };
        for ip in [-10.0, 10.0] {
            let base = SystemConfig::reference().with_ip_db(ip);
            let r = match_strong_user_with(&base, opts).unwrap();
            let cfg = base.with_a_s(r.a_s);
            let oma_w = quad_oma_esr_with(&cfg, OmaUser::Weak, OmaGains::WithEstimationNoise, 1e-10).unwrap();
            assert!(esr_weak(&cfg).unwrap().total > oma_w);
        }
    }

    #[test]
    fn deterministic() {
        let base = SystemConfig::reference().with_ip_db(0.0);
        let a = match_strong_user(&base, 1e-6, 100).unwrap();
        let b = match_strong_user(&base, 1e-6, 100).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn iteration_budget_is_enforced() {
        let r = match_strong_user(&SystemConfig::reference(), 1e-8, 1);
        assert!(matches!(r, Err(Error::Convergence(_))));
    }

    #[test]
    fn rejects_loose_tolerance_bounds() {
        assert!(match_strong_user(&SystemConfig::reference(), 1e-9, 100).is_err());
    }
}
