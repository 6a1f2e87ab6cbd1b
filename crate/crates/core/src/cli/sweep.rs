//! Sweep specifications, per-point evaluation and the figure presets.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::closed_form::{esr_asymptotic_parts, esr_both};
use crate::error::{Error, Result};
use crate::model::{db_to_linear, linear_to_db, SystemConfig};
use crate::oracles::{mc_esr_with, quad_breakdown, quad_oma_esr_with, McEstimate, OmaGains, OmaUser, RateMode};
use crate::power_alloc::{match_strong_user_with, AllocationOptions, AllocationResult};

/// The swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    IPeakDb,
    PMaxDb,
    SigmaEps2,
    /// Number of primary receivers, all at the first configured distance.
    MPrs,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::IPeakDb => "i_peak_db",
            Axis::PMaxDb => "p_max_db",
            Axis::SigmaEps2 => "sigma_eps2",
            Axis::MPrs => "m_prs",
        }
    }

    fn apply(self, config: &mut SystemConfig, value: f64) {
        match self {
            Axis::IPeakDb => config.i_peak = db_to_linear(value),
            Axis::PMaxDb => config.p_max = db_to_linear(value),
            Axis::SigmaEps2 => config.sigma_eps2 = value,
            Axis::MPrs => config.d_pr = vec![config.d_pr[0]; value as usize],
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "i_peak_db" | "ip_db" => Ok(Axis::IPeakDb),
            "p_max_db" | "pmax_db" => Ok(Axis::PMaxDb),
            "sigma_eps2" => Ok(Axis::SigmaEps2),
            "m_prs" => Ok(Axis::MPrs),
            _ => Err(format!("unknown axis `{s}` (expected i_peak_db, p_max_db, sigma_eps2 or m_prs)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
}

impl SweepSpec {
    pub fn new(axis: Axis, values: Vec<f64>) -> Result<Self, String> {
        if values.is_empty() {
            return Err("sweep values must not be empty".into());
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err("sweep values must be finite".into());
        }
        if values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(format!("{axis} values must be strictly increasing"));
        }
        if axis == Axis::MPrs && values.iter().any(|&m| m < 1.0 || m.fract() != 0.0) {
            return Err("m_prs values must be positive integers".into());
        }
        Ok(Self { axis, values })
    }
}

/// `start, start + step, …` up to and including `stop` (with a half-step
/// allowance for rounding).
pub fn range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, String> {
    if !(step > 0.0 && step.is_finite() && start.is_finite() && stop.is_finite()) || stop < start {
        return Err(format!("invalid range {start}:{stop}:{step}"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    if n > 100_000 {
        return Err(format!("range {start}:{stop}:{step} has too many points"));
    }
    Ok((0..=n).map(|i| start + step * i as f64).collect())
}

/// Per-case overrides applied on top of the base scenario.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Case {
    pub label: String,
    pub p_max_db: Option<f64>,
    pub i_peak_db: Option<f64>,
    pub d_pr: Option<Vec<f64>>,
}

impl Case {
    pub fn plain(label: &str) -> Self {
        Self {
            label: label.into(),
            ..Self::default()
        }
    }

    fn apply(&self, config: &mut SystemConfig) {
        if let Some(p) = self.p_max_db {
            config.p_max = db_to_linear(p);
        }
        if let Some(i) = self.i_peak_db {
            config.i_peak = db_to_linear(i);
        }
        if let Some(d) = &self.d_pr {
            config.d_pr = d.clone();
        }
    }
}

/// How every point is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalSettings {
    pub allocate: bool,
    pub oma: OmaGains,
    pub quad_tol: f64,
    /// Adds quadrature and Monte Carlo columns: `(samples, seed)`.
    pub check: Option<(usize, u64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckColumns {
    pub quad_strong: f64,
    pub quad_weak: f64,
    pub mc_strong: McEstimate,
    pub mc_weak: McEstimate,
}

/// Everything computed at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub case: String,
    /// Resolved scenario, including the `a_s` that was used.
    pub config: SystemConfig,
    pub allocation: Option<AllocationResult>,
    pub esr_strong: f64,
    pub esr_weak: f64,
    pub essr: f64,
    pub essr_asymptotic: f64,
    pub oma_strong: f64,
    pub oma_weak: f64,
    pub check: Option<CheckColumns>,
}

impl RunRecord {
    pub fn oma_essr(&self) -> f64 {
        self.oma_strong + self.oma_weak
    }
}

pub fn evaluate_point(case: &str, config: &SystemConfig, settings: &EvalSettings) -> Result<RunRecord> {
    config.validate_scenario()?;
    let (config, allocation) = if settings.allocate {
        let opts = AllocationOptions {
            target_tol: settings.quad_tol,
            oma: settings.oma,
            ..AllocationOptions::default()
        };
        let alloc = match_strong_user_with(config, opts)?;
        (config.clone().with_a_s(alloc.a_s), Some(alloc))
    } else {
        (config.clone(), None)
    };
    let (strong, weak) = esr_both(&config)?;
    let (asym_s, asym_w) = esr_asymptotic_parts(&config)?;
    let oma_strong = match allocation {
        Some(a) => a.target,
        None => quad_oma_esr_with(&config, OmaUser::Strong, settings.oma, settings.quad_tol)?,
    };
    let oma_weak = quad_oma_esr_with(&config, OmaUser::Weak, settings.oma, settings.quad_tol)?;
    let check = match settings.check {
        None => None,
        Some((n, seed)) => Some(CheckColumns {
            quad_strong: quad_breakdown(&config, RateMode::NomaStrong, settings.oma, settings.quad_tol)?.total,
            quad_weak: quad_breakdown(&config, RateMode::NomaWeak, settings.oma, settings.quad_tol)?.total,
            mc_strong: mc_esr_with(&config, RateMode::NomaStrong, settings.oma, n, seed)?,
            mc_weak: mc_esr_with(&config, RateMode::NomaWeak, settings.oma, n, seed)?,
        }),
    };
    Ok(RunRecord {
        case: case.to_string(),
        allocation,
        esr_strong: strong.total,
        esr_weak: weak.total,
        essr: strong.total + weak.total,
        essr_asymptotic: asym_s + asym_w,
        oma_strong,
        oma_weak,
        check,
        config,
    })
}

/// A full run: cases × sweep values, in that nesting order.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub base: SystemConfig,
    pub cases: Vec<Case>,
    pub sweep: SweepSpec,
}

impl Plan {
    pub fn points(&self) -> Vec<(String, SystemConfig)> {
        let mut out = Vec::with_capacity(self.cases.len() * self.sweep.values.len());
        for case in &self.cases {
            for &v in &self.sweep.values {
                let mut cfg = self.base.clone();
                case.apply(&mut cfg);
                self.sweep.axis.apply(&mut cfg, v);
                out.push((case.label.clone(), cfg));
            }
        }
        out
    }

    /// Evaluates every point; results keep input order for any thread count.
    pub fn run(&self, settings: &EvalSettings, threads: usize) -> Result<Vec<RunRecord>> {
        let points = self.points();
        let eval = || {
            points
                .par_iter()
                .map(|(label, cfg)| {
                    evaluate_point(label, cfg, settings).map_err(|e| annotate(e, label, cfg))
                })
                .collect::<Result<Vec<_>>>()
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .map_err(|e| Error::Convergence(format!("cannot start worker pool: {e}")))?;
        pool.install(eval)
    }
}

fn annotate(e: Error, label: &str, cfg: &SystemConfig) -> Error {
    match e {
        Error::Convergence(msg) => Error::Convergence(format!(
            "{msg} (case {label}, I_p = {} dB, P_max = {} dB, sigma_eps2 = {:e}, M = {})",
            fmt_sig(linear_to_db(cfg.i_peak)),
            fmt_sig(linear_to_db(cfg.p_max)),
            cfg.sigma_eps2,
            cfg.m_prs()
        )),
        other => other,
    }
}

/// Interference-budget grid used by the figure presets: −10 … 20 dB, 1 dB steps.
pub fn default_ip_grid() -> Vec<f64> {
    range(-10.0, 20.0, 1.0).expect("static grid")
}

/// Estimation-error grid for the σ_ε² figure. It stops below the path gain of
/// the farthest default primary receiver (215⁻² ≈ 2.16·10⁻⁵) so every point
/// is a valid model.
pub const SIGMA_GRID: [f64; 12] = [1e-6, 2e-6, 4e-6, 6e-6, 8e-6, 1e-5, 1.2e-5, 1.4e-5, 1.6e-5, 1.8e-5, 2e-5, 2.1e-5];

/// The preset behind `figure n`.
pub fn figure_plan(n: u8) -> Option<Plan> {
    let base = SystemConfig::reference();
    let ip = || SweepSpec::new(Axis::IPeakDb, default_ip_grid()).expect("static grid");
    let pmax = |label: &str, db: f64| Case {
        label: label.into(),
        p_max_db: Some(db),
        ..Case::default()
    };
    let plan = match n {
        2 => Plan {
            base,
            cases: vec![pmax("pmax50", 50.0)],
            sweep: ip(),
        },
        3 => Plan {
            base,
            cases: vec![pmax("pmax40", 40.0), pmax("pmax50", 50.0), pmax("pmax60", 60.0)],
            sweep: ip(),
        },
        4 => Plan {
            base,
            cases: [(0.0, 50.0), (0.0, 60.0), (10.0, 50.0), (10.0, 60.0)]
                .into_iter()
                .map(|(i, p)| Case {
                    label: format!("ip{i}_pmax{p}"),
                    p_max_db: Some(p),
                    i_peak_db: Some(i),
                    d_pr: None,
                })
                .collect(),
            sweep: SweepSpec::new(Axis::SigmaEps2, SIGMA_GRID.to_vec()).expect("static grid"),
        },
        5 => {
            let layouts: [(&str, Vec<f64>); 3] = [
                ("case1", vec![200.0; 2]),
                ("case2", vec![200.0, 205.0, 210.0, 215.0]),
                ("case3", vec![200.0; 10]),
            ];
            let cases = layouts
                .iter()
                .flat_map(|(name, d)| {
                    [40.0, 60.0].map(|p| Case {
                        label: format!("{name}_pmax{p}"),
                        p_max_db: Some(p),
                        i_peak_db: None,
                        d_pr: Some(d.clone()),
                    })
                })
                .collect();
            Plan {
                base,
                cases,
                sweep: ip(),
            }
        }
        _ => return None,
    };
    Some(plan)
}

/// `x` with six significant digits, `%g` style.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}
