//! The `noma-secrecy` command-line front end.
//!
//! Scenario values are resolved in three layers: the built-in preset, then a
//! `--config` file, then individual flags. Powers are given in dB on the
//! command line and in files, and converted to linear exactly once, here.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 numerical
//! failure (including oracle disagreement in `check`).

pub mod config;
pub mod output;
pub mod sweep;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::closed_form::esr_both;
use crate::error::Error;
use crate::model::{db_to_linear, linear_to_db, SystemConfig};
use crate::oracles::{mc_esr_with, quad_breakdown, OmaGains, RateMode};
use crate::power_alloc::{match_strong_user_with, AllocationOptions};
use config::FileConfig;
use sweep::{figure_plan, fmt_sig, range, Axis, Case, EvalSettings, Plan, SweepSpec};

pub const DEFAULT_QUAD_TOL: f64 = 1e-9;
pub const DEFAULT_MC_SAMPLES: usize = 1_000_000;
pub const DEFAULT_SEED: u64 = 1;
/// Closed form vs quadrature agreement required by `check`.
pub const CHECK_REL_TOL: f64 = 1e-5;
/// Monte Carlo agreement required by `check`, in standard errors.
pub const CHECK_Z: f64 = 4.0;

#[derive(Debug, Parser)]
#[command(
    name = "noma-secrecy",
    version,
    about = "Ergodic secrecy rates of a two-user NOMA downlink under underlay spectrum sharing",
    allow_negative_numbers = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one scenario.
    Eval(EvalArgs),
    /// Evaluate a scenario along one axis.
    Sweep(SweepArgs),
    /// Write the data behind one of the preset figures (2–5).
    Figure(FigureArgs),
    /// Find the power split that matches the strong user's OMA secrecy rate.
    Allocate(ScenarioArgs),
    /// Compare closed forms, quadrature and Monte Carlo for one scenario.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// The reference geometry: d_n = 30 m, d_f = 100 m, d_e = 150 m, PRs at 200–215 m.
    #[value(name = "paper-defaults")]
    Reference,
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Configuration file with [scenario], [sweep] and [oracle] sections.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Base scenario, overridden by --config and then by flags.
    #[arg(long, value_enum, default_value = "paper-defaults")]
    pub preset: Preset,
    #[arg(long, value_name = "F", allow_negative_numbers = true)]
    pub ip_db: Option<f64>,
    #[arg(long, value_name = "F", allow_negative_numbers = true)]
    pub pmax_db: Option<f64>,
    #[arg(long, value_name = "F", allow_negative_numbers = true)]
    pub sigma_eps2: Option<f64>,
    #[arg(long, value_name = "F", allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Strong-user power fraction.
    #[arg(long = "as", value_name = "F", conflicts_with = "allocate", allow_negative_numbers = true)]
    pub a_s: Option<f64>,
    /// Choose a_s by matching the strong user's OMA secrecy rate.
    #[arg(long)]
    pub allocate: bool,
    /// Relative tolerance of the quadrature oracle.
    #[arg(long, value_name = "F", allow_negative_numbers = true)]
    pub quad_tol: Option<f64>,
    /// Include σ_ε² in the OMA gains, as in the NOMA rates.
    #[arg(long)]
    pub oma_estimation_noise: bool,
    /// Write CSV here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[arg(long, value_name = "N")]
    pub mc_samples: Option<usize>,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub oracle: OracleArgs,
    /// Add quadrature and Monte Carlo columns.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub oracle: OracleArgs,
    /// i_peak_db, p_max_db, sigma_eps2 or m_prs.
    #[arg(long)]
    pub axis: Option<String>,
    /// Comma-separated axis values.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "range")]
    pub values: Option<String>,
    /// START:STOP:STEP, inclusive of STOP.
    #[arg(long, allow_hyphen_values = true)]
    pub range: Option<String>,
    #[arg(long, value_name = "N", default_value_t = 1)]
    pub parallel: usize,
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    /// Figure number.
    #[arg(value_parser = clap::value_parser!(u8).range(2..=5))]
    pub number: u8,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "N", default_value_t = 1)]
    pub parallel: usize,
    #[arg(long, value_name = "F", allow_negative_numbers = true)]
    pub quad_tol: Option<f64>,
    #[arg(long)]
    pub oma_estimation_noise: bool,
    #[command(flatten)]
    pub oracle: OracleArgs,
    /// Add quadrature and Monte Carlo columns.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub oracle: OracleArgs,
}

/// Why a command failed; decides the exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Config(String),
    Numeric(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Numeric(m) => write!(f, "numerical error: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain { .. }
            | Error::InvalidConfig { .. }
            | Error::ModelInvalid { .. }
            | Error::TooManyPrimaryReceivers { .. } => Failure::Config(e.to_string()),
            Error::Convergence(_) | Error::NonFinite(_) | Error::NegativeRate(_) | Error::NonMonotone { .. } => {
                Failure::Numeric(e.to_string())
            }
        }
    }
}

/// A fully resolved scenario plus evaluation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub config: SystemConfig,
    pub settings: EvalSettings,
    pub sweep: Option<SweepSpec>,
}

fn config_err(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

pub fn resolve(args: &ScenarioArgs, oracle: Option<&OracleArgs>, check: bool) -> Result<Resolved, Failure> {
    let Preset::Reference = args.preset;
    let mut cfg = SystemConfig::reference();
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
            FileConfig::parse(&text, &path.display().to_string()).map_err(config_err)?
        }
        None => FileConfig::default(),
    };
    if let Some(v) = &file.d_pr {
        cfg.d_pr = v.clone();
    }
    macro_rules! set {
        ($field:ident, $value:expr) => {
            if let Some(v) = $value {
                cfg.$field = v;
            }
        };
    }
    set!(d_near, file.d_near);
    set!(d_far, file.d_far);
    set!(d_eve, file.d_eve);
    set!(alpha, file.alpha);
    set!(sigma_eps2, file.sigma_eps2);
    set!(p_max, file.p_max_db.map(db_to_linear));
    set!(i_peak, file.i_peak_db.map(db_to_linear));
    set!(a_s, file.a_s);

    set!(alpha, args.alpha);
    set!(sigma_eps2, args.sigma_eps2);
    set!(p_max, args.pmax_db.map(db_to_linear));
    set!(i_peak, args.ip_db.map(db_to_linear));
    set!(a_s, args.a_s);

    let allocate = if args.a_s.is_some() {
        false
    } else {
        args.allocate || file.allocate.unwrap_or(false)
    };
    let oma = if args.oma_estimation_noise || file.oma_estimation_noise.unwrap_or(false) {
        OmaGains::WithEstimationNoise
    } else {
        OmaGains::Unshifted
    };
    let quad_tol = args.quad_tol.or(file.quad_tol).unwrap_or(DEFAULT_QUAD_TOL);
    let mc_samples = oracle
        .and_then(|o| o.mc_samples)
        .or(file.mc_samples)
        .unwrap_or(DEFAULT_MC_SAMPLES);
    let seed = oracle.and_then(|o| o.seed).or(file.seed).unwrap_or(DEFAULT_SEED);

    let origin = args
        .config
        .as_ref()
        .map_or_else(|| "scenario".to_string(), |p| p.display().to_string());
    let invalid = |e: Error| Failure::Config(format!("{origin}: {e}"));
    if allocate {
        cfg.validate_scenario().map_err(invalid)?;
    } else {
        cfg.validate().map_err(invalid)?;
    }
    if !(1e-10..=1e-4).contains(&quad_tol) {
        return Err(Failure::Config(format!("--quad-tol must lie in [1e-10, 1e-4], got {quad_tol:e}")));
    }
    if check && mc_samples < crate::oracles::monte_carlo::MIN_SAMPLES {
        return Err(Failure::Config(format!(
            "--mc-samples must be at least {}, got {mc_samples}",
            crate::oracles::monte_carlo::MIN_SAMPLES
        )));
    }
    Ok(Resolved {
        config: cfg,
        settings: EvalSettings {
            allocate,
            oma,
            quad_tol,
            check: check.then_some((mc_samples, seed)),
        },
        sweep: file.sweep,
    })
}

fn emit(out: Option<&Path>, content: &str) -> Result<(), Failure> {
    match out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => std::fs::write(path, content).map_err(|e| {
            let _ = std::fs::remove_file(path);
            Failure::Io(format!("cannot write {}: {e}", path.display()))
        }),
    }
}

fn eval(args: &EvalArgs) -> Result<(), Failure> {
    let r = resolve(&args.scenario, Some(&args.oracle), args.check)?;
    let record = sweep::evaluate_point("point", &r.config, &r.settings)?;
    let mut s = output::header("eval", &r, None, &[]);
    s.push_str(&output::records(&[record], args.check));
    emit(args.scenario.out.as_deref(), &s)
}

fn sweep_spec(args: &SweepArgs, from_file: Option<SweepSpec>) -> Result<SweepSpec, Failure> {
    let axis = match &args.axis {
        Some(a) => Some(a.parse::<Axis>().map_err(|e| Failure::Config(format!("--axis: {e}")))?),
        None => from_file.as_ref().map(|s| s.axis),
    };
    let values = if let Some(v) = &args.values {
        Some(config::parse_list(v).map_err(|e| Failure::Config(format!("--values: {e}")))?)
    } else if let Some(rg) = &args.range {
        let parts: Vec<&str> = rg.split(':').collect();
        let nums = match parts.as_slice() {
            [a, b, c] => [a, b, c].map(|x| x.trim().parse::<f64>()),
            _ => return Err(Failure::Config(format!("--range: expected START:STOP:STEP, got `{rg}`"))),
        };
        let [Ok(a), Ok(b), Ok(c)] = nums else {
            return Err(Failure::Config(format!("--range: cannot parse `{rg}`")));
        };
        Some(range(a, b, c).map_err(|e| Failure::Config(format!("--range: {e}")))?)
    } else {
        None
    };
    let values = values.or_else(|| {
        from_file
            .as_ref()
            .filter(|s| Some(s.axis) == axis)
            .map(|s| s.values.clone())
    });
    match (axis, values) {
        (Some(axis), Some(values)) => SweepSpec::new(axis, values).map_err(Failure::Config),
        (None, _) => Err(Failure::Config("sweep needs an axis (--axis or [sweep] axis)".into())),
        (Some(axis), None) => Err(Failure::Config(format!("sweep over {axis} needs --values or --range"))),
    }
}

fn run_plan(command: &str, r: &Resolved, plan: &Plan, threads: usize, check: bool, out: Option<&Path>) -> Result<(), Failure> {
    let start = Instant::now();
    let records = plan.run(&r.settings, threads)?;
    eprintln!("{command}: {} points in {:.2?}", records.len(), start.elapsed());
    let cases = plan.cases.iter().map(|c| c.label.as_str()).collect::<Vec<_>>().join(", ");
    let mut s = output::header(command, r, Some(&plan.sweep), &[("cases", cases)]);
    s.push_str(&output::records(&records, check));
    emit(out, &s)
}

fn sweep_cmd(args: &SweepArgs) -> Result<(), Failure> {
    let r = resolve(&args.scenario, Some(&args.oracle), args.check)?;
    let spec = sweep_spec(args, r.sweep.clone())?;
    let plan = Plan {
        base: r.config.clone(),
        cases: vec![Case::plain("sweep")],
        sweep: spec,
    };
    for (_, cfg) in plan.points() {
        let checked = if r.settings.allocate { cfg.validate_scenario() } else { cfg.validate() };
        checked.map_err(|e| Failure::Config(format!("sweep point: {e}")))?;
    }
    run_plan("sweep", &r, &plan, args.parallel, args.check, args.scenario.out.as_deref())
}

fn figure(args: &FigureArgs) -> Result<(), Failure> {
    let plan = figure_plan(args.number).ok_or_else(|| Failure::Config(format!("no figure {}", args.number)))?;
    let scenario = ScenarioArgs {
        config: None,
        preset: Preset::Reference,
        ip_db: None,
        pmax_db: None,
        sigma_eps2: None,
        alpha: None,
        a_s: None,
        allocate: true,
        quad_tol: args.quad_tol,
        oma_estimation_noise: args.oma_estimation_noise,
        out: args.out.clone(),
    };
    let r = resolve(&scenario, Some(&args.oracle), args.check)?;
    let command = format!("figure {}", args.number);
    run_plan(&command, &r, &plan, args.parallel, args.check, args.out.as_deref())
}

fn allocate(args: &ScenarioArgs) -> Result<(), Failure> {
    let mut forced = args.clone();
    forced.a_s = None;
    forced.allocate = true;
    let r = resolve(&forced, None, false)?;
    let opts = AllocationOptions {
        target_tol: r.settings.quad_tol,
        oma: r.settings.oma,
        ..AllocationOptions::default()
    };
    let a = match_strong_user_with(&r.config, opts)?;
    let cfg = r.config.clone().with_a_s(a.a_s);
    let (strong, weak) = esr_both(&cfg)?;
    let mut s = output::header("allocate", &r, None, &[]);
    s.push_str("i_peak_db,p_max_db,sigma_eps2,m_prs,a_s,a_w,achieved_gap,iterations,bracket_status,oma_strong_target,esr_strong,esr_weak,essr\n");
    let _ = writeln!(
        s,
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        fmt_sig(linear_to_db(cfg.i_peak)),
        fmt_sig(linear_to_db(cfg.p_max)),
        fmt_sig(cfg.sigma_eps2),
        cfg.m_prs(),
        fmt_sig(a.a_s),
        fmt_sig(a.a_w),
        fmt_sig(a.achieved_gap),
        a.iterations,
        a.bracket_status.name(),
        fmt_sig(a.target),
        fmt_sig(strong.total),
        fmt_sig(weak.total),
        fmt_sig(strong.total + weak.total),
    );
    emit(args.out.as_deref(), &s)
}

fn check(args: &CheckArgs) -> Result<(), Failure> {
    let r = resolve(&args.scenario, Some(&args.oracle), true)?;
    let cfg = if r.settings.allocate {
        let opts = AllocationOptions {
            target_tol: r.settings.quad_tol,
            oma: r.settings.oma,
            ..AllocationOptions::default()
        };
        r.config.clone().with_a_s(match_strong_user_with(&r.config, opts)?.a_s)
    } else {
        r.config.clone()
    };
    let (n, seed) = r.settings.check.expect("check always samples");
    let (strong, weak) = esr_both(&cfg)?;
    let mut s = output::header("check", &r, None, &[("a_s_used", fmt_sig(cfg.a_s))]);
    s.push_str("mode,closed_form,quad,quad_rel_err,mc_mean,mc_stderr,mc_z,agree\n");
    let mut all_agree = true;
    for mode in RateMode::ALL {
        let quad = quad_breakdown(&cfg, mode, r.settings.oma, r.settings.quad_tol)?.total;
        let mc = mc_esr_with(&cfg, mode, r.settings.oma, n, seed)?;
        let closed = match mode {
            RateMode::NomaStrong => Some(strong.total),
            RateMode::NomaWeak => Some(weak.total),
            _ => None,
        };
        let rel_err = closed.map(|c| (c - quad).abs() / quad.max(1e-6));
        let z = mc.z_score(closed.unwrap_or(quad));
        let agree = rel_err.is_none_or(|e| e <= CHECK_REL_TOL) && z <= CHECK_Z;
        all_agree &= agree;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            mode.name(),
            closed.map_or(String::new(), fmt_sig),
            fmt_sig(quad),
            rel_err.map_or(String::new(), fmt_sig),
            fmt_sig(mc.mean),
            fmt_sig(mc.stderr),
            fmt_sig(z),
            agree
        );
    }
    emit(args.scenario.out.as_deref(), &s)?;
    if all_agree {
        Ok(())
    } else {
        Err(Failure::Numeric("oracles disagree; see the agree column".into()))
    }
}

/// Runs a parsed command.
pub fn execute(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Eval(a) => eval(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Figure(a) => figure(a),
        Command::Allocate(a) => allocate(a),
        Command::Check(a) => check(a),
    }
}

/// Parses `std::env::args`, runs, and returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("noma-secrecy: {f}");
            f.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("noma-secrecy").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn as_conflicts_with_allocate() {
        let r = Cli::try_parse_from(["noma-secrecy", "eval", "--as", "0.2", "--allocate"]);
        assert!(r.is_err());
    }

    #[test]
    fn flags_override_preset() {
        let Command::Eval(a) = parse(&["eval", "--ip-db", "-120", "--pmax-db", "40", "--as", "0.3"]).command else {
            unreachable!()
        };
        let r = resolve(&a.scenario, Some(&a.oracle), false).unwrap();
        assert!((r.config.i_peak - 1e-12).abs() < 1e-24);
        assert!((r.config.p_max - 1e4).abs() < 1e-8);
        assert_eq!(r.config.a_s, 0.3);
        assert!(!r.settings.allocate);
    }

    #[test]
    fn invalid_link_is_a_config_error_naming_the_link() {
        let Command::Eval(a) = parse(&["eval", "--sigma-eps2", "5e-5"]).command else {
            unreachable!()
        };
        let e = resolve(&a.scenario, None, false).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("PR1"), "{e}");
    }

    #[test]
    fn numeric_errors_map_to_exit_three() {
        assert_eq!(Failure::from(Error::Convergence("x".into())).exit_code(), 3);
        assert_eq!(Failure::from(Error::NegativeRate(-1.0)).exit_code(), 3);
    }
}
