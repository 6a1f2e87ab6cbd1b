//! Flat `key = value` configuration files with `[scenario]`, `[sweep]` and
//! `[oracle]` sections.
//!
//! ```text
//! # comments start with '#' or ';'
//! [scenario]
//! d_pr = 200, 205, 210, 215
//! sigma_eps2 = 2e-5
//! p_max_db = 50
//! i_peak_db = 10
//! allocate = true
//!
//! [sweep]
//! axis = i_peak_db
//! start = -10
//! stop = 20
//! step = 2
//!
//! [oracle]
//! mc_samples = 1000000
//! seed = 7
//! ```

use std::fmt;
use std::str::FromStr;

use super::sweep::{Axis, SweepSpec};

/// A configuration problem, located as precisely as possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub source: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}", self.source, line, self.message),
            None => write!(f, "{}: {}", self.source, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Values read from a file; every field is optional and overrides the preset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    pub d_pr: Option<Vec<f64>>,
    pub d_near: Option<f64>,
    pub d_far: Option<f64>,
    pub d_eve: Option<f64>,
    pub alpha: Option<f64>,
    pub sigma_eps2: Option<f64>,
    pub p_max_db: Option<f64>,
    pub i_peak_db: Option<f64>,
    pub a_s: Option<f64>,
    pub allocate: Option<bool>,
    pub oma_estimation_noise: Option<bool>,
    pub sweep: Option<SweepSpec>,
    pub mc_samples: Option<usize>,
    pub seed: Option<u64>,
    pub quad_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Section {
    Scenario,
    Sweep,
    Oracle,
}

#[derive(Default)]
struct SweepDraft {
    axis: Option<(Axis, usize)>,
    values: Option<(Vec<f64>, usize)>,
    start: Option<(f64, usize)>,
    stop: Option<(f64, usize)>,
    step: Option<(f64, usize)>,
}

impl FileConfig {
    /// Parses `text`; `source` names the file in diagnostics.
    pub fn parse(text: &str, source: &str) -> Result<Self, ConfigError> {
        let err = |line: usize, message: String| ConfigError {
            source: source.to_string(),
            line: Some(line),
            message,
        };
        let mut cfg = FileConfig::default();
        let mut sweep = SweepDraft::default();
        let mut section = None;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| err(line_no, format!("malformed section header `{line}`")))?;
                section = Some(match name.trim() {
                    "scenario" => Section::Scenario,
                    "sweep" => Section::Sweep,
                    "oracle" => Section::Oracle,
                    other => {
                        return Err(err(
                            line_no,
                            format!("unknown section [{other}] (expected scenario, sweep or oracle)"),
                        ))
                    }
                });
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(line_no, format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let section =
                section.ok_or_else(|| err(line_no, format!("`{key}` appears before any [section] header")))?;
            let bad = |e: String| err(line_no, format!("[{}] {key}: {e}", section_name(section)));

            match (section, key) {
                (Section::Scenario, "d_pr") => cfg.d_pr = Some(parse_list(value).map_err(bad)?),
                (Section::Scenario, "d_near") => cfg.d_near = Some(parse(value).map_err(bad)?),
                (Section::Scenario, "d_far") => cfg.d_far = Some(parse(value).map_err(bad)?),
                (Section::Scenario, "d_eve") => cfg.d_eve = Some(parse(value).map_err(bad)?),
                (Section::Scenario, "alpha") => cfg.alpha = Some(parse(value).map_err(bad)?),
                (Section::Scenario, "sigma_eps2") => cfg.sigma_eps2 = Some(parse(value).map_err(bad)?),
                (Section::Scenario, "p_max_db") => cfg.p_max_db = Some(parse(value).map_err(bad)?),
                (Section::Scenario, "i_peak_db") => cfg.i_peak_db = Some(parse(value).map_err(bad)?),
                (Section::Scenario, "a_s") => cfg.a_s = Some(parse(value).map_err(bad)?),
                (Section::Scenario, "allocate") => cfg.allocate = Some(parse_bool(value).map_err(bad)?),
                (Section::Scenario, "oma_estimation_noise") => {
                    cfg.oma_estimation_noise = Some(parse_bool(value).map_err(bad)?)
                }
                (Section::Sweep, "axis") => {
                    sweep.axis = Some((value.parse::<Axis>().map_err(bad)?, line_no))
                }
                (Section::Sweep, "values") => sweep.values = Some((parse_list(value).map_err(bad)?, line_no)),
                (Section::Sweep, "start") => sweep.start = Some((parse(value).map_err(bad)?, line_no)),
                (Section::Sweep, "stop") => sweep.stop = Some((parse(value).map_err(bad)?, line_no)),
                (Section::Sweep, "step") => sweep.step = Some((parse(value).map_err(bad)?, line_no)),
                (Section::Oracle, "mc_samples") => cfg.mc_samples = Some(parse(value).map_err(bad)?),
                (Section::Oracle, "seed") => cfg.seed = Some(parse(value).map_err(bad)?),
                (Section::Oracle, "quad_tol") => cfg.quad_tol = Some(parse(value).map_err(bad)?),
                (s, k) => return Err(err(line_no, format!("unknown key `{k}` in [{}]", section_name(s)))),
            }
        }

        cfg.sweep = finish_sweep(sweep, source)?;
        Ok(cfg)
    }
}

fn finish_sweep(d: SweepDraft, source: &str) -> Result<Option<SweepSpec>, ConfigError> {
    let err = |line: Option<usize>, message: String| ConfigError {
        source: source.to_string(),
        line,
        message,
    };
    let any_range = d.start.is_some() || d.stop.is_some() || d.step.is_some();
    let Some((axis, axis_line)) = d.axis else {
        if d.values.is_some() || any_range {
            let line = d.values.as_ref().map(|v| v.1).or(d.start.map(|v| v.1));
            return Err(err(line, "[sweep] needs an `axis`".into()));
        }
        return Ok(None);
    };
    let values = match (d.values, any_range) {
        (Some((_, line)), true) => {
            return Err(err(Some(line), "[sweep] takes either `values` or start/stop/step, not both".into()))
        }
        (Some((v, _)), false) => v,
        (None, true) => {
            let (Some((start, _)), Some((stop, _)), Some((step, line))) = (d.start, d.stop, d.step) else {
                return Err(err(Some(axis_line), "[sweep] range needs all of start, stop and step".into()));
            };
            super::sweep::range(start, stop, step).map_err(|e| err(Some(line), format!("[sweep] {e}")))?
        }
        (None, false) => return Err(err(Some(axis_line), "[sweep] has an axis but no values".into())),
    };
    SweepSpec::new(axis, values)
        .map(Some)
        .map_err(|e| err(Some(axis_line), format!("[sweep] {e}")))
}

fn section_name(s: Section) -> &'static str {
    match s {
        Section::Scenario => "scenario",
        Section::Sweep => "sweep",
        Section::Oracle => "oracle",
    }
}

fn parse<T: FromStr>(value: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| format!("cannot parse `{value}`: {e}"))
}

fn parse_bool(value: &str) -> Result<bool, String> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got `{value}`")),
    }
}

/// Comma- or whitespace-separated numbers.
pub fn parse_list(value: &str) -> Result<Vec<f64>, String> {
    let items: Vec<&str> = value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err("empty list".into());
    }
    items.into_iter().map(parse::<f64>).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_file() {
        let text = "\
# scenario with a sweep
[scenario]
d_pr = 200, 205 210
sigma_eps2 = 1e-5
allocate = yes

[sweep]
axis = i_peak_db
start = -10
stop = 0
step = 5

[oracle]
seed = 9
";
        let cfg = FileConfig::parse(text, "t.ini").unwrap();
        assert_eq!(cfg.d_pr, Some(vec![200.0, 205.0, 210.0]));
        assert_eq!(cfg.sigma_eps2, Some(1e-5));
        assert_eq!(cfg.allocate, Some(true));
        assert_eq!(cfg.seed, Some(9));
        let sweep = cfg.sweep.unwrap();
        assert_eq!(sweep.axis, Axis::IPeakDb);
        assert_eq!(sweep.values, vec![-10.0, -5.0, 0.0]);
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        let e = FileConfig::parse("[scenario]\n\nd_eve = far\n", "x.ini").unwrap_err();
        assert_eq!(e.line, Some(3));
        assert!(e.to_string().starts_with("x.ini:3: [scenario] d_eve"), "{e}");

        let e = FileConfig::parse("[scenario]\nd_moon = 3\n", "x.ini").unwrap_err();
        assert!(e.to_string().contains("unknown key `d_moon`"));

        let e = FileConfig::parse("alpha = 2\n", "x.ini").unwrap_err();
        assert_eq!(e.line, Some(1));

        let e = FileConfig::parse("[sweep]\naxis = m_prs\nvalues = 3, 2\n", "x.ini").unwrap_err();
        assert!(e.message.contains("increasing"), "{e}");
    }
}
