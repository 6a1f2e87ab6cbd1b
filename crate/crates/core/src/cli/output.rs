//! CSV rendering. Powers are written in dB, every number with six
//! significant digits, and a `#`-prefixed header records the resolved
//! configuration so a file can be reproduced from its own contents.

use std::fmt::Write as _;

use super::sweep::{fmt_sig, RunRecord, SweepSpec};
use super::Resolved;
use crate::model::linear_to_db;
use crate::oracles::OmaGains;

pub const RECORD_COLUMNS: [&str; 14] = [
    "case",
    "i_peak_db",
    "p_max_db",
    "sigma_eps2",
    "m_prs",
    "a_s",
    "bracket_status",
    "esr_strong",
    "esr_weak",
    "essr",
    "essr_asymptotic",
    "oma_strong",
    "oma_weak",
    "oma_essr",
];

pub const CHECK_COLUMNS: [&str; 6] = [
    "quad_strong",
    "quad_weak",
    "mc_strong",
    "mc_strong_stderr",
    "mc_weak",
    "mc_weak_stderr",
];

/// `# noma-secrecy <command>` followed by the `# config:` block.
pub fn header(command: &str, r: &Resolved, sweep: Option<&SweepSpec>, extra: &[(&str, String)]) -> String {
    let c = &r.config;
    let mut s = String::new();
    let _ = writeln!(s, "# noma-secrecy {} {command}", env!("CARGO_PKG_VERSION"));
    s.push_str("# config:\n");
    let list = c.d_pr.iter().map(|&d| fmt_sig(d)).collect::<Vec<_>>().join(", ");
    let mut kv = vec![
        ("d_pr", list),
        ("d_near", fmt_sig(c.d_near)),
        ("d_far", fmt_sig(c.d_far)),
        ("d_eve", fmt_sig(c.d_eve)),
        ("alpha", fmt_sig(c.alpha)),
        ("sigma_eps2", fmt_sig(c.sigma_eps2)),
        ("p_max_db", fmt_sig(linear_to_db(c.p_max))),
        ("i_peak_db", fmt_sig(linear_to_db(c.i_peak))),
    ];
    if r.settings.allocate {
        kv.push(("allocate", "true".into()));
    } else {
        kv.push(("a_s", fmt_sig(c.a_s)));
    }
    kv.push((
        "oma_estimation_noise",
        (r.settings.oma == OmaGains::WithEstimationNoise).to_string(),
    ));
    kv.push(("quad_tol", fmt_sig(r.settings.quad_tol)));
    if let Some((n, seed)) = r.settings.check {
        kv.push(("mc_samples", n.to_string()));
        kv.push(("seed", seed.to_string()));
    }
    for (k, v) in kv.into_iter().chain(extra.iter().map(|(k, v)| (*k, v.clone()))) {
        let _ = writeln!(s, "#   {k} = {v}");
    }
    if let Some(sw) = sweep {
        let values = sw.values.iter().map(|&v| fmt_sig(v)).collect::<Vec<_>>().join(", ");
        let _ = writeln!(s, "# sweep: {} = {values}", sw.axis);
    }
    s
}

pub fn records(records: &[RunRecord], with_check: bool) -> String {
    let mut s = String::new();
    let mut cols: Vec<&str> = RECORD_COLUMNS.to_vec();
    if with_check {
        cols.extend(CHECK_COLUMNS);
    }
    s.push_str(&cols.join(","));
    s.push('\n');
    for r in records {
        let c = &r.config;
        let status = r.allocation.map_or("fixed", |a| a.bracket_status.name());
        let mut row = vec![
            r.case.clone(),
            fmt_sig(linear_to_db(c.i_peak)),
            fmt_sig(linear_to_db(c.p_max)),
            fmt_sig(c.sigma_eps2),
            c.m_prs().to_string(),
            fmt_sig(c.a_s),
            status.to_string(),
            fmt_sig(r.esr_strong),
            fmt_sig(r.esr_weak),
            fmt_sig(r.essr),
            fmt_sig(r.essr_asymptotic),
            fmt_sig(r.oma_strong),
            fmt_sig(r.oma_weak),
            fmt_sig(r.oma_essr()),
        ];
        if with_check {
            if let Some(k) = &r.check {
                row.extend([
                    fmt_sig(k.quad_strong),
                    fmt_sig(k.quad_weak),
                    fmt_sig(k.mc_strong.mean),
                    fmt_sig(k.mc_strong.stderr),
                    fmt_sig(k.mc_weak.mean),
                    fmt_sig(k.mc_weak.stderr),
                ]);
            }
        }
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}
