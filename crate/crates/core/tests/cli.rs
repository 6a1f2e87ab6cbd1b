use std::collections::HashMap;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noma-secrecy"))
        .args(args)
        .output()
        .expect("spawn noma-secrecy")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Data rows keyed by column name.
fn rows(csv: &str) -> Vec<HashMap<String, String>> {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<String> = lines.next().expect("header").split(',').map(String::from).collect();
    lines
        .map(|l| header.iter().cloned().zip(l.split(',').map(String::from)).collect())
        .collect()
}

fn num(row: &HashMap<String, String>, col: &str) -> f64 {
    row[col].parse().unwrap_or_else(|_| panic!("{col} = {:?}", row[col]))
}

fn ok(args: &[&str]) -> Vec<HashMap<String, String>> {
    let o = bin(args);
    assert!(o.status.success(), "{args:?} failed: {}", stderr(&o));
    rows(&stdout(&o))
}

#[test]
fn eval_emits_one_positive_row() {
    let r = ok(&["eval", "--preset", "paper-defaults", "--ip-db", "10", "--pmax-db", "50", "--as", "0.2"]);
    assert_eq!(r.len(), 1);
    assert!(num(&r[0], "essr") > 0.0);
    assert_eq!(r[0]["a_s"], "0.2");
    assert_eq!(r[0]["bracket_status"], "fixed");
}

#[test]
fn negligible_interference_budget_gives_zero_rate() {
    let r = ok(&["eval", "--ip-db", "-120", "--as", "0.2"]);
    assert!(num(&r[0], "essr") < 1e-6, "{}", r[0]["essr"]);
}

#[test]
fn header_records_the_resolved_config() {
    let o = bin(&["eval", "--ip-db", "3", "--as", "0.25"]);
    let text = stdout(&o);
    assert!(text.starts_with("# noma-secrecy "));
    assert!(text.contains("# config:\n"));
    assert!(text.contains("#   i_peak_db = 3\n"));
    assert!(text.contains("#   a_s = 0.25\n"));
    assert!(!text.contains('\r'));
}

#[test]
fn invalid_eavesdropper_distance_exits_2_naming_the_link() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.ini");
    std::fs::write(&path, "[scenario]\nd_eve = 500\n").unwrap();
    let o = bin(&["eval", "--config", path.to_str().unwrap(), "--as", "0.2"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.to_lowercase().contains("eve"), "{err}");
}

#[test]
fn config_syntax_errors_carry_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.ini");
    std::fs::write(&path, "[scenario]\nalpha = 2\np_max_db = lots\n").unwrap();
    let o = bin(&["eval", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.ini:3:"), "{}", stderr(&o));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.ini");
    std::fs::write(&path, "[scenario]\ni_peak_db = -5\na_s = 0.3\n").unwrap();
    let p = path.to_str().unwrap();
    let r = ok(&["eval", "--config", p]);
    assert_eq!(r[0]["i_peak_db"], "-5");
    assert_eq!(r[0]["a_s"], "0.3");
    let r = ok(&["eval", "--config", p, "--ip-db", "7"]);
    assert_eq!(r[0]["i_peak_db"], "7");
}

#[test]
fn as_and_allocate_are_exclusive() {
    assert_eq!(bin(&["eval", "--as", "0.2", "--allocate"]).status.code(), Some(2));
}

#[test]
fn allocate_reports_a_converged_split() {
    let r = ok(&["allocate", "--ip-db", "10"]);
    assert_eq!(r[0]["bracket_status"], "converged");
    let a_s = num(&r[0], "a_s");
    assert!(a_s > 0.0 && a_s < 0.5);
    assert!(num(&r[0], "achieved_gap").abs() <= 1e-6);
    assert!((num(&r[0], "a_w") + a_s - 1.0).abs() < 1e-5);
}

#[test]
fn essr_is_nondecreasing_in_the_interference_budget() {
    for mode in [["--as", "0.2"], ["--allocate", "--oma-estimation-noise"]] {
        let mut args = vec!["sweep", "--axis", "i_peak_db", "--range", "-10:20:2", "--pmax-db", "40"];
        args.extend(mode);
        let r = ok(&args);
        assert_eq!(r.len(), 16);
        let essr: Vec<f64> = r.iter().map(|row| num(row, "essr")).collect();
        // Six significant digits in the file.
        assert!(essr.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-6)), "{mode:?}: {essr:?}");
    }
}

#[test]
fn more_primary_receivers_cost_rate_but_not_the_asymptote() {
    let r = ok(&["sweep", "--axis", "m_prs", "--values", "1,2,4,10", "--ip-db", "-10", "--as", "0.2"]);
    let essr: Vec<f64> = r.iter().map(|row| num(row, "essr")).collect();
    assert!(essr.windows(2).all(|w| w[1] < w[0]), "{essr:?}");
    let asym: Vec<&str> = r.iter().map(|row| row["essr_asymptotic"].as_str()).collect();
    assert!(asym.iter().all(|a| *a == asym[0]), "{asym:?}");
}

#[test]
fn sigma_sweep_beyond_the_link_gains_is_rejected() {
    let o = bin(&["sweep", "--axis", "sigma_eps2", "--values", "1e-5,2e-5,5e-5", "--as", "0.2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("PR1"), "{}", stderr(&o));
}

#[test]
fn sweep_output_is_independent_of_thread_count() {
    let base = ["sweep", "--axis", "p_max_db", "--values", "40,45,50,55,60", "--allocate"];
    let one = bin(&[&base[..], &["--parallel", "1"]].concat());
    let four = bin(&[&base[..], &["--parallel", "4"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn checked_eval_is_reproducible() {
    let args = ["eval", "--as", "0.2", "--check", "--mc-samples", "20000", "--seed", "11"];
    let (a, b) = (bin(&args), bin(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let r = rows(&stdout(&a));
    assert!((num(&r[0], "quad_strong") - num(&r[0], "esr_strong")).abs() < 1e-5);
}

#[test]
fn check_reports_agreement() {
    let o = bin(&["check", "--as", "0.3", "--ip-db", "0", "--mc-samples", "200000", "--seed", "5"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 4);
    assert!(r.iter().all(|row| row["agree"] == "true"));
}

#[test]
fn figure_5_orders_cases_by_primary_receivers() {
    let o = bin(&["figure", "5", "--parallel", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    let at = |case: &str, ip: &str| {
        r.iter()
            .find(|row| row["case"] == case && row["i_peak_db"] == ip)
            .map(|row| num(row, "essr"))
            .unwrap_or_else(|| panic!("no row {case} @ {ip}"))
    };
    for p in ["40", "60"] {
        let (one, three) = (format!("case1_pmax{p}"), format!("case3_pmax{p}"));
        assert!(at(&three, "-10") < at(&one, "-10"), "P_max {p}");
    }
    let high: Vec<f64> = ["case1_pmax40", "case2_pmax40", "case3_pmax40"].iter().map(|c| at(c, "20")).collect();
    let (lo, hi) = high.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
    assert!((hi - lo) / lo <= 0.01, "{high:?}");
}

#[test]
fn figure_3_with_consistent_oma_favors_noma() {
    let o = bin(&["figure", "3", "--oma-estimation-noise", "--parallel", "4"]);
    assert!(o.status.success());
    for row in rows(&stdout(&o)) {
        assert!(num(&row, "essr") >= num(&row, "oma_essr"), "{row:?}");
    }
}

#[test]
fn unknown_figure_is_a_usage_error() {
    assert_eq!(bin(&["figure", "7"]).status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.csv");
    let o = bin(&["eval", "--as", "0.2", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!path.exists());
}

#[test]
fn out_writes_the_same_bytes_as_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let o = bin(&["eval", "--as", "0.2", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), bin(&["eval", "--as", "0.2"]).stdout);
}
