use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use vradmm_bench::experiment::read_summary;
use vradmm_bench::trace::CSV_COLUMNS;

const SWEEP: &str = r#"{
    "data": {"synthetic_binary": {"n": 150, "d": 8, "seed": 2}},
    "problem": {"graph": {"lambda": 1e-5}},
    "solvers": [{"solver": "spider"}, {"solver": "svrg"}],
    "defaults": {"iterations": 80},
    "seeds": [1, 2, 3],
    "out_dir": "runs"
}"#;

fn vradmm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vradmm")).args(args).output().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn csvs(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    v.sort();
    v
}

fn strip_seconds(text: &str) -> String {
    text.lines().map(|l| l.rsplit_once(',').unwrap().0).collect::<Vec<_>>().join("\n")
}

#[test]
fn bench_sweep_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    fs::write(&cfg, SWEEP).unwrap();
    let cfg = cfg.to_str().unwrap();
    ok(&vradmm(&["bench", "--config", cfg]));
    let first = dir.path().join("runs");
    let names = csvs(&first);
    assert_eq!(names.len(), 6, "{names:?}");
    for n in &names {
        let text = fs::read_to_string(first.join(n)).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(lines.clone().count(), 80);
        assert!(lines.all(|l| l.split(',').count() == 9));
    }
    let summary = read_summary(first.join("summary.json")).unwrap();
    assert_eq!(summary.runs.len(), 6);

    let second = dir.path().join("again");
    ok(&vradmm(&["bench", "--config", cfg, "--out", second.to_str().unwrap()]));
    assert_eq!(csvs(&second), names);
    for n in &names {
        let a = fs::read_to_string(first.join(n)).unwrap();
        let b = fs::read_to_string(second.join(n)).unwrap();
        assert_eq!(strip_seconds(&a), strip_seconds(&b), "{n}");
    }
    assert_eq!(
        fs::read(first.join("summary.json")).unwrap(),
        fs::read(second.join("summary.json")).unwrap()
    );
}

#[test]
fn solve_applies_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let stdout = ok(&vradmm(&[
        "solve", "--solver", "saga", "--seed", "9", "--iters", "25", "--alpha", "0.5", "--out", out,
    ]));
    assert!(stdout.contains("saga seed 9: 25 iterations"), "{stdout}");
    assert_eq!(csvs(dir.path()), vec!["saga-seed9.csv".to_string()]);
    let s = read_summary(dir.path().join("summary.json")).unwrap();
    let spectra = s.runs[0].spectra.as_ref().unwrap();

    let dir2 = tempfile::tempdir().unwrap();
    let out2 = dir2.path().to_str().unwrap();
    ok(&vradmm(&["solve", "--solver", "saga", "--seed", "9", "--iters", "25", "--out", out2]));
    let s2 = read_summary(dir2.path().join("summary.json")).unwrap();
    let spectra2 = s2.runs[0].spectra.as_ref().unwrap();
    // Halving alpha doubles rho and halves eta.
    assert!((spectra.rho / spectra2.rho - 2.0).abs() < 1e-12);
    assert!((spectra.eta / spectra2.eta - 0.5).abs() < 1e-12);
}

#[test]
fn rho_eta_overrides_and_lyapunov_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&vradmm(&[
        "solve", "--solver", "spider", "--iters", "10", "--rho", "3", "--eta", "0.25", "--lyapunov", "--out", out,
    ]));
    let s = read_summary(dir.path().join("summary.json")).unwrap();
    let r = &s.runs[0];
    let spectra = r.spectra.as_ref().unwrap();
    assert_eq!((spectra.rho, spectra.eta), (3.0, 0.25));
    assert!(r.lyapunov_violations.is_some());
}

#[test]
fn theory_rho_flag_changes_the_penalty() {
    // One edge with mu = 6.5 gives kappa_A = 44.25 / 42.25, inside the range
    // where the fixed point exists; with kappa_A = 1 it equals the base value.
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("e.txt"), "0 1\n").unwrap();
    let cfg = dir.path().join("one-edge.json");
    let graph = r#""lambda": 1e-5, "mu": 6.5, "edges": "e.txt""#;
    fs::write(&cfg, SWEEP.replace(r#""lambda": 1e-5"#, graph)).unwrap();
    let cfg = cfg.to_str().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&vradmm(&["solve", "--config", cfg, "--iters", "5", "--out", a.to_str().unwrap()]));
    ok(&vradmm(&["solve", "--config", cfg, "--iters", "5", "--theory-rho", "--out", b.to_str().unwrap()]));
    let rho = |d: &Path| read_summary(d.join("summary.json")).unwrap().runs[0].spectra.as_ref().unwrap().rho;
    assert!(rho(&b) > rho(&a));
}

#[test]
fn theory_rho_reports_an_infeasible_fixed_point() {
    // The chain graph has kappa_A near 4.6, too large for the fixed point.
    let dir = tempfile::tempdir().unwrap();
    let out = vradmm(&["solve", "--iters", "5", "--theory-rho", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fixed-point"));
}

#[test]
fn check_suite_passes() {
    let stdout = ok(&vradmm(&["check"]));
    assert!(stdout.lines().filter(|l| l.starts_with("PASS")).count() >= 10, "{stdout}");
    assert!(!stdout.contains("FAIL"), "{stdout}");
}

#[test]
fn graph_dumps_edges() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.libsvm");
    // Features 1 and 2 move together; feature 3 is independent.
    let rows = ["+1 1:1 2:2 3:5", "-1 1:2 2:4 3:1", "+1 1:3 2:6 3:4", "-1 1:4 2:8 3:2"];
    fs::write(&data, rows.join("\n")).unwrap();
    let stdout = ok(&vradmm(&["graph", "--libsvm", data.to_str().unwrap()]));
    assert_eq!(stdout.trim(), "0 1");
    let edges = dir.path().join("e.txt");
    ok(&vradmm(&["graph", "--libsvm", data.to_str().unwrap(), "--out", edges.to_str().unwrap()]));
    assert_eq!(fs::read_to_string(&edges).unwrap().trim(), "0 1");
}

#[test]
fn bad_input_exits_nonzero_with_message() {
    let out = vradmm(&["bench", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/cfg.json"));
    let out = vradmm(&["solve", "--solver", "nope"]);
    assert!(!out.status.success());
}
