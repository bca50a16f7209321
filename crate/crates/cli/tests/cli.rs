//! End-to-end tests of the `kinklab` binary: exit codes, JSON records and
//! the files written by `figures` and `simulate`.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kinklab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kinklab"))
        .args(args)
        .env_remove("KINKLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let out = kinklab(&full);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# kinklab "));
    lines.next().unwrap();
    lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn phi6_kinks_are_both_satisfied() {
    let v = json(&["check", "--family", "phi6", "--all-pairs"]);
    let recs = v["records"].as_array().unwrap();
    assert_eq!(recs.len(), 2);
    let pairs: Vec<(f64, f64)> = recs
        .iter()
        .map(|r| (r["left"].as_f64().unwrap(), r["right"].as_f64().unwrap()))
        .collect();
    assert_eq!(pairs, [(-1.0, 0.0), (0.0, 1.0)]);
    assert_eq!(recs[0]["classification"], "satisfied-at-left-end");
    assert_eq!(recs[1]["classification"], "satisfied-at-right-end");
}

#[test]
fn dsg1_with_small_negative_eta_is_satisfied() {
    let v = json(&["check", "--family", "dsg1", "--eta", "-0.1"]);
    let r = &v["records"][0];
    assert_eq!(r["classification"], "satisfied-at-point");
    assert!(r["zeta0"].as_f64().unwrap().abs() < 1e-6);
}

#[test]
fn sine_gordon_is_constant_with_a_note() {
    let v = json(&["check", "--family", "sg"]);
    assert_eq!(v["records"][0]["classification"], "constant");
    assert_eq!(
        v["records"][0]["right"].as_f64().unwrap(),
        2.0 * std::f64::consts::PI
    );
    assert!(v["notes"][0].as_str().unwrap().contains("constant"));
}

#[test]
fn text_output_lists_the_same_records() {
    let out = kinklab(&["check", "--family", "phi6", "--all-pairs"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("potential"));
    assert!(lines[1].contains("satisfied-at-left-end"));
    assert!(lines[2].contains("satisfied-at-right-end"));
}

#[test]
fn invalid_parameters_exit_2() {
    assert_eq!(
        code(&kinklab(&["check", "--family", "phi8", "--m", "0.5"])),
        2
    );
    assert_eq!(
        code(&kinklab(&["check", "--family", "dsg1", "--eta", "-0.5"])),
        2
    );
    assert_eq!(code(&kinklab(&["check", "--family", "nope"])), 2);
    assert_eq!(
        code(&kinklab(&["check", "--family", "phi4", "--pair", "0,1"])),
        2
    );
}

#[test]
fn sweeps_find_the_three_thresholds() {
    let cases = [
        ("phi8", "1.1,3", "-1", (2.0 + 3f64.sqrt()).sqrt()),
        ("phi8", "1.1,4", "1", 5f64.sqrt()),
        ("phi10", "1.1,3", "1", 21f64.sqrt() / 3.0),
    ];
    for (family, range, start, exact) in cases {
        let v = json(&[
            "sweep",
            "--family",
            family,
            "--range",
            range,
            "--pair-start",
            start,
        ]);
        let r = &v["records"][0];
        let est = r["estimate"].as_f64().unwrap();
        assert!(
            (est - exact).abs() <= 1e-6,
            "{family} {start}: {est} vs {exact}"
        );
        assert!(r["hi"].as_f64().unwrap() - r["lo"].as_f64().unwrap() <= 1e-6);
    }
}

#[test]
fn sweep_without_a_transition_exits_3() {
    let out = kinklab(&[
        "sweep",
        "--family",
        "phi8",
        "--range",
        "2.5,3",
        "--pair-start",
        "1",
    ]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("no transition"));
}

#[test]
fn sweep_honours_the_thread_variable() {
    let out = Command::new(env!("CARGO_BIN_EXE_kinklab"))
        .args([
            "--json",
            "sweep",
            "--family",
            "phi10",
            "--range",
            "1.1,3",
            "--pair-start",
            "1",
        ])
        .env("KINKLAB_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["records"][0]["estimate"].as_f64().unwrap() - 21f64.sqrt() / 3.0).abs() <= 1e-6);
}

#[test]
fn figures_are_deterministic_and_hit_the_axis_point() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = kinklab(&["figures", "phi8", "--out-dir", dir.path().to_str().unwrap()]);
        assert!(out.status.success());
    }
    for f in ["phi8_sign.csv", "phi8_contour.csv", "phi8_branches.csv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f} differs between runs");
    }
    let k = (2.0 + 3f64.sqrt()).sqrt();
    let hits = csv_rows(&a.path().join("phi8_contour.csv"))
        .iter()
        .flat_map(|r| [(r[0], r[1]), (r[2], r[3])])
        .filter(|&(x, m)| x == 0.0 && (m - k).abs() < 1e-3)
        .count();
    assert!(hits > 0);
    let sign = csv_rows(&a.path().join("phi8_sign.csv"));
    assert_eq!(sign.len(), 301 * 301);
    assert!(sign.iter().all(|r| r[0] >= 0.0 && r[1] >= 1.0));
}

#[test]
fn phi10_contour_spans_the_branch_domain() {
    let dir = tempfile::tempdir().unwrap();
    let out = kinklab(&[
        "figures",
        "phi10",
        "--out-dir",
        dir.path().to_str().unwrap(),
        "--m-min",
        "0.8",
        "--nphi",
        "601",
    ]);
    assert!(out.status.success());
    let d = (40.0f64 / 147.0).sqrt();
    let (p1, p2) = ((5.0 / 7.0 - d).sqrt(), (5.0 / 7.0 + d).sqrt());
    let xs: Vec<f64> = csv_rows(&dir.path().join("phi10_contour.csv"))
        .iter()
        .flat_map(|r| [r[0], r[2]])
        .filter(|&x| x > 0.05)
        .collect();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(0.0, f64::max);
    assert!((lo - p1).abs() < 3e-3, "{lo} vs {p1}");
    assert!((hi - p2).abs() < 3e-3, "{hi} vs {p2}");
}

#[test]
fn spectrum_of_phi4_has_the_two_bound_states() {
    let v = json(&[
        "spectrum",
        "--family",
        "phi4",
        "--half-width",
        "20",
        "--count",
        "3",
    ]);
    let ev: Vec<f64> = v["records"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["eigenvalue"].as_f64().unwrap())
        .collect();
    assert!(ev[0].abs() < 1e-4);
    assert!((ev[1] - 6.0).abs() < 1e-3);
    assert!(ev[2] >= 8.0);
    assert!((v["summary"]["edge"].as_f64().unwrap() - 8.0).abs() < 1e-12);
}

#[test]
fn kink_profile_file_matches_the_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.csv");
    let v = json(&["kink", "--family", "phi4", "--out", path.to_str().unwrap()]);
    assert!((v["summary"]["energy"].as_f64().unwrap() - 4.0 * 2f64.sqrt() / 3.0).abs() < 1e-8);
    let rows = csv_rows(&path);
    // the profile is centred where H crosses the midpoint of the wells
    let err = rows
        .iter()
        .map(|r| (r[1] - (2f64.sqrt() * r[0]).tanh()).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-7, "{err}");
}

#[test]
fn report_reproduces_the_reference_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let out = kinklab(&["--json", "report", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["summary"]["mismatches"], 0);
    assert_eq!(v["records"].as_array().unwrap().len(), 20);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# kinklab report v1\ncase,kink,expected,result,match\n"));
}

const SHORT_RUN: &str = "\
[model]
family = phi6
pair = 0,1

[grid]
dx = 0.04
dt = 0.02
half_width = 40
t_end = 4
sample_every = 10
boundary = clamped

[perturbation]
kind = gaussian
amplitude = 0.01
width = 2

[output]
snapshot_every = 2
radii = 5
";

#[test]
fn simulate_writes_track_and_resumes_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.ini");
    std::fs::write(&cfg, SHORT_RUN).unwrap();
    let full = dir.path().join("full");
    let v = json(&[
        "simulate",
        cfg.to_str().unwrap(),
        "--out-dir",
        full.to_str().unwrap(),
    ]);
    assert_eq!(v["summary"]["steps"], 200);
    assert!(v["summary"]["energy_drift"].as_f64().unwrap() < 1e-6);
    let track = csv_rows(&full.join("track.csv"));
    assert_eq!(track.len(), 21);
    assert!(track.iter().all(|r| r[1].abs() < 1e-3));

    let resumed = dir.path().join("resumed");
    let snap = full.join("snapshot_2.000.csv");
    let out = kinklab(&[
        "simulate",
        cfg.to_str().unwrap(),
        "--out-dir",
        resumed.to_str().unwrap(),
        "--resume",
        snap.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let a = std::fs::read(full.join("snapshot_4.000.csv")).unwrap();
    let b = std::fs::read(resumed.join("snapshot_4.000.csv")).unwrap();
    assert_eq!(a, b);
    // the unevaluated orbital column is NaN, so compare the text
    let last = |p: &Path| {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .last()
            .unwrap()
            .to_string()
    };
    assert_eq!(
        last(&resumed.join("track.csv")),
        last(&full.join("track.csv"))
    );
}

#[test]
fn cfl_violation_exits_2_before_stepping() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.ini");
    std::fs::write(&cfg, SHORT_RUN.replace("dt = 0.02", "dt = 0.05")).unwrap();
    let out_dir = dir.path().join("out");
    let out = kinklab(&[
        "simulate",
        cfg.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("CFL"));
    assert!(!out_dir.exists());
}

#[test]
fn missing_config_exits_2() {
    assert_eq!(code(&kinklab(&["simulate", "/nonexistent/run.ini"])), 2);
}
