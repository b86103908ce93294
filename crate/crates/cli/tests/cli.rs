use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn pairq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pairq"))
        .args(args)
        .env_remove("PAIRQ_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn amplitudes(step: &Value) -> Vec<(f64, f64)> {
    step["state"]
        .as_array()
        .unwrap()
        .iter()
        .map(|z| (z[0].as_f64().unwrap(), z[1].as_f64().unwrap()))
        .collect()
}

fn assert_amps(got: &[(f64, f64)], want: &[(f64, f64)]) {
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(want) {
        assert!((g.0 - w.0).abs() <= 1e-12 && (g.1 - w.1).abs() <= 1e-12, "{got:?} vs {want:?}");
    }
}

fn csv_means(p: &Path) -> Vec<f64> {
    let text = std::fs::read_to_string(p).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("param,mean,stderr,trials,seed"));
    lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect()
}

#[test]
fn grover_marked_11_writes_the_expected_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.json");
    let o = pairq(&["grover", "--marked", "11", "--out", path(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().next(), Some("success=1.000000"));

    let trace = read_json(&out);
    assert_eq!(trace["marked"], "|11>");
    let steps = trace["steps"].as_array().unwrap();
    let gates: Vec<&str> = steps.iter().map(|s| s["gate"].as_str().unwrap()).collect();
    assert_eq!(gates, ["prepare", "W", "P1", "D"]);
    assert_amps(&amplitudes(&steps[1]), &[(-0.5, 0.0), (0.0, 0.5), (0.0, 0.5), (0.5, 0.0)]);
    assert_amps(&amplitudes(&steps[2]), &[(-0.5, 0.0), (0.0, 0.5), (0.0, 0.5), (-0.5, 0.0)]);
    assert_amps(&amplitudes(&steps[3]), &[(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
    assert!((trace["success"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
}

#[test]
fn grover_finds_every_marked_state() {
    for m in ["00", "01", "10", "|11>"] {
        for level in ["logical", "physical"] {
            let o = pairq(&["grover", "--marked", m, "--level", level]);
            assert!(o.status.success(), "{m} {level}: {}", stderr(&o));
            assert!(stdout(&o).starts_with("success=1.000000"), "{m} {level}: {}", stdout(&o));
        }
    }
}

#[test]
fn bare_delay_spoils_the_search_but_pairs_do_not() {
    let bare = pairq(&["grover", "--marked", "11", "--encoding", "bare", "--delay-after-prep", "0.25period"]);
    assert!(bare.status.success(), "{}", stderr(&bare));
    let line = stdout(&bare);
    let p: f64 = line.trim().strip_prefix("success=").unwrap().parse().unwrap();
    assert!(p < 1.0, "{line}");

    let pair = pairq(&["grover", "--marked", "11", "--level", "physical", "--delay-after-prep", "0.25period"]);
    assert!(stdout(&pair).starts_with("success=1.000000"));
}

#[test]
fn measured_oracle_needs_a_seed_and_reports_its_record() {
    let o = pairq(&["grover", "--marked", "10", "--oracle-mode", "measured"]);
    assert_eq!(o.status.code(), Some(2));
    let o = pairq(&["grover", "--marked", "10", "--oracle-mode", "measured", "--seed", "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("measurement="));
}

#[test]
fn bad_flags_exit_with_usage() {
    for args in [
        &["grover", "--marked", "12"][..],
        &["grover", "--marked", "11", "--level", "quantum"],
        &["grover", "--marked", "11", "--delay-after-prep", "soon"],
        &["bench", "dephasing", "--kind", "amplitude", "--sigma-grid", "1"],
        &["bench", "dephasing", "--kind", "collective", "--sigma-grid", "0:1"],
        &["frobnicate"],
    ] {
        let o = pairq(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr(&o).contains("Usage") || stderr(&o).contains("error"), "{args:?}");
    }
}

#[test]
fn bench_dephasing_collective_is_exactly_protected() {
    let dir = tempfile::tempdir().unwrap();
    let o = pairq(&[
        "bench", "dephasing", "--kind", "collective", "--sigma-grid", "0:2:9", "--trials", "1000", "--seed", "7",
        "--out-dir", path(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let means = csv_means(&dir.path().join("dephasing-collective.csv"));
    assert_eq!(means.len(), 9);
    for m in means {
        assert!((m - 1.0).abs() <= 1e-12, "{m}");
    }
    let report = read_json(&dir.path().join("dephasing-collective.json"));
    assert_eq!(report["seed"], 7);
    assert_eq!(report["trials"], 1000);
    assert_eq!(report["config"]["experiment"]["kind"], "dephasing");
    assert!(report["version"].as_str().unwrap().starts_with(env!("CARGO_PKG_VERSION")));
}

#[test]
fn bench_dephasing_independent_matches_the_analytic_mean() {
    let dir = tempfile::tempdir().unwrap();
    let o = pairq(&[
        "bench", "dephasing", "--kind", "independent", "--sigma-grid", "1", "--trials", "100000", "--seed", "7",
        "--out-dir", path(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = read_json(&dir.path().join("dephasing-independent.json"));
    let pt = &report["points"][0];
    let (mean, se) = (pt["mean"].as_f64().unwrap(), pt["stderr"].as_f64().unwrap());
    let expected = (1.0 + (-1.0f64).exp()) / 2.0;
    assert!((mean - expected).abs() <= 3.0 * se, "{mean} vs {expected} ± {se}");
}

#[test]
fn bench_delay_pair_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let o = pairq(&["bench", "delay", "--encoding", "pair", "--grid", "16", "--out-dir", path(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let means = csv_means(&dir.path().join("delay-pair.csv"));
    assert_eq!(means.len(), 16);
    assert!(means.iter().all(|m| (m - 1.0).abs() <= 1e-12));

    let o = pairq(&["bench", "delay", "--encoding", "bare", "--grid", "16", "--out-dir", path(dir.path())]);
    assert!(o.status.success());
    let bare = csv_means(&dir.path().join("delay-bare.csv"));
    assert!(bare.iter().cloned().fold(f64::INFINITY, f64::min) < 0.99);
}

#[test]
fn bench_refuses_to_overwrite_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("oracle-modes.csv");
    std::fs::write(&csv, "precious").unwrap();
    let args = ["bench", "oracle", "--trials", "100", "--out-dir", path(dir.path())];
    let o = pairq(&args);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), "precious");
    assert!(!dir.path().join("oracle-modes.json").exists());

    let mut forced = args.to_vec();
    forced.push("--force");
    let o = pairq(&forced);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("param,mean"));
}

#[test]
fn invalid_config_lists_every_violation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(
        &cfg,
        r#"{"params": {"eta": 0, "omega": -1, "nu": 1, "delta": 1, "omega_eg": 100},
            "trials": 3,
            "experiment": {"kind": "dephasing", "channel": "independent-dephasing", "sigma_grid": []}}"#,
    )
    .unwrap();
    let o = pairq(&["config", "validate", path(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for needle in ["eta must be > 0", "omega must be > 0", "nu == delta", "trials must be >= 100", "sigma_grid is empty"] {
        assert!(err.contains(needle), "missing {needle:?} in {err}");
    }
    let o = pairq(&["bench", "run", "--config", path(&cfg), "--out-dir", path(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("trials must be >= 100"));

    std::fs::write(&cfg, r#"{"trials": 100, "colour": "red"}"#).unwrap();
    let o = pairq(&["config", "validate", path(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"));
}

#[test]
fn config_defaults_validate_and_drive_bench_run_through_env() {
    let dir = tempfile::tempdir().unwrap();
    let o = pairq(&["config", "defaults"]);
    assert!(o.status.success());
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, stdout(&o)).unwrap();
    assert!(pairq(&["config", "validate", path(&cfg)]).status.success());

    let o = Command::new(env!("CARGO_BIN_EXE_pairq"))
        .args(["bench", "run", "--trials", "200", "--out-dir", path(dir.path())])
        .env("PAIRQ_CONFIG", &cfg)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let report = read_json(&dir.path().join("dephasing-collective.json"));
    assert_eq!(report["config"]["trials"], 200);
    assert_eq!(report["grid"].as_array().unwrap().len(), 9);
}

#[test]
fn regime_warnings_go_to_stderr() {
    let o = pairq(&["grover", "--marked", "11", "--eta", "0.5"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("Lamb-Dicke"));
    assert!(!stdout(&o).contains("Lamb-Dicke"));
}

#[test]
fn gates_dump_and_verify() {
    let o = pairq(&["gates", "dump", "W", "--format", "text"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for row in [
        "[  1/2   i/2   i/2  -1/2 ]",
        "[  i/2   1/2  -1/2   i/2 ]",
        "[  i/2  -1/2   1/2   i/2 ]",
        "[ -1/2   i/2   i/2   1/2 ]",
    ] {
        assert!(text.contains(row), "{text}");
    }

    let o = pairq(&["gates", "dump", "U", "--theta", "0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("[ 1  0 ]\n[ 0  1 ]"), "{text}");
    let json: Value = serde_json::from_str(&text[text.find('{').unwrap()..]).unwrap();
    assert_eq!(json["entries"][0][0][0], 1.0);
    assert_eq!(json["entries"][0][1][0], 0.0);

    let o = pairq(&["gates", "dump", "V", "--format", "text"]);
    assert!(stdout(&o).contains("1/√2"));

    let o = pairq(&["gates", "verify"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l == "12/12 identities pass"));
    assert!(stdout(&pairq(&["gates", "--verify"])).contains("12/12 identities pass"));

    assert_eq!(pairq(&["gates", "dump", "X"]).status.code(), Some(2));
    assert_eq!(pairq(&["gates", "dump", "U"]).status.code(), Some(2));
}

#[test]
fn version_carries_the_crate_version() {
    let o = pairq(&["--version"]);
    assert!(stdout(&o).contains(env!("CARGO_PKG_VERSION")));
}
