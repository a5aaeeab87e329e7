// Licensed under the Apache License, Version 2.0 <LICENSE-APACHE or
// https://www.apache.org/licenses/LICENSE-2.0> or the MIT license
// <LICENSE-MIT or https://opensource.org/licenses/MIT>, at your
// option. This file may not be copied, modified, or distributed
// except according to those terms.

use std::path::Path;
use std::process::{Command, Output};

use ndshift::TestReport;
use ndshift_cli::commands;
use ndshift_cli::config::{parse, LineConfig};

fn ndshift(args: &[&str], config: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ndshift"));
    c.args(args);
    if let Some(p) = config {
        c.arg("--config").arg(p);
    }
    c.output().unwrap()
}

fn write_config(dir: &Path, json: &str) -> std::path::PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, json).unwrap();
    p
}

#[test]
fn simulate_deterministic_gaps() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"F":{"kind":"deterministic","value":1},"n":3,"seed":1}"#);
    let out = tmp.path().join("o");
    let o = ndshift(&["simulate-renewal", "--out", out.to_str().unwrap()], Some(&cfg));
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(out.join("gaps.csv")).unwrap(), "tau\n1\n1\n1\n");
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["n"], 3);
    assert_eq!(summary["mean"], 1.0);
}

#[test]
fn simulate_exponential_mean() {
    let cfg = parse(r#"{"F":{"kind":"exponential","rate":1},"n":100000}"#).unwrap();
    let out = commands::simulate(&cfg, 11).unwrap();
    let s: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    let mean = s["mean"].as_f64().unwrap();
    assert!((mean - 1.0).abs() < 3.0 / (1e5f64).sqrt(), "{mean}");
}

#[test]
fn config_errors_exit_1_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let cases = [
        r#"{"F":{"kind":"exponential","rate":1},"n":3,"seed":1,"extra":true}"#,
        r#"{"F":{"kind":"exponential","rate":-1},"n":3,"seed":1}"#,
        r#"{"F":{"kind":"exponential","rate":1},"n":3}"#,
        r#"not json"#,
    ];
    for json in cases {
        let cfg = write_config(tmp.path(), json);
        let o = ndshift(&["simulate-renewal", "--out", out.to_str().unwrap()], Some(&cfg));
        assert_eq!(o.status.code(), Some(1), "{json}");
        assert!(!out.exists(), "partial output for {json}");
    }
    let o = ndshift(&["simulate-renewal"], None);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unwritable_output_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("blocker");
    std::fs::write(&blocker, "").unwrap();
    let cfg = write_config(tmp.path(), r#"{"F":{"kind":"exponential","rate":1},"n":10,"seed":1}"#);
    let o = ndshift(&["simulate-renewal", "--out", blocker.join("x").to_str().unwrap()], Some(&cfg));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"F":{"kind":"exponential","rate":1},"n":50,"seed":1}"#);
    let run = |extra: &[&str], dir: &str| {
        let d = tmp.path().join(dir);
        let mut args = vec!["simulate-renewal", "--quiet", "--out", d.to_str().unwrap()];
        args.extend_from_slice(extra);
        let o = ndshift(&args, Some(&cfg));
        assert!(o.status.success());
        assert!(o.stdout.is_empty());
        std::fs::read(d.join("gaps.csv")).unwrap()
    };
    let from_config = run(&[], "a");
    let flag_same = run(&["--seed", "1"], "b");
    let flag_other = run(&["--seed", "2"], "c");
    assert_eq!(from_config, flag_same);
    assert_ne!(from_config, flag_other);
}

#[test]
fn thread_count_does_not_change_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"F":{"kind":"exponential","rate":1},"sharing":{"kind":"dirichlet_window","offsets":[-1,0,1],"alpha":[1,1,1]},"n":20000,"steps":3,"seed":5}"#,
    );
    let mut seen = Vec::new();
    for t in ["1", "3"] {
        let d = tmp.path().join(t);
        let o = ndshift(&["exchange", "--threads", t, "--out", d.to_str().unwrap()], Some(&cfg));
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        seen.push(std::fs::read(d.join("masses.csv")).unwrap());
    }
    assert_eq!(seen[0], seen[1]);
}

#[test]
fn iterate_zero_steps_returns_input() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("gaps.csv");
    std::fs::write(&input, "tau\n0.5\n1.25\n2\n").unwrap();
    let json = format!(
        r#"{{"input":{:?},"G":{{"kind":"beta","alpha":0.5,"beta":0.5}},"steps":0,"reference":{{"kind":"exponential","rate":1}}}}"#,
        input.to_str().unwrap()
    );
    let cfg: LineConfig = parse(&json).unwrap();
    let out = commands::line(&cfg, 1, false).unwrap();
    assert_eq!(out.get("gaps.csv").unwrap(), "tau\n0.5\n1.25\n2\n");
}

fn reports(out: &ndshift_cli::Outputs) -> Vec<TestReport> {
    out.get("reports.jsonl").unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn poisson_stays_poisson_under_iteration() {
    let cfg: LineConfig = parse(
        r#"{"F":{"kind":"exponential","rate":1},"n":100000,"G":{"kind":"beta","alpha":0.5,"beta":0.5},"steps":20,"tests":["ks"]}"#,
    )
    .unwrap();
    let out = commands::line(&cfg, 3, false).unwrap();
    let r = reports(&out);
    assert_eq!(r.len(), 20);
    assert!(r.iter().all(TestReport::passed), "{:?}", r.iter().map(|x| x.p_value).collect::<Vec<_>>());
}

#[test]
fn uniform_start_w1_trace_drops_fivefold() {
    let cfg: LineConfig = parse(
        r#"{"F":{"kind":"uniform_interval","low":0,"high":2},"n":200000,"G":{"kind":"beta","alpha":0.5,"beta":0.5},"steps":50,
            "reference":{"kind":"exponential","rate":1}}"#,
    )
    .unwrap();
    let out = commands::line(&cfg, 4, false).unwrap();
    let trace: Vec<Vec<f64>> = out
        .get("trace.csv")
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(trace.len(), 51);
    let (w0, w50) = (trace[0][4], trace[50][4]);
    assert!(w0 / w50 >= 5.0, "{w0} -> {w50}");
}

#[test]
fn division_shift_of_poisson_is_poisson() {
    let cfg: LineConfig = parse(
        r#"{"model":"division","F":{"kind":"exponential","rate":1},"n":100000,"G":{"kind":"beta","alpha":0.5,"beta":0.5},
            "tests":["ks","lag_correlation"]}"#,
    )
    .unwrap();
    let out = commands::line(&cfg, 8, true).unwrap();
    let r = reports(&out);
    assert_eq!(r.len(), 4);
    assert!(r.iter().all(TestReport::passed), "{r:?}");
}

#[test]
fn verify_euler_is_deterministic_and_reports_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for run in ["a", "b"] {
        let d = tmp.path().join(run);
        let o = ndshift(&["verify", "euler", "--seed", "99", "--out", d.to_str().unwrap()], None);
        let report: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("verify.json")).unwrap()).unwrap();
        let expected = if report["passed"].as_bool().unwrap() { 0 } else { 1 };
        assert_eq!(o.status.code(), Some(expected));
        bodies.push(std::fs::read(d.join("verify.json")).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
}

#[test]
fn rwre_and_euler_outputs() {
    let cfg = parse(
        r#"{"sharing":{"kind":"two_diagonal","G":{"kind":"beta","alpha":0.5,"beta":0.5}},"steps":[0,1,2],"F":{"kind":"exponential","rate":1}}"#,
    )
    .unwrap();
    let out = commands::rwre(&cfg, 1, 20_000).unwrap();
    let table = out.get("rwre.csv").unwrap();
    assert!(table.starts_with("n,return_probability"));
    assert!(table.lines().nth(1).unwrap().starts_with("0,1,0,1,0,true"));
    assert!(out.get("variance.csv").is_some());
    let z: serde_json::Value = serde_json::from_str(out.get("transitions.json").unwrap()).unwrap();
    assert_eq!(z["at_zero"]["probabilities"]["0"], 0.75);

    let cfg = parse(r#"{"F":{"kind":"deterministic","value":1},"p":0.3,"steps":[0,5,50]}"#).unwrap();
    let out = commands::euler(&cfg, 1, 10).unwrap();
    for line in out.get("euler.csv").unwrap().lines().skip(1) {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((cells[1] - 1.0).abs() < 1e-12 && cells[2] < 1e-12, "{line}");
    }
}
