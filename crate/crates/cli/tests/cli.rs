use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn plc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plc"))
        .args(args)
        .env_remove("PLC_SEED")
        .output()
        .expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let out = plc(args);
    assert!(
        out.status.success(),
        "plc {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

fn code(args: &[&str]) -> i32 {
    plc(args).status.code().expect("exit code")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/synthetic")
        .join(name)
}

fn fixture_str(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

const GENERIC: [&str; 8] = ["--alpha", "1", "--beta", "2", "--gamma", "1", "--delta", "2"];

fn with(base: &[&str], extra: &[&str]) -> Vec<String> {
    base.iter().chain(extra).map(|s| s.to_string()).collect()
}

fn run(args: &[String]) -> Output {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    plc(&refs)
}

fn run_json(args: &[String]) -> Value {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    json_ok(&refs)
}

fn simulate_from(x0: &str, y0: &str) -> Value {
    let mut args = with(&["simulate"], &GENERIC);
    args.extend(["--x0", x0, "--y0", y0].map(String::from));
    run_json(&args)
}

#[test]
fn simulate_reports_a_fate() {
    let v = simulate_from("0.1", "0.1");
    let fate = v["fate"].as_str().unwrap();
    assert!(["Cx", "Cy", "C", "C0"].contains(&fate), "{fate}");
    assert_eq!(v["converged"], Value::Bool(true));

    let v = simulate_from("0.3", "0.1");
    assert_eq!(v["fate"], "Cx");
    assert_eq!(v["outcome"], "complete change");
}

#[test]
fn simulate_writes_trajectory_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let mut args = vec!["simulate".to_string()];
    args.extend(GENERIC.iter().map(|s| s.to_string()));
    args.extend(["--x0", "0.05", "--y0", "0.2", "--horizon", "30", "--csv"].map(String::from));
    args.push(csv.to_string_lossy().into_owned());
    let v = run_json(&args);
    assert_eq!(v["horizon"].as_f64(), Some(30.0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x,y"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len() as u64, v["samples"].as_u64().unwrap());
    for r in &rows {
        assert!(r[1] >= -1e-12 && r[2] >= -1e-12 && r[1] + r[2] <= 1.0 + 1e-12);
    }
    assert!((rows.last().unwrap()[0] - 30.0).abs() < 1e-9);
}

#[test]
fn usage_errors_exit_2() {
    let sim = |x0: &str, y0: &str, extra: &[&str]| {
        let mut a = with(&["simulate"], &GENERIC);
        a.extend(["--x0", x0, "--y0", y0].map(String::from));
        a.extend(extra.iter().map(|s| s.to_string()));
        run(&a)
    };
    let out = sim("0.7", "0.5", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("x0 + y0 <= 1"));
    assert_eq!(sim("0.1", "0.1", &["--horizon", "0"]).status.code(), Some(2));
    assert_eq!(sim("0.1", "0.1", &["--horizon", "-5"]).status.code(), Some(2));
    assert_eq!(code(&["simulate", "--alpha", "1x", "--beta", "2", "--gamma", "1", "--delta", "2", "--x0", "0.1", "--y0", "0.1"]), 2);
    assert_eq!(code(&["classify", "--alpha", "-1", "--beta", "2", "--gamma", "1", "--delta", "2"]), 2);
    assert_eq!(code(&["classify", "--alpha", "1", "--beta", "0.5", "--gamma", "1", "--delta", "0.5"]), 2);

    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "t,value\n").unwrap();
    let out = plc(&["fit", empty.to_str().unwrap(), "--family", "pa"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no data rows"));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "t,value\n0,0.1\n1,zero\n").unwrap();
    let out = plc(&["fit", bad.to_str().unwrap(), "--family", "pa"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    assert_eq!(code(&["fit", "/nonexistent/data.csv"]), 2);
    let f = fixture_str("pa_logistic.csv");
    assert_eq!(code(&["fit", &f, "--family", "pa", "--holdout", "12"]), 2);
}

#[test]
fn classify_generic_and_degenerate() {
    let v = run_json(&with(&["classify"], &GENERIC));
    assert_eq!(v["regime"]["tag"], "generic");
    let pts = v["critical_points"].as_array().unwrap();
    assert_eq!(pts.len(), 4);
    let c = pts.iter().find(|p| p["kind"] == "C").unwrap();
    assert_eq!(c["stability"], "saddle");
    assert!((c["location"]["x"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-5);
    assert_eq!(v["saddles"], serde_json::json!(["C"]));

    let v = json_ok(&["classify", "--alpha", "0", "--beta", "2", "--gamma", "1", "--delta", "2"]);
    assert!(!v["segments"].as_array().unwrap().is_empty());
    assert_ne!(v["regime"]["tag"], "generic");
}

#[test]
fn classify_population_normalizes() {
    let a = run_json(&with(&["classify"], &GENERIC));
    let b = json_ok(&[
        "classify", "--alpha", "0.1", "--beta", "0.1", "--gamma", "0.1", "--delta", "0.1", "--population", "10",
    ]);
    assert_eq!(a["params"], b["params"]);
}

#[test]
fn fit_pa_recovers_parameters() {
    let f = fixture_str("pa_logistic.csv");
    let v = json_ok(&["fit", &f, "--family", "pa", "--multistart", "4", "--full-precision"]);
    let m = &v["models"]["Piotrowski-Altmann"];
    for name in ["a", "b", "c"] {
        assert!(m["parameters"][name].as_str().unwrap().contains(" ± "));
    }
    let est = |n: &str| m["estimates"][n]["value"].as_f64().unwrap();
    assert!((est("a") - 70.4286).abs() < 1e-4);
    assert!((est("b") - 0.4642).abs() < 1e-6);
    assert!((est("c") - 1.0).abs() < 1e-6);
    assert!(m["rmse"].as_f64().unwrap() < 1e-8);
    assert_eq!(v["dataset"]["points"], 15);
}

#[test]
fn fit_plc_with_holdout() {
    let f = fixture_str("plc_complete_noisy.csv");
    let v = json_ok(&["fit", &f, "--family", "plc", "--holdout", "3", "--multistart", "8"]);
    let m = &v["models"]["PLC model"];
    assert!(m["predicted_fate"]["fate"].is_string());
    assert!(m["rmse"].as_f64().unwrap() < 0.02);
    let p = &v["models"]["PLC model-predict"];
    assert_eq!(p["holdout"]["k"], 3);
    assert_eq!(p["holdout"]["points"].as_array().unwrap().len(), 3);
    assert_eq!(p["points"], 12);
    assert!(p["holdout"]["rmse"].as_f64().unwrap() < 0.05);
}

#[test]
fn fit_complete_data() {
    let f = fixture_str("plc_complete.csv");
    let v = json_ok(&["fit", &f, "--family", "plc", "--multistart", "8"]);
    let m = &v["models"]["PLC model"];
    assert_eq!(m["long_term_outcome"]["label"], "complete change");
    assert_eq!(m["predicted_fate"]["fate"], "Cx");
    assert!(m["rmse"].as_f64().unwrap() < 1e-5);
}

#[test]
fn fit_reversible_data() {
    let f = fixture_str("plc_reversible.csv");
    let v = json_ok(&["fit", &f, "--family", "plc", "--multistart", "8"]);
    let m = &v["models"]["PLC model"];
    assert_eq!(m["long_term_outcome"]["label"], "reversible change");
    assert!(m["rmse"].as_f64().unwrap() < 1e-5);
}

#[test]
fn fit_is_deterministic() {
    let f = fixture_str("plc_complete_noisy.csv");
    let args = ["fit", f.as_str(), "--multistart", "4", "--seed", "17", "--full-precision"];
    let a = plc(&args);
    let mut seq = args.to_vec();
    seq.push("--sequential");
    let b = plc(&seq);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, plc(&args).stdout);
}

#[test]
fn seed_from_environment() {
    let f = fixture_str("pa_logistic.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_plc"))
        .args(["fit", &f, "--family", "k2", "--multistart", "3"])
        .env("PLC_SEED", "4242")
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["seed"], 4242);
    let v = json_ok(&["fit", &f, "--family", "k2", "--multistart", "3", "--seed", "5"]);
    assert_eq!(v["seed"], 5);
}

#[test]
fn emitted_curve_refits_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let curve = dir.path().join("curve.csv");
    let f = fixture_str("pa_logistic.csv");
    let v = json_ok(&[
        "fit", &f, "--family", "pa", "--multistart", "2", "--full-precision",
        "--emit-curve", curve.to_str().unwrap(), "--curve-points", "41",
    ]);
    let text = std::fs::read_to_string(&curve).unwrap();
    assert!(text.starts_with("t,value\n"));
    assert_eq!(text.lines().count(), 42);
    let refit = json_ok(&["fit", curve.to_str().unwrap(), "--family", "pa", "--multistart", "2", "--full-precision"]);
    let m = &refit["models"]["Piotrowski-Altmann"];
    assert!(m["rss"].as_f64().unwrap() <= 1e-8);
    let a0 = v["models"]["Piotrowski-Altmann"]["estimates"]["a"]["value"].as_f64().unwrap();
    let a1 = m["estimates"]["a"]["value"].as_f64().unwrap();
    assert!((a0 - a1).abs() < 1e-4 * a0);

    let wide = dir.path().join("wide.csv");
    json_ok(&[
        "fit", &f, "--family", "all", "--multistart", "2",
        "--emit-curve", wide.to_str().unwrap(), "--curve-points", "5",
    ]);
    let text = std::fs::read_to_string(&wide).unwrap();
    assert_eq!(text.lines().next(), Some("t,pa,k2,k3,plc"));
}

#[test]
fn fit_accepts_percent_and_headerless() {
    let dir = tempfile::tempdir().unwrap();
    let pct = dir.path().join("pct.csv");
    std::fs::write(&pct, "year,share\n0,2\n1,5\n2,12\n3,27\n4,50\n5,73\n6,88\n7,95\n").unwrap();
    assert_eq!(code(&["fit", pct.to_str().unwrap(), "--family", "pa"]), 2);
    let v = json_ok(&["fit", pct.to_str().unwrap(), "--family", "pa", "--percent", "--multistart", "2"]);
    assert_eq!(v["dataset"]["points"], 8);

    let raw = dir.path().join("raw.csv");
    std::fs::write(&raw, "0,0.02\n1,0.05\n2,0.12\n3,0.27\n4,0.5\n5,0.73\n").unwrap();
    let out = plc(&["fit", raw.to_str().unwrap(), "--family", "pa", "--multistart", "2"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no header row"));
}

#[test]
fn output_file_option() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let mut args = with(&["classify"], &GENERIC);
    args.extend(["-o".to_string(), path.to_string_lossy().into_owned()]);
    let out = run(&args);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["regime"]["tag"], "generic");
}

fn read_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn portrait_symmetric_case() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = with(&["portrait"], &GENERIC);
    args.extend(["--grid", "10", "--out-dir"].map(String::from));
    args.push(dir.path().to_string_lossy().into_owned());
    let v = run_json(&args);

    let census = &v["grid"]["census"];
    assert!(census["to_cx"].as_u64().unwrap() > 0);
    assert!(census["to_cy"].as_u64().unwrap() > 0);
    assert_eq!(census["to_cx"], census["to_cy"]);
    assert_eq!(v["grid"]["cells"], 66);

    let sep = read_rows(&dir.path().join("separatrix.csv"));
    assert!(sep.len() > 10);
    for r in &sep {
        let (x, y): (f64, f64) = (r[1].parse().unwrap(), r[2].parse().unwrap());
        assert!((x - y).abs() < 1e-4, "separatrix leaves the diagonal at ({x}, {y})");
    }
    let grid = read_rows(&dir.path().join("grid.csv"));
    assert_eq!(grid.len(), 66);
    for r in &grid {
        let (x, y): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        if x > y + 1e-9 && y > 0.0 {
            assert_eq!(r[2], "Cx");
        }
    }
    let nc = read_rows(&dir.path().join("nullclines.csv"));
    assert!(nc.iter().any(|r| r[0] == "g_x") && nc.iter().any(|r| r[0] == "g_y"));
}

#[test]
fn portrait_rejects_non_generic() {
    let dir = tempfile::tempdir().unwrap();
    let out = plc(&[
        "portrait", "--alpha", "1", "--beta", "1", "--gamma", "1", "--delta", "2",
        "--out-dir", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("generic"));
}
