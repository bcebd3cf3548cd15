use std::fs;
use std::path::Path;

use tau2::report::RunReport;

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut argv = vec!["tau2"];
    argv.extend_from_slice(args);
    let code = tau2::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn gen(dir: &Path, seed: u64, n: usize) -> String {
    let path = dir.join(format!("c{seed}_{n}.json"));
    let p = path.to_str().unwrap().to_string();
    let (code, _, err) = run(&["gen", "--seed", &seed.to_string(), "--p", "3", "--N", &n.to_string(), "--out", &p]);
    assert_eq!(code, 0, "{err}");
    p
}

#[test]
fn gen_writes_valid_configs_deterministically() {
    let (code, a, _) = run(&["gen", "--seed", "1", "--p", "3", "--N", "2"]);
    assert_eq!(code, 0);
    let (_, b, _) = run(&["gen", "--seed", "1", "--p", "3", "--N", "2"]);
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["sites"].as_array().unwrap().len(), 2);
    assert_eq!(v["N"], 2);
    assert!(v["sites"][0]["d_plus"].as_array().unwrap().len() == 2);
    tau2::config::ConfigFile::parse(&a).unwrap().to_model().unwrap();
    let (_, c, _) = run(&["gen", "--seed", "2", "--p", "3", "--N", "2"]);
    assert_ne!(a, c);
}

#[test]
fn gen_rejects_even_p() {
    let (code, out, err) = run(&["gen", "--seed", "1", "--p", "4", "--N", "1"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("p must be odd ≥ 3"), "{err}");
}

#[test]
fn gen_reports_unwritable_path() {
    let (code, _, err) = run(&["gen", "--out", "/nonexistent-dir/x/config.json"]);
    assert_eq!(code, 2);
    assert!(err.contains("io error"), "{err}");
}

#[test]
fn verify_levels_pass_and_report_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = gen(dir.path(), 1, 1);
    for level in ["algebra", "fusion", "truncation"] {
        let (code, out, err) = run(&["verify", &cfg, "--level", level]);
        assert_eq!(code, 0, "{level}: {err}");
        let r: RunReport = serde_json::from_str(&out).unwrap();
        assert!(r.passed);
        assert_eq!(r.level, level);
        assert!(r.checks.windows(2).all(|w| w[0].name < w[1].name));
    }
    let (_, a, _) = run(&["verify", &cfg, "--level", "all", "--seed", "5"]);
    let (_, b, _) = run(&["verify", &cfg, "--level", "all", "--seed", "5"]);
    let (a, b): (RunReport, RunReport) = (serde_json::from_str(&a).unwrap(), serde_json::from_str(&b).unwrap());
    assert_eq!(a.without_timing(), b.without_timing());
    assert_eq!(a.seed, 5);
    assert!(a.checks.iter().any(|c| c.name == "truncation.identity"));
}

#[test]
fn verify_writes_report_file_and_flags_tight_tolerances() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = gen(dir.path(), 3, 1);
    let out = dir.path().join("report.json");
    let (code, stdout, _) = run(&["verify", &cfg, "--level", "algebra", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let r: RunReport = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r.checks.len(), 6);
    let (code, _, err) = run(&["verify", &cfg, "--level", "algebra", "--tol-scale", "1e-8"]);
    assert_eq!(code, 1);
    assert!(err.contains("FAIL algebra."), "{err}");
}

#[test]
fn config_tolerances_override_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = gen(dir.path(), 1, 1);
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cfg).unwrap()).unwrap();
    v["tolerances"] = serde_json::json!({"algebra.rll": 1e-30, "algebra.inverse": 1e-6});
    fs::write(&cfg, v.to_string()).unwrap();
    let (code, out, err) = run(&["verify", &cfg, "--level", "algebra"]);
    assert_eq!(code, 1);
    assert!(err.contains("FAIL algebra.rll"), "{err}");
    let r: RunReport = serde_json::from_str(&out).unwrap();
    let tol = |n: &str| r.checks.iter().find(|c| c.name == n).unwrap().tolerance;
    assert_eq!((tol("algebra.rll"), tol("algebra.inverse"), tol("algebra.qybe")), (1e-30, 1e-6, 1e-12));
    v["tolerances"] = serde_json::json!({"algebra.nothing": 1e-3});
    fs::write(&cfg, v.to_string()).unwrap();
    let (code, _, err) = run(&["verify", &cfg]);
    assert_eq!(code, 2);
    assert!(err.contains("unknown check"), "{err}");
}

#[test]
fn malformed_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"p\": 3, \"N\": ").unwrap();
    let (code, _, err) = run(&["verify", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("parse"), "{err}");
    let (code, _, _) = run(&["verify", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["verify", bad.to_str().unwrap(), "--level", "everything"]);
    assert_eq!(code, 2);
    let cfg = gen(dir.path(), 1, 1);
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cfg).unwrap()).unwrap();
    v["sites"][0]["h_plus"] = serde_json::json!([5.0, 0.0]);
    fs::write(&bad, v.to_string()).unwrap();
    let (code, _, err) = run(&["spectrum", bad.to_str().unwrap()]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn spectrum_table_shape() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = gen(dir.path(), 1, 1);
    let (code, out, err) = run(&["spectrum", &cfg]);
    assert_eq!(code, 0);
    let mut rd = csv::Reader::from_reader(out.as_bytes());
    let header = rd.headers().unwrap().clone();
    assert_eq!(&header[0], "index");
    assert_eq!(&header[1], "c-3_re");
    assert_eq!(header.len(), 1 + 2 * 7 + 8);
    assert_eq!(rd.records().count(), 3);
    assert!(err.contains("sum of curves vs trace"), "{err}");
    let csv = dir.path().join("s.csv");
    let (code, out, _) = run(&["spectrum", &cfg, "--csv", csv.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    assert_eq!(fs::read_to_string(csv).unwrap().lines().count(), 4);
}

#[test]
fn tq_table_and_negative_control() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = gen(dir.path(), 2, 2);
    let (code, out, err) = run(&["tq", &cfg]);
    assert_eq!(code, 0, "{err}");
    let (table, footer) = out.split_once("\n\n").unwrap();
    let mut rd = csv::Reader::from_reader(table.as_bytes());
    assert_eq!(rd.headers().unwrap().len(), 1 + 2 * 10 + 4);
    let rows: Vec<_> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 9);
    for r in &rows {
        assert_eq!(r[24].len(), 0);
        assert!(r[21].parse::<f64>().unwrap() < 1e-6);
        assert_eq!(r[23].len(), 10);
    }
    let mut rd = csv::Reader::from_reader(footer.as_bytes());
    let bracket = rd.records().next().unwrap().unwrap();
    assert_eq!(&bracket[0], "bracket");
    assert!(bracket[1].parse::<f64>().unwrap() > 1e-2);
    let (code, _, err) = run(&["tq", &cfg, "--corrupt-c"]);
    assert_eq!(code, 1);
    let median: f64 =
        err.split("median T-Q residual ").nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap();
    assert!(median > 1e-4, "{err}");
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).0, 0);
    assert_eq!(run(&["--version"]).0, 0);
    assert_eq!(run(&[]).0, 2);
}
