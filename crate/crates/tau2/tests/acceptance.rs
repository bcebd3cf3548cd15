//! Acceptance run: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use tau2::config::ConfigFile;
use tau2::report::{Bound, Check};
use tau2::suites::{
    algebra, averages, degenerate, fusion, quantum_determinants, tq, transfer, truncation, verify, Level, SuiteOptions,
};
use tau2::tables::tq_table;
use tau2_core::ModelConfig;

fn config(seed: u64, n: usize) -> ModelConfig {
    ConfigFile::generate(seed, 3, n).unwrap().to_model().unwrap()
}

struct Outcome {
    pass: bool,
    summary: String,
    failures: Vec<String>,
}

fn from_checks(checks: &[Check]) -> Outcome {
    let failures: Vec<String> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{} residual {:e} tolerance {:e}{}", c.name, c.residual, c.tolerance, note(c)))
        .collect();
    let worst = checks
        .iter()
        .filter(|c| c.bound == Bound::Upper)
        .max_by(|a, b| (a.residual / a.tolerance).total_cmp(&(b.residual / b.tolerance)));
    let summary = match worst {
        Some(w) => format!("{} checks, worst {} {:e} (tol {:e})", checks.len(), w.name, w.residual, w.tolerance),
        None => format!("{} checks", checks.len()),
    };
    Outcome { pass: failures.is_empty() && !checks.is_empty(), summary, failures }
}

fn note(c: &Check) -> String {
    c.note.as_ref().map(|n| format!(" ({n})")).unwrap_or_default()
}

fn criterion(number: u32, title: &str, limit: Option<Duration>, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let mut out = run();
    let elapsed = start.elapsed();
    if let Some(limit) = limit {
        if elapsed > limit {
            out.pass = false;
            out.failures.push(format!("runtime {:.2} s over {} s", elapsed.as_secs_f64(), limit.as_secs()));
        }
    }
    let tag = if out.pass { "PASS" } else { "FAIL" };
    println!("{tag} {number}. {title}: {} [{:.2} s]", out.summary, elapsed.as_secs_f64());
    for f in &out.failures {
        println!("       {f}");
    }
    out.pass
}

fn main() -> ExitCode {
    let opts = SuiteOptions::default();
    let full = [config(1, 1), config(2, 2)];
    let secs = Duration::from_secs;
    let mut ok = true;

    ok &= criterion(1, "algebra suite over 5 configs", Some(secs(5)), || {
        let cfgs: Vec<_> = [(1, 1), (2, 2), (3, 3), (4, 1), (5, 2)].iter().map(|&(s, n)| config(s, n)).collect();
        from_checks(&algebra(&cfgs, &opts))
    });
    ok &= criterion(2, "transfer-matrix suite, N = 1, 2, 3", Some(secs(30)), || {
        from_checks(&transfer(&[config(1, 1), config(2, 2), config(3, 3)], &opts))
    });
    ok &= criterion(3, "quantum determinants", None, || from_checks(&quantum_determinants(&full, &opts)));
    ok &= criterion(4, "average values", None, || from_checks(&averages(&full, &opts)));
    ok &= criterion(5, "fusion suite", None, || from_checks(&fusion(&full, &opts)));
    ok &= criterion(6, "truncation suite", Some(secs(120)), || from_checks(&truncation(&full, &opts)));
    ok &= criterion(7, "T-Q suite with negative control", Some(secs(120)), || {
        let mut out = from_checks(&tq(&full, &opts));
        for cfg in &full {
            match tq_table(cfg, true) {
                Ok(t) if t.median_tq_residual > 1e-4 => {
                    out.summary += &format!(", corrupted c median {:e} at N = {}", t.median_tq_residual, cfg.n_sites())
                }
                Ok(t) => {
                    out.pass = false;
                    out.failures.push(format!("corrupted c median {:e} not above 1e-4", t.median_tq_residual));
                }
                Err(e) => {
                    out.pass = false;
                    out.failures.push(format!("corrupted table: {e}"));
                }
            }
        }
        out
    });
    ok &= criterion(8, "degenerate case", None, || {
        let checks = degenerate(&full, &opts);
        let mut out = from_checks(&checks);
        if let Some(c) = checks.iter().find(|c| c.name == "degenerate.conventional_tq") {
            out.summary += &note(c);
        }
        out
    });
    ok &= criterion(9, "determinism", None, || {
        let a = verify(&full, Level::All, &opts, "d".into());
        let b = verify(&full, Level::All, &opts, "d".into());
        let same_report = a.without_timing() == b.without_timing();
        let same_config =
            ConfigFile::generate(7, 3, 2).unwrap().to_json() == ConfigFile::generate(7, 3, 2).unwrap().to_json();
        let mut failures = Vec::new();
        if !same_report {
            failures.push("reports differ".into());
        }
        if !same_config {
            failures.push("generated configs differ".into());
        }
        Outcome { pass: failures.is_empty(), summary: format!("{} checks reproduced", a.checks.len()), failures }
    });

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
