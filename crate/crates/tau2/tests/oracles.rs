//! Values frozen from an independent dense-matrix implementation.

use std::path::PathBuf;

use serde::Deserialize;
use tau2::config::ConfigFile;
use tau2_core::rk_matrices::{fused_k_minus, fused_k_plus};
use tau2_core::scalar_functions::{
    a_func, average_monodromy, average_monodromy_hat, c_constant, d_func, delta, f_func, tilde_ad,
};
use tau2_core::spectrum::eigencurves;
use tau2_core::tensorkit::rel_diff_scalar;
use tau2_core::tq_solver::{solve_q, TqContext};
use tau2_core::transfer::{fused_transfer, transfer_matrix};
use tau2_core::{ModelConfig, C64};

type Pair = [f64; 2];

#[derive(Deserialize)]
struct Point {
    u: Pair,
    trace_t: Pair,
    trace_t_squared: Pair,
    trace_t_spin1: Pair,
    trace_t_spin3_2: Pair,
    a: Pair,
    d: Pair,
    delta: Pair,
    average_t: Vec<Pair>,
    average_t_hat: Vec<Pair>,
    tilde_sum: Pair,
    f: Pair,
    fused_k_minus_spin1: Vec<Pair>,
    fused_k_plus_spin1: Vec<Pair>,
}

#[derive(Deserialize)]
struct QEntry {
    lambda_at_anchor: Pair,
    q_coeffs: Vec<Pair>,
}

#[derive(Deserialize)]
struct Record {
    c: Pair,
    points: Vec<Point>,
    anchor: Pair,
    q: Vec<QEntry>,
}

fn z(p: Pair) -> C64 {
    C64::new(p[0], p[1])
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn load(name: &str) -> (ModelConfig, Record) {
    let cfg = ConfigFile::load(&fixture(&format!("{name}.json"))).unwrap().to_model().unwrap();
    let all: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fixture("oracle_values.json")).unwrap()).unwrap();
    let rec = serde_json::from_value(all[name].clone()).unwrap();
    (cfg, rec)
}

fn close(label: &str, got: C64, want: Pair, tol: f64) {
    let r = rel_diff_scalar(got, z(want));
    assert!(r < tol, "{label}: got {got}, want {}, rel {r:e}", z(want));
}

fn close_all(label: &str, got: &[C64], want: &[Pair], tol: f64) {
    assert_eq!(got.len(), want.len(), "{label}");
    let scale = want.iter().fold(0.0f64, |m, w| m.max(z(*w).norm()));
    for (g, w) in got.iter().zip(want) {
        assert!((g - z(*w)).norm() < tol * scale, "{label}: got {g}, want {}", z(*w));
    }
}

fn check_pointwise(name: &str) {
    let (cfg, rec) = load(name);
    let (bp, eta) = (cfg.boundary(), cfg.eta());
    close("c", c_constant(&cfg).unwrap(), rec.c, 1e-10);
    for pt in &rec.points {
        let u = z(pt.u);
        let t = transfer_matrix(&cfg, u).unwrap();
        close("tr t", t.trace(), pt.trace_t, 1e-11);
        close("tr t^2", (&t * &t).trace(), pt.trace_t_squared, 1e-11);
        close("tr t^(1)", fused_transfer(2, &cfg, u).unwrap().trace(), pt.trace_t_spin1, 1e-10);
        close("tr t^(3/2)", fused_transfer(3, &cfg, u).unwrap().trace(), pt.trace_t_spin3_2, 1e-10);
        close("a", a_func(u, &cfg).unwrap(), pt.a, 1e-12);
        close("d", d_func(u, &cfg).unwrap(), pt.d, 1e-12);
        close("delta", delta(u, &cfg).unwrap(), pt.delta, 1e-11);
        let flat = |m: [[C64; 2]; 2]| vec![m[0][0], m[0][1], m[1][0], m[1][1]];
        close_all("average T", &flat(average_monodromy(u, &cfg)), &pt.average_t, 1e-12);
        close_all("average That", &flat(average_monodromy_hat(u, &cfg)), &pt.average_t_hat, 1e-12);
        let (at, dt) = tilde_ad(u, &cfg);
        close("Atilde + Dtilde", at + dt, pt.tilde_sum, 1e-11);
        close("F", f_func(u, &cfg).unwrap(), pt.f, 1e-9);
        let km: Vec<C64> = fused_k_minus(2, u, bp, eta).matrix().iter().copied().collect();
        close_all("fused K-", &km, &transposed(&pt.fused_k_minus_spin1, 4), 1e-12);
        let kp: Vec<C64> = fused_k_plus(2, u, bp, eta).unwrap().matrix().iter().copied().collect();
        close_all("fused K+", &kp, &transposed(&pt.fused_k_plus_spin1, 4), 1e-12);
    }
}

/// Row-major fixture entries in column-major order.
fn transposed(v: &[Pair], n: usize) -> Vec<Pair> {
    (0..n * n).map(|k| v[(k % n) * n + k / n]).collect()
}

fn check_q(name: &str) {
    let (cfg, rec) = load(name);
    let anchor = z(rec.anchor);
    let spec = eigencurves(&cfg, anchor).unwrap();
    let ctx = TqContext::new(&cfg).unwrap();
    assert_eq!(spec.curves.len(), rec.q.len());
    for entry in &rec.q {
        let target = z(entry.lambda_at_anchor);
        let curve = spec
            .curves
            .iter()
            .min_by(|a, b| (a.eval(anchor) - target).norm().total_cmp(&(b.eval(anchor) - target).norm()))
            .unwrap();
        close("eigenvalue", curve.eval(anchor), entry.lambda_at_anchor, 1e-10);
        let sol = solve_q(curve, &cfg, &ctx).unwrap();
        close_all("Q coefficients", &sol.q_coeffs, &entry.q_coeffs, 1e-6);
    }
}

#[test]
fn one_site_pointwise_values() {
    check_pointwise("p3_n1_seed1");
}

#[test]
fn two_site_pointwise_values() {
    check_pointwise("p3_n2_seed2");
}

#[test]
fn one_site_q_coefficients() {
    check_q("p3_n1_seed1");
}

#[test]
fn two_site_q_coefficients() {
    check_q("p3_n2_seed2");
}
