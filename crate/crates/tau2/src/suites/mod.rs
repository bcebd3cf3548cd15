//! Verification suites. Each suite runs on a list of configurations and
//! returns one [`Check`] per identity, holding the worst result over all
//! configurations and sample points.

mod algebra;
mod averages;
mod degenerate;
mod fusion;
mod qdet;
mod tq;
mod transfer;
mod truncation;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use tau2_core::{ModelConfig, C64};

use crate::report::{Check, RunReport};

pub use algebra::algebra;
pub use averages::averages;
pub use degenerate::degenerate;
pub use fusion::fusion;
pub use qdet::quantum_determinants;
pub use tq::{corrupted_context, median, solve_all, tq, CORRUPTION};
pub use transfer::transfer;
pub use truncation::truncation;

/// Which suites `verify` runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum Level {
    /// R-, L- and K-matrix identities.
    Algebra,
    /// Transfer matrix, quantum determinants, average values and fusion.
    Fusion,
    /// Fused K closed forms and the truncation identity.
    Truncation,
    /// Everything, including the T-Q relation and the degenerate regime.
    All,
}

impl Level {
    pub fn name(self) -> &'static str {
        match self {
            Level::Algebra => "algebra",
            Level::Fusion => "fusion",
            Level::Truncation => "truncation",
            Level::All => "all",
        }
    }
}

type Suite = fn(&[ModelConfig], &SuiteOptions) -> Vec<Check>;

/// Suites in run order, with the levels that include them.
const SUITES: [(&str, Suite, &[Level]); 8] = [
    ("algebra", algebra, &[Level::Algebra, Level::All]),
    ("transfer", transfer, &[Level::Fusion, Level::All]),
    ("qdet", quantum_determinants, &[Level::Fusion, Level::All]),
    ("averages", averages, &[Level::Fusion, Level::All]),
    ("fusion", fusion, &[Level::Fusion, Level::All]),
    ("truncation", truncation, &[Level::Truncation, Level::All]),
    ("tq", tq, &[Level::All]),
    ("degenerate", degenerate, &[Level::All]),
];

/// Runs every suite of `level` on `configs` and assembles the report.
pub fn verify(configs: &[ModelConfig], level: Level, opts: &SuiteOptions, digest: String) -> RunReport {
    let mut report = RunReport::new(digest, opts.seed, level.name(), opts.tol_scale);
    for (name, suite, levels) in SUITES {
        if levels.contains(&level) {
            report.phase(name, || suite(configs, opts).into_iter().map(|c| opts.apply(c)).collect());
        }
    }
    report.finish();
    report
}

/// Every check name, in report order.
pub const CHECK_NAMES: [&str; 40] = [
    "algebra.crossing",
    "algebra.dual_reflection",
    "algebra.inverse",
    "algebra.qybe",
    "algebra.reflection",
    "algebra.rll",
    "averages.asymptotics",
    "averages.closed_forms",
    "averages.operator_product",
    "averages.periodicity",
    "degenerate.bracket_surface",
    "degenerate.conventional_tq",
    "degenerate.generic_constraints",
    "fusion.determinant_representation",
    "fusion.dual_reflection_spin1",
    "fusion.hierarchy",
    "fusion.reflection_spin1",
    "qdet.boundary",
    "qdet.delta",
    "qdet.monodromy",
    "tq.bae",
    "tq.branch_swap",
    "tq.eigen_properties",
    "tq.f_crossing",
    "tq.f_structure",
    "tq.lambda_reconstruction",
    "tq.negative_control",
    "tq.rebuild",
    "tq.root_count",
    "tq.solve",
    "transfer.asymptotics",
    "transfer.commutativity",
    "transfer.crossing",
    "transfer.laurent_shape",
    "transfer.periodicity",
    "transfer.special_values",
    "truncation.block_triangular",
    "truncation.eigenvalue_relation",
    "truncation.fused_k_closed_forms",
    "truncation.identity",
];

/// Options shared by all suites.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Multiplies every tolerance.
    pub tol_scale: f64,
    /// Per-check tolerances replacing the defaults, before scaling.
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { seed: 1, tol_scale: 1.0, tolerances: BTreeMap::new() }
    }
}

impl SuiteOptions {
    pub fn tol(&self, t: f64) -> f64 {
        t * self.tol_scale
    }

    /// Tolerance for `name`, honoring an override.
    pub fn tol_for(&self, name: &str, default: f64) -> f64 {
        self.tol(self.tolerances.get(name).copied().unwrap_or(default))
    }

    fn apply(&self, c: Check) -> Check {
        match self.tolerances.get(&c.name) {
            Some(&t) => c.with_tolerance(self.tol(t)),
            None => c,
        }
    }
}

/// Anchor point for eigenvalue curves.
pub const SPECTRUM_ANCHOR: C64 = C64::new(0.37, 0.21);

/// Seeded spectral parameters with `0.05 ≤ |Re u| ≤ 0.6` and
/// `|Im u| ≤ 1.5`, away from the poles of `a` and `d`.
pub fn spectral_points(seed: u64, n: usize) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7a75_3250);
    (0..n)
        .map(|_| {
            let re = rng.random_range(0.05..0.6) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            C64::new(re, rng.random_range(-1.5..1.5))
        })
        .collect()
}

/// Max over `items` of a fallible residual.
pub(crate) fn max_over<T>(items: &[T], f: impl Fn(&T) -> tau2_core::Result<f64>) -> tau2_core::Result<f64> {
    items.iter().map(f).try_fold(0.0f64, |m, r| r.map(|x| m.max(x)))
}

/// Builds an upper-bound check from a fallible residual.
pub(crate) fn check(name: &str, anchor: &str, tol: f64, r: tau2_core::Result<f64>) -> Check {
    match r {
        Ok(x) => Check::new(name, anchor, x, tol),
        Err(e) => Check::failed(name, anchor, tol, e.to_string()),
    }
}

/// Runs `per_config` on every configuration in parallel and keeps the
/// worst result of each check.
pub(crate) fn over_configs(
    configs: &[ModelConfig],
    per_config: impl Fn(usize, &ModelConfig) -> Vec<Check> + Sync,
) -> Vec<Check> {
    let all: Vec<Vec<Check>> = configs.par_iter().enumerate().map(|(i, c)| per_config(i, c)).collect();
    let mut merged: BTreeMap<String, Check> = BTreeMap::new();
    for c in all.into_iter().flatten() {
        let c = match merged.remove(&c.name) {
            Some(prev) => prev.worse(c),
            None => c,
        };
        merged.insert(c.name.clone(), c);
    }
    merged.into_values().collect()
}

/// Seed for configuration `i` of a run.
pub(crate) fn sub_seed(opts: &SuiteOptions, i: usize) -> u64 {
    opts.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(i as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_are_deterministic_and_in_range() {
        let a = spectral_points(3, 20);
        assert_eq!(a, spectral_points(3, 20));
        assert_ne!(a, spectral_points(4, 20));
        assert!(a.iter().all(|u| u.re.abs() >= 0.05 && u.re.abs() <= 0.6 && u.im.abs() <= 1.5));
    }

    #[test]
    fn merge_keeps_worst() {
        let cfgs: Vec<_> = (1..=3).map(|s| ModelConfig::generate(3, 1, s).unwrap()).collect();
        let out = over_configs(&cfgs, |i, _| vec![Check::new("x", "", i as f64, 10.0)]);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].residual, 2.0);
    }

    #[test]
    fn full_report_lists_every_check_once() {
        let cfg = ModelConfig::generate(3, 1, 1).unwrap();
        let r = verify(&[cfg], Level::All, &SuiteOptions::default(), String::new());
        let names: Vec<&str> = r.checks.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, CHECK_NAMES);
    }

    #[test]
    fn overrides_rejudge_checks() {
        let cfg = ModelConfig::generate(3, 1, 1).unwrap();
        let mut opts = SuiteOptions { tol_scale: 2.0, ..Default::default() };
        opts.tolerances.insert("algebra.qybe".into(), 1e-30);
        let r = verify(&[cfg], Level::Algebra, &opts, String::new());
        let q = r.checks.iter().find(|c| c.name == "algebra.qybe").unwrap();
        assert_eq!(q.tolerance, 2e-30);
        assert!(!q.pass && !r.passed);
        assert!(r.checks.iter().filter(|c| c.name != "algebra.qybe").all(|c| c.pass && c.tolerance == 2e-12));
    }
}
