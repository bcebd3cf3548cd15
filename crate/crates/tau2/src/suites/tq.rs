use rayon::prelude::*;
use tau2_core::scalar_functions::{f_func, f_structure};
use tau2_core::spectrum::{eigen_functional_checks, eigencurves, EigCurve, Spectrum};
use tau2_core::tensorkit::rel_diff_scalar;
use tau2_core::tq_solver::{
    bae_residual_at, lambda_reconstruction_residual, q_degree, q_from_roots, solve_q_unchecked, BetheSolution,
    TqContext,
};
use tau2_core::{ModelConfig, Result, C64};

use super::{check, max_over, over_configs, spectral_points, sub_seed, SuiteOptions, SPECTRUM_ANCHOR};
use crate::report::Check;

/// Factor applied to `c` or `F` in the negative control.
pub const CORRUPTION: f64 = 1.001;

/// The T-Q context with `c` off by 0.1%.
pub fn corrupted_context(cfg: &ModelConfig) -> Result<TqContext> {
    Ok(TqContext::new(cfg)?.with_c_scaled(CORRUPTION))
}

/// Solves `Q` for every curve in parallel, in curve order.
pub fn solve_all(spec: &Spectrum, cfg: &ModelConfig, ctx: &TqContext) -> Vec<Result<BetheSolution>> {
    spec.curves.par_iter().map(|c| solve_q_unchecked(c, cfg, ctx)).collect()
}

/// Median of `v`; NaN when empty.
pub fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Drift of each BAE residual and of `Q` when one root moves to `−λ−η`.
fn branch_swap(sol: &BetheSolution, cfg: &ModelConfig, ctx: &TqContext) -> Result<f64> {
    let eta = cfg.eta();
    let q = |u: C64| sol.q_product(u, eta);
    let probe = C64::new(0.2, 0.1);
    let q0 = q(probe);
    let mut worst = 0.0f64;
    for (k, r) in sol.roots.iter().enumerate() {
        let a = bae_residual_at(r.lambda, r.kind, &q, cfg, ctx)?;
        let b = bae_residual_at(-r.lambda - eta, r.kind, &q, cfg, ctx)?;
        let swapped = q_from_roots(
            sol.roots.iter().enumerate().map(|(i, s)| if i == k { -s.lambda - eta } else { s.lambda }),
            probe,
            eta,
        );
        worst = worst.max((a - b).abs()).max(rel_diff_scalar(swapped, q0));
    }
    Ok(worst)
}

struct Solved {
    tq: f64,
    roots: f64,
    bae: f64,
    rebuild: f64,
    reconstruction: f64,
    swap: f64,
}

fn per_curve(curve: &EigCurve, sol: &BetheSolution, cfg: &ModelConfig, ctx: &TqContext) -> Result<Solved> {
    Ok(Solved {
        tq: sol.tq_residual,
        roots: (sol.roots.len() as f64 - q_degree(cfg) as f64).abs(),
        bae: sol.max_bae_residual(),
        rebuild: sol.rebuild_residual(cfg.eta()),
        reconstruction: lambda_reconstruction_residual(sol, curve, cfg, ctx)?,
        swap: branch_swap(sol, cfg, ctx)?,
    })
}

fn median_corrupted(spec: &Spectrum, cfg: &ModelConfig, ctx: TqContext) -> f64 {
    let r: Vec<f64> =
        solve_all(spec, cfg, &ctx).into_iter().map(|s| s.map_or(f64::INFINITY, |s| s.tq_residual)).collect();
    median(r)
}

fn f_checks(cfg: &ModelConfig, pts: &[C64]) -> (Result<f64>, Result<f64>) {
    let crossing = max_over(pts, |&u| Ok(rel_diff_scalar(f_func(-u - cfg.eta(), cfg)?, f_func(u, cfg)?)));
    let structure = f_structure(cfg).map(|s| s.held_out_residual.max(s.off_lattice));
    (crossing, structure)
}

/// Inhomogeneous T-Q relation per eigenvalue: the solve, the Bethe roots
/// and their equations, the function `F`, and a negative control.
pub fn tq(configs: &[ModelConfig], opts: &SuiteOptions) -> Vec<Check> {
    over_configs(configs, |i, cfg| {
        let pts = spectral_points(sub_seed(opts, i) ^ 0x7, 4);
        let (f_cross, f_struct) = f_checks(cfg, &pts);
        let mut out = vec![
            check("tq.f_crossing", "F(-u-eta) = F(u)", opts.tol(1e-9), f_cross),
            check("tq.f_structure", "F is a Laurent polynomial in e^{2pu} of degree N+2", opts.tol(1e-9), f_struct),
        ];
        let prepared = eigencurves(cfg, SPECTRUM_ANCHOR).and_then(|s| TqContext::new(cfg).map(|c| (s, c)));
        let (spec, ctx) = match prepared {
            Ok(x) => x,
            Err(e) => {
                let names = SOLVE_CHECKS.iter().chain(&CONTROL_CHECKS);
                out.extend(names.map(|(n, a, t)| check(n, a, opts.tol(*t), Err(e.clone()))));
                return out;
            }
        };
        let eig = spec.curves.iter().map(|c| eigen_functional_checks(c, cfg).worst()).fold(0.0, f64::max);
        let solved: Vec<Result<Solved>> = solve_all(&spec, cfg, &ctx)
            .into_iter()
            .zip(&spec.curves)
            .map(|(s, c)| s.and_then(|s| per_curve(c, &s, cfg, &ctx)))
            .collect();
        let pick = |f: fn(&Solved) -> f64| {
            solved.iter().try_fold(0.0f64, |m, s| s.as_ref().map(|s| m.max(f(s))).map_err(Clone::clone))
        };
        let values = [
            pick(|s| s.tq),
            pick(|s| s.roots),
            pick(|s| s.bae),
            pick(|s| s.rebuild),
            pick(|s| s.reconstruction),
            pick(|s| s.swap),
            Ok(eig),
        ];
        for ((name, anchor, tol), v) in SOLVE_CHECKS.iter().zip(values) {
            out.push(check(name, anchor, opts.tol(*tol), v));
        }
        let c_bad = median_corrupted(&spec, cfg, ctx.clone().with_c_scaled(CORRUPTION));
        let f_bad = median_corrupted(&spec, cfg, ctx.with_f_scaled(CORRUPTION));
        let (n, a, t) = CONTROL_CHECKS[0];
        out.push(Check::at_least(n, a, c_bad.min(f_bad), t));
        out
    })
}

const SOLVE_CHECKS: [(&str, &str, f64); 7] = [
    ("tq.solve", "Lambda Q = a Q(u-eta) + d Q(u+eta) + c-term F, at 50 fresh points", 1e-6),
    ("tq.root_count", "Q has exactly (p-1)N+2p Bethe roots (count mismatch)", 0.5),
    ("tq.bae", "Bethe equations with the inhomogeneous term, relative to the largest term", 1e-6),
    ("tq.rebuild", "product form of Q matches its coefficients", 1e-8),
    ("tq.lambda_reconstruction", "Lambda rebuilt from the T-Q right side matches the eigenvalue curve", 1e-7),
    ("tq.branch_swap", "BAE residuals and Q unchanged under lambda -> -lambda-eta", 1e-10),
    ("tq.eigen_properties", "eigenvalue periodicity, crossing, special values, asymptotics and degree", 1e-8),
];

const CONTROL_CHECKS: [(&str, &str, f64); 1] =
    [("tq.negative_control", "median T-Q residual with c or F off by 0.1% stays large", 1e-4)];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(vec![]).is_nan());
    }
}
