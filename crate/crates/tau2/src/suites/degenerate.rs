use tau2_core::spectrum::eigencurves;
use tau2_core::tq_solver::{
    conventional_tq_search, degenerate_constraints, project_theta_plus, search_degenerate, ConventionalOutcome,
    DegenerateSearch,
};
use tau2_core::ModelConfig;

use super::{check, over_configs, sub_seed, SuiteOptions, SPECTRUM_ANCHOR};
use crate::report::{Bound, Check};

/// Restarts given to the degenerate-surface search per configuration.
pub const SEARCH_ATTEMPTS: usize = 12;

const CONVENTIONAL: (&str, &str) = (
    "degenerate.conventional_tq",
    "on the degenerate surface Lambda Qbar = a Qbar(u-eta) + d Qbar(u+eta) with its Bethe equations",
);

/// Worst T-Q and BAE residual over all curves of a degenerate configuration,
/// with the `M` that solved each curve.
fn conventional_residual(cfg: &ModelConfig, tol: f64) -> Result<(f64, Vec<usize>), String> {
    let spec = eigencurves(cfg, SPECTRUM_ANCHOR).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    let mut ms = Vec::new();
    for curve in &spec.curves {
        match conventional_tq_search(curve, cfg, tol).map_err(|e| e.to_string())? {
            ConventionalOutcome::Solved(r) => {
                worst = worst.max(r.tq_residual).max(r.bae_residuals.iter().copied().fold(0.0, f64::max));
                ms.push(r.m);
            }
            ConventionalOutcome::Unsolved { tried, best, .. } => {
                let r = best.map_or(f64::INFINITY, |b| b.tq_residual);
                return Err(format!("curve {}: no M in {tried:?} solves (best residual {r:.3e})", curve.index));
            }
            ConventionalOutcome::NotDegenerate(rep) => {
                return Err(format!("not in the degenerate regime (constraint residual {:.3e})", rep.max_residual()));
            }
        }
    }
    Ok((worst, ms))
}

fn conventional(cfg: &ModelConfig, seed: u64, tol: f64) -> Check {
    let (name, anchor) = CONVENTIONAL;
    match search_degenerate(cfg, seed, SEARCH_ATTEMPTS) {
        Ok(DegenerateSearch::Found { cfg: dc, attempts, .. }) => match conventional_residual(&dc, tol) {
            Ok((r, ms)) => Check::new(name, anchor, r, tol)
                .with_note(format!("surface found after {attempts} attempt(s); M per curve {ms:?}")),
            Err(e) => Check::failed(name, anchor, tol, format!("surface found, conventional relation failed: {e}")),
        },
        Ok(DegenerateSearch::Inconclusive { best_residual, attempts }) => Check {
            pass: true,
            note: Some(format!(
                "search inconclusive after {attempts} attempts, best constraint residual {best_residual:.3e}"
            )),
            ..Check::new(name, anchor, f64::NAN, tol)
        },
        Err(e) => Check::failed(name, anchor, tol, format!("search failed: {e}")),
    }
}

/// Degenerate-regime constraints on the given (generic) configurations,
/// the bracket surface reached by fixing `θ₊`, and the conventional T-Q
/// relation on a searched degenerate configuration.
pub fn degenerate(configs: &[ModelConfig], opts: &SuiteOptions) -> Vec<Check> {
    over_configs(configs, |i, cfg| {
        let generic = match degenerate_constraints(cfg) {
            Ok(r) => Check::at_least(
                "degenerate.generic_constraints",
                "generic configurations violate every degenerate-regime constraint",
                r.min_residual(),
                1e-2,
            ),
            Err(e) => Check {
                bound: Bound::Lower,
                ..Check::failed("degenerate.generic_constraints", "", 1e-2, e.to_string())
            },
        };
        let projected = cfg
            .with_boundary(project_theta_plus(cfg, cfg.boundary()))
            .and_then(|c| degenerate_constraints(&c))
            .map(|r| r.residuals[0].max(r.top_coefficients[0]).max(r.top_coefficients[1]));
        vec![
            generic,
            check(
                "degenerate.bracket_surface",
                "theta+ solving the bracket condition also removes the top coefficients of F",
                opts.tol(1e-9),
                projected,
            ),
            conventional(cfg, sub_seed(opts, i) ^ 0x8, opts.tol_for("degenerate.conventional_tq", 1e-6)),
        ]
    })
}
