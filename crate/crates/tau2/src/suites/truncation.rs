use tau2_core::rk_matrices::{
    fused_k_closed_p3, fused_k_minus, fused_k_plus, fused_k_top, fused_top_and_mid, mu_normalization, Side,
};
use tau2_core::spectrum::{eigencurves, fused_truncation_residual, p3_eigen_relation};
use tau2_core::tensorkit::{rel_diff, rel_diff_scalar};
use tau2_core::transfer::{check_truncation, fused_block_structure};
use tau2_core::{ModelConfig, Result, C64};

use super::{check, max_over, over_configs, spectral_points, sub_seed, SuiteOptions, SPECTRUM_ANCHOR};
use crate::report::Check;

/// Spin-`p/2` fused K-matrices against their closed forms: the full
/// `p = 3` blocks, or the compact top block for other `p`.
fn closed_forms(cfg: &ModelConfig, pts: &[C64]) -> Result<f64> {
    let (p, e, b) = (cfg.p(), cfg.eta(), cfg.boundary());
    let mut worst = 0.0f64;
    for &u in pts {
        for side in [Side::Minus, Side::Plus] {
            let fk = match side {
                Side::Minus => fused_k_minus(p, u, b, e),
                Side::Plus => fused_k_plus(p, u, b, e)?,
            };
            let (top, upper_right, mid) = fused_top_and_mid(&fk, p);
            worst = worst.max(upper_right);
            let got = [top[0][0], top[0][1], top[1][0], top[1][1]];
            if p == 3 {
                let cl = fused_k_closed_p3(side, u, b);
                let want = [cl.k11, cl.k12, cl.k21, cl.k22];
                for (g, w) in got.iter().zip(&want) {
                    worst = worst.max(rel_diff_scalar(*g, *w * cl.scale));
                }
                worst = worst.max(rel_diff(&mid, &cl.k33.scale(cl.scale)));
            } else {
                let mu = mu_normalization(p, u, e);
                let scale = if side == Side::Minus { mu } else { C64::new(1.0, 0.0) / mu };
                let c = fused_k_top(side, p, u, b, e);
                let want = [c[0][0], c[0][1], c[1][0], c[1][1]];
                for (g, w) in got.iter().zip(&want) {
                    worst = worst.max(rel_diff_scalar(*g, *w * scale));
                }
            }
        }
    }
    Ok(worst)
}

fn block_structure(cfg: &ModelConfig, pts: &[C64]) -> Result<f64> {
    max_over(pts, |&u| {
        let mut worst = 0.0f64;
        for hat in [false, true] {
            let r = fused_block_structure(cfg, u, hat)?;
            worst = worst.max(r.upper_right).max(r.top_left).max(r.lower_right.unwrap_or(0.0));
        }
        Ok(worst)
    })
}

/// Closed-form fused K-matrices, block-triangularity of the spin-`p/2`
/// monodromy, the truncation identity and its scalar form per eigenvalue.
pub fn truncation(configs: &[ModelConfig], opts: &SuiteOptions) -> Vec<Check> {
    over_configs(configs, |i, cfg| {
        let pts = spectral_points(sub_seed(opts, i) ^ 0x6, 10);
        let trunc = max_over(&pts, |&u| check_truncation(cfg, u));
        let scalar = eigencurves(cfg, SPECTRUM_ANCHOR).and_then(|spec| {
            max_over(&spec.curves, |c| {
                max_over(&pts[..3], |&u| {
                    if cfg.p() == 3 {
                        Ok(p3_eigen_relation(c, cfg, u)?.max(fused_truncation_residual(c, cfg, u)?))
                    } else {
                        fused_truncation_residual(c, cfg, u)
                    }
                })
            })
        });
        vec![
            check(
                "truncation.fused_k_closed_forms",
                "spin-p/2 fused K-+ = closed-form blocks times mu(u)^(+-1)",
                opts.tol(1e-10),
                closed_forms(cfg, &pts[..3]),
            ),
            check(
                "truncation.block_triangular",
                "spin-p/2 fused monodromies are block lower triangular with average-value top block",
                opts.tol(1e-10),
                block_structure(cfg, &pts[..2]),
            ),
            check(
                "truncation.identity",
                "t^(p/2)(u) = (Atilde + Dtilde) id + delta(u-(p-1)eta/2) t^((p-2)/2)(u)",
                opts.tol(1e-8),
                trunc,
            ),
            check(
                "truncation.eigenvalue_relation",
                "scalar truncation relation for every eigenvalue curve",
                opts.tol(1e-7),
                scalar,
            ),
        ]
    })
}
