use tau2_core::rk_matrices::{fused_k_minus, fused_k_plus, k_minus, k_plus, r_half_one};
use tau2_core::spectrum::{eigencurves, fused_spectrum_residual};
use tau2_core::tensorkit::rel_diff;
use tau2_core::transfer::check_fusion_hierarchy;
use tau2_core::{ModelConfig, Result, C64};

use super::{check, max_over, over_configs, spectral_points, sub_seed, SuiteOptions, SPECTRUM_ANCHOR};
use crate::report::Check;

/// Spin-1/2 against spin-1 reflection equation, or its dual.
fn fused_reflection(cfg: &ModelConfig, pts: &[(C64, C64)], dual: bool) -> Result<f64> {
    let (e, b) = (cfg.eta(), cfg.boundary());
    let sp = [2, 2, 2];
    max_over(pts, |&(u1, u2)| {
        let (k1, k23, rm, rp) = if dual {
            (
                k_plus(u1, b, e).embed(&[0], &sp)?,
                fused_k_plus(2, u2, b, e)?.embed(&[1, 2], &sp)?,
                r_half_one(u2 - u1, e),
                r_half_one(-u1 - u2 - e * 2.0, e),
            )
        } else {
            (
                k_minus(u1, b).embed(&[0], &sp)?,
                fused_k_minus(2, u2, b, e).embed(&[1, 2], &sp)?,
                r_half_one(u1 - u2, e),
                r_half_one(u1 + u2, e),
            )
        };
        Ok(rel_diff(&(&(&(&rm * &k1) * &rp) * &k23), &(&(&(&k23 * &rp) * &k1) * &rm)))
    })
}

/// Fused reflection equations, the fusion hierarchy as matrix identities
/// and the determinant representation of fused eigenvalues.
pub fn fusion(configs: &[ModelConfig], opts: &SuiteOptions) -> Vec<Check> {
    over_configs(configs, |i, cfg| {
        let pts = spectral_points(sub_seed(opts, i) ^ 0x5, 6);
        let pairs: Vec<_> = pts.chunks(2).map(|w| (w[0], w[1])).collect();
        let t11 = opts.tol(1e-11);
        let t8 = opts.tol(1e-8);
        let hier =
            max_over(&pts[..2], |&u| Ok(check_fusion_hierarchy(cfg, 2, u)?.max(check_fusion_hierarchy(cfg, 3, u)?)));
        let det_rep = eigencurves(cfg, SPECTRUM_ANCHOR).and_then(|spec| {
            max_over(&pts[..2], |&u| {
                Ok(fused_spectrum_residual(&spec, cfg, 2, u)?.max(fused_spectrum_residual(&spec, cfg, 3, u)?))
            })
        });
        vec![
            check(
                "fusion.reflection_spin1",
                "reflection equation with spin-1 fused K-",
                t11,
                fused_reflection(cfg, &pairs, false),
            ),
            check(
                "fusion.dual_reflection_spin1",
                "dual reflection equation with spin-1 fused K+",
                t11,
                fused_reflection(cfg, &pairs, true),
            ),
            check(
                "fusion.hierarchy",
                "t(u) t^(j-1/2)(u-j eta) = t^(j)(u-(j-1/2)eta) + delta(u) t^(j-1)(u-(j+1/2)eta), j = 1, 3/2",
                t8,
                hier,
            ),
            check(
                "fusion.determinant_representation",
                "eigenvalues of t^(j) = tridiagonal determinant in Lambda, j = 1, 3/2",
                t8,
                det_rep,
            ),
        ]
    })
}
