use tau2_core::rk_matrices::{k_minus, k_plus, r_matrix};
use tau2_core::tensorkit::{rel_diff, sigma_y};
use tau2_core::weyl_model::{det_q_l, det_q_l_hat, l_hat_operator, l_operator};
use tau2_core::{ModelConfig, OperatorMatrix, Result, C64};

use super::{check, over_configs, spectral_points, sub_seed, SuiteOptions};
use crate::report::Check;

const TOL: f64 = 1e-12;

fn pairs(pts: &[C64]) -> Vec<(C64, C64)> {
    pts.chunks(2).map(|w| (w[0], w[1])).collect()
}

fn qybe(eta: C64, pts: &[(C64, C64)]) -> Result<f64> {
    let sp = [2, 2, 2];
    super::max_over(pts, |&(u, v)| {
        let r12 = r_matrix(u - v, eta).embed(&[0, 1], &sp)?;
        let r13 = r_matrix(u, eta).embed(&[0, 2], &sp)?;
        let r23 = r_matrix(v, eta).embed(&[1, 2], &sp)?;
        Ok(rel_diff(&(&(&r12 * &r13) * &r23), &(&(&r23 * &r13) * &r12)))
    })
}

/// Single-site configurations, one per site, sharing the boundary.
fn site_configs(cfg: &ModelConfig) -> Result<Vec<ModelConfig>> {
    cfg.sites().iter().map(|s| ModelConfig::new(cfg.p(), vec![*s], *cfg.boundary())).collect()
}

fn rll(cfg: &ModelConfig, pts: &[(C64, C64)]) -> Result<f64> {
    let space = [2, 2, cfg.p()];
    super::max_over(&site_configs(cfg)?, |one| {
        let s = &one.sites()[0];
        super::max_over(pts, |&(u, v)| {
            let r = r_matrix(u - v, one.eta()).embed(&[0, 1], &space)?;
            let l1 = l_operator(s, 1, u, one)?.embed(&[0, 2], &space)?;
            let l2 = l_operator(s, 1, v, one)?.embed(&[1, 2], &space)?;
            Ok(rel_diff(&(&(&r * &l1) * &l2), &(&(&l2 * &l1) * &r)))
        })
    })
}

fn reflection(cfg: &ModelConfig, pts: &[(C64, C64)], dual: bool) -> Result<f64> {
    let (eta, b) = (cfg.eta(), cfg.boundary());
    let sp = [2, 2];
    super::max_over(pts, |&(u1, u2)| {
        let (k1, k2, rm, rp) = if dual {
            (
                k_plus(u1, b, eta).embed(&[0], &sp)?,
                k_plus(u2, b, eta).embed(&[1], &sp)?,
                r_matrix(-u1 + u2, eta),
                r_matrix(-u1 - u2 - eta * 2.0, eta),
            )
        } else {
            (
                k_minus(u1, b).embed(&[0], &sp)?,
                k_minus(u2, b).embed(&[1], &sp)?,
                r_matrix(u1 - u2, eta),
                r_matrix(u1 + u2, eta),
            )
        };
        Ok(rel_diff(&(&(&(&rm * &k1) * &rp) * &k2), &(&(&(&k2 * &rp) * &k1) * &rm)))
    })
}

fn crossing(cfg: &ModelConfig, pts: &[C64]) -> Result<f64> {
    super::max_over(&site_configs(cfg)?, |one| {
        let s = &one.sites()[0];
        let sy = sigma_y().kron(&OperatorMatrix::identity(&one.quantum_space()));
        super::max_over(pts, |&u| {
            let l = l_operator(s, 1, u, one)?;
            let lh = l_hat_operator(s, 1, -u - one.eta(), one)?.partial_transpose(0);
            Ok(rel_diff(&l, &(&(&sy * &lh) * &sy)))
        })
    })
}

fn inverse(cfg: &ModelConfig, pts: &[C64]) -> Result<f64> {
    super::max_over(&site_configs(cfg)?, |one| {
        let s = &one.sites()[0];
        let space = one.aux_quantum_space();
        super::max_over(pts, |&u| {
            let a = &l_operator(s, 1, u, one)? * &l_hat_operator(s, 1, -u, one)?;
            let b = &l_hat_operator(s, 1, u, one)? * &l_operator(s, 1, -u, one)?;
            Ok(rel_diff(&a, &OperatorMatrix::scalar(det_q_l(s, u, one.eta()), &space))
                .max(rel_diff(&b, &OperatorMatrix::scalar(det_q_l_hat(s, u, one.eta()), &space))))
        })
    })
}

/// Yang-Baxter, RLL, reflection, crossing and inverse relations at 20
/// random spectral points per configuration.
pub fn algebra(configs: &[ModelConfig], opts: &SuiteOptions) -> Vec<Check> {
    let tol = opts.tol(TOL);
    over_configs(configs, |i, cfg| {
        let pts = spectral_points(sub_seed(opts, i), 20);
        let pp = pairs(&pts);
        vec![
            check("algebra.qybe", "R12(u-v) R13(u) R23(v) = R23(v) R13(u) R12(u-v)", tol, qybe(cfg.eta(), &pp)),
            check("algebra.rll", "R12(u-v) L1(u) L2(v) = L2(v) L1(u) R12(u-v)", tol, rll(cfg, &pp)),
            check("algebra.reflection", "reflection equation for K-", tol, reflection(cfg, &pp, false)),
            check("algebra.dual_reflection", "dual reflection equation for K+", tol, reflection(cfg, &pp, true)),
            check("algebra.crossing", "L(u) = sigma_y Lhat^t(-u-eta) sigma_y", tol, crossing(cfg, &pts)),
            check(
                "algebra.inverse",
                "L(u) Lhat(-u) = Det_q L(u), Lhat(u) L(-u) = Det_q Lhat(u)",
                tol,
                inverse(cfg, &pts),
            ),
        ]
    })
}
