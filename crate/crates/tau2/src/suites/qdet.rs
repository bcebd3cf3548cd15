use tau2_core::rk_matrices::{det_q_k, det_q_k_trace, Side};
use tau2_core::scalar_functions::{delta, delta_qdet};
use tau2_core::tensorkit::rel_diff_scalar;
use tau2_core::transfer::{det_q_t, det_q_t_hat, det_q_t_trace};
use tau2_core::ModelConfig;

use super::{check, max_over, over_configs, spectral_points, sub_seed, SuiteOptions};
use crate::report::Check;

/// Trace and product forms of the quantum determinants, and the two forms
/// of `δ(u)`.
pub fn quantum_determinants(configs: &[ModelConfig], opts: &SuiteOptions) -> Vec<Check> {
    over_configs(configs, |i, cfg| {
        let pts = spectral_points(sub_seed(opts, i) ^ 0x3, 6);
        let (eta, b) = (cfg.eta(), cfg.boundary());
        let mono = max_over(&pts, |&u| {
            Ok(rel_diff_scalar(det_q_t_trace(cfg, u, false)?, det_q_t(cfg, u))
                .max(rel_diff_scalar(det_q_t_trace(cfg, u, true)?, det_q_t_hat(cfg, u))))
        });
        let bound = max_over(&pts, |&u| {
            Ok([Side::Minus, Side::Plus]
                .iter()
                .map(|&s| rel_diff_scalar(det_q_k_trace(s, u, b, eta), det_q_k(s, u, b, eta)))
                .fold(0.0, f64::max))
        });
        let dl = max_over(&pts, |&u| Ok(rel_diff_scalar(delta_qdet(u, cfg)?, delta(u, cfg)?)));
        vec![
            check(
                "qdet.monodromy",
                "Det_q T and Det_q That: trace form = product of site determinants",
                opts.tol(1e-11),
                mono,
            ),
            check("qdet.boundary", "Det_q K-+: trace form = closed form", opts.tol(1e-11), bound),
            check("qdet.delta", "delta(u) from quantum determinants = a(u) d(u-eta)", opts.tol(1e-10), dl),
        ]
    })
}
