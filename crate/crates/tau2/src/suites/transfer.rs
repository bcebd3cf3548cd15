use tau2_core::tensorkit::rel_diff;
use tau2_core::transfer::{transfer_asymptotics, transfer_laurent_fit, transfer_matrix, transfer_special_values};
use tau2_core::{ModelConfig, OperatorMatrix, Result, C64};

use super::{check, max_over, over_configs, spectral_points, sub_seed, SuiteOptions};
use crate::report::Check;

fn commutativity(cfg: &ModelConfig, pts: &[C64]) -> Result<f64> {
    let ts = pts.iter().map(|&u| transfer_matrix(cfg, u)).collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for (a, b) in ts.iter().zip(ts.iter().skip(1)) {
        worst = worst.max(a.commutator(b).norm() / (a.norm() * b.norm()));
    }
    Ok(worst)
}

fn crossing(cfg: &ModelConfig, pts: &[C64]) -> Result<f64> {
    max_over(pts, |&u| Ok(rel_diff(&transfer_matrix(cfg, -u - cfg.eta())?, &transfer_matrix(cfg, u)?)))
}

fn periodicity(cfg: &ModelConfig, pts: &[C64]) -> Result<f64> {
    let ipi = C64::new(0.0, std::f64::consts::PI);
    max_over(pts, |&u| Ok(rel_diff(&transfer_matrix(cfg, u + ipi)?, &transfer_matrix(cfg, u)?)))
}

fn special_values(cfg: &ModelConfig) -> Result<f64> {
    let (t0, t1) = transfer_special_values(cfg);
    let q = cfg.quantum_space();
    let ipi2 = C64::new(0.0, std::f64::consts::FRAC_PI_2);
    Ok(rel_diff(&transfer_matrix(cfg, C64::new(0.0, 0.0))?, &OperatorMatrix::scalar(t0, &q))
        .max(rel_diff(&transfer_matrix(cfg, ipi2)?, &OperatorMatrix::scalar(t1, &q))))
}

/// Transfer-matrix identities for each configuration, plus its Laurent
/// shape and leading coefficients.
pub fn transfer(configs: &[ModelConfig], opts: &SuiteOptions) -> Vec<Check> {
    over_configs(configs, |i, cfg| {
        let pts = spectral_points(sub_seed(opts, i), 8);
        let t10 = opts.tol(1e-10);
        let t9 = opts.tol(1e-9);
        let fit = transfer_laurent_fit(cfg);
        let (asym, shape) = match fit {
            Ok(f) => {
                let (tp, tm) = transfer_asymptotics(cfg);
                let (dq, q, d) = (cfg.quantum_dim(), cfg.quantum_space(), cfg.n_sites() as i32 + 2);
                let r = rel_diff(&f.coefficient(d, dq), &OperatorMatrix::scalar(tp, &q))
                    .max(rel_diff(&f.coefficient(-d, dq), &OperatorMatrix::scalar(tm, &q)));
                (Ok(r), Ok(f.held_out_residual))
            }
            Err(e) => (Err(e.clone()), Err(e)),
        };
        vec![
            check("transfer.commutativity", "[t(u), t(v)] = 0", t10, commutativity(cfg, &pts)),
            check("transfer.crossing", "t(-u-eta) = t(u)", t10, crossing(cfg, &pts)),
            check("transfer.periodicity", "t(u + i pi) = t(u)", t10, periodicity(cfg, &pts)),
            check(
                "transfer.special_values",
                "t(0) and t(i pi/2) are the closed-form scalars",
                t10,
                special_values(cfg),
            ),
            check("transfer.asymptotics", "leading coefficients of t(u) at u -> +-inf", t9, asym),
            check(
                "transfer.laurent_shape",
                "t(u) is a Laurent polynomial in e^{2u} of degree N+2 (held-out points)",
                t9,
                shape,
            ),
        ]
    })
}
