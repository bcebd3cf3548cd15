use tau2_core::scalar_functions::{average_l_hat_site, average_l_site, average_monodromy, average_monodromy_hat, Mat2};
use tau2_core::tensorkit::rel_diff_scalar;
use tau2_core::transfer::tarasov_residuals;
use tau2_core::{ModelConfig, Result, C64};

use super::{check, max_over, over_configs, spectral_points, sub_seed, SuiteOptions};
use crate::oracles::{averages_one_site, averages_two_sites};
use crate::report::Check;

fn mat_diff(a: &Mat2, b: &Mat2) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            worst = worst.max(rel_diff_scalar(a[i][j], b[i][j]));
        }
    }
    worst
}

/// The one- and two-site closed forms against the matrix products of the
/// first one and first two sites.
fn closed_forms(cfg: &ModelConfig, pts: &[C64]) -> Result<f64> {
    let s = cfg.sites();
    let p = cfg.p();
    let one = ModelConfig::new(p, s[..1].to_vec(), *cfg.boundary())?;
    let two = if s.len() >= 2 { Some(ModelConfig::new(p, s[..2].to_vec(), *cfg.boundary())?) } else { None };
    max_over(pts, |&u| {
        let (t, th) = averages_one_site(&s[0], p, u);
        let mut r = mat_diff(&t, &average_monodromy(u, &one)).max(mat_diff(&th, &average_monodromy_hat(u, &one)));
        if let Some(two) = &two {
            let (t, th) = averages_two_sites(&s[0], &s[1], p, u);
            r = r.max(mat_diff(&t, &average_monodromy(u, two))).max(mat_diff(&th, &average_monodromy_hat(u, two)));
        }
        Ok(r)
    })
}

fn periodicity(cfg: &ModelConfig, pts: &[C64]) -> f64 {
    let eta = cfg.eta();
    let p = cfg.p();
    let mut worst = 0.0f64;
    for &u in pts {
        worst = worst
            .max(mat_diff(&average_monodromy(u + eta, cfg), &average_monodromy(u, cfg)))
            .max(mat_diff(&average_monodromy_hat(u + eta, cfg), &average_monodromy_hat(u, cfg)));
        for s in cfg.sites() {
            worst = worst
                .max(mat_diff(&average_l_site(s, p, u + eta), &average_l_site(s, p, u)))
                .max(mat_diff(&average_l_hat_site(s, p, u + eta), &average_l_hat_site(s, p, u)));
        }
    }
    worst
}

/// `𝒜, 𝒟, 𝒜̂, 𝒟̂` against `e^{±pNu}` times the `p`-th powers of the site
/// products, at `Re u = ±9`.
fn asymptotics(cfg: &ModelConfig) -> f64 {
    let k = cfg.constants();
    let p = cfg.p() as u32;
    let pn = (cfg.p() * cfg.n_sites()) as f64;
    let mut worst = 0.0f64;
    for sign in [1.0, -1.0] {
        let u = C64::new(9.0 * sign, 0.3);
        let e = (-u * pn * sign).exp();
        let (t, th) = (average_monodromy(u, cfg), average_monodromy_hat(u, cfg));
        let (dd, ff, dh, fh) = if sign > 0.0 {
            (k.d_plus, k.f_plus, k.d_minus, k.f_minus)
        } else {
            (k.d_minus, k.f_minus, k.d_plus, k.f_plus)
        };
        for (got, want) in [(t[0][0], dd), (t[1][1], ff), (th[0][0], fh), (th[1][1], dh)] {
            worst = worst.max(rel_diff_scalar(got * e, want.powu(p)));
        }
    }
    worst
}

/// Average monodromy entries: closed forms, the operator-product property,
/// `η`-periodicity and asymptotics.
pub fn averages(configs: &[ModelConfig], opts: &SuiteOptions) -> Vec<Check> {
    over_configs(configs, |i, cfg| {
        let pts = spectral_points(sub_seed(opts, i) ^ 0x4, 4);
        let tar = max_over(&pts[..2], |&u| Ok(tarasov_residuals(cfg, u)?.iter().copied().fold(0.0, f64::max)));
        vec![
            check(
                "averages.closed_forms",
                "one- and two-site average entries = 2x2 matrix products",
                opts.tol(1e-12),
                closed_forms(cfg, &pts),
            ),
            check(
                "averages.operator_product",
                "prod_m O(u - m eta) is the scalar average for all eight monodromy entries",
                opts.tol(1e-9),
                tar,
            ),
            check(
                "averages.periodicity",
                "average L and T are eta-periodic",
                opts.tol(1e-10),
                Ok(periodicity(cfg, &pts)),
            ),
            check(
                "averages.asymptotics",
                "A, D, Ahat, Dhat ~ e^{+-pNu} times p-th powers of D+-, F+-",
                opts.tol(1e-10),
                Ok(asymptotics(cfg)),
            ),
        ]
    })
}
