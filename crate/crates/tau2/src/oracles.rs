//! Closed forms for the average monodromy entries at one and two sites,
//! written out term by term.

use tau2_core::{SiteParams, C64};

/// `[[𝒜, 𝓑], [𝒞, 𝒟]]` and the hatted counterparts.
pub type Averages = ([[C64; 2]; 2], [[C64; 2]; 2]);

fn pw(z: C64, p: usize) -> C64 {
    z.powu(p as u32)
}

pub fn averages_one_site(s: &SiteParams, p: usize, u: C64) -> Averages {
    let (ep, em) = ((u * p as f64).exp(), (-u * p as f64).exp());
    let g = pw(s.g_plus, p) + pw(s.g_minus, p);
    let h = pw(s.h_plus, p) + pw(s.h_minus, p);
    let t = [[ep * pw(s.d_plus, p) + em * pw(s.d_minus, p), g], [h, ep * pw(s.f_plus, p) + em * pw(s.f_minus, p)]];
    let th = [[ep * pw(s.f_minus, p) + em * pw(s.f_plus, p), -g], [-h, ep * pw(s.d_minus, p) + em * pw(s.d_plus, p)]];
    (t, th)
}

pub fn averages_two_sites(s1: &SiteParams, s2: &SiteParams, p: usize, u: C64) -> Averages {
    let (ep, em) = ((u * p as f64).exp(), (-u * p as f64).exp());
    let (e2p, e2m) = (ep * ep, em * em);
    let x = |z: C64| pw(z, p);
    let g1 = x(s1.g_plus) + x(s1.g_minus);
    let g2 = x(s2.g_plus) + x(s2.g_minus);
    let h1 = x(s1.h_plus) + x(s1.h_minus);
    let h2 = x(s2.h_plus) + x(s2.h_minus);
    let a = e2p * x(s1.d_plus * s2.d_plus)
        + e2m * x(s1.d_minus * s2.d_minus)
        + x(s1.d_minus * s2.d_plus)
        + x(s1.d_plus * s2.d_minus)
        + g2 * h1;
    let d = e2p * x(s1.f_plus * s2.f_plus)
        + e2m * x(s1.f_minus * s2.f_minus)
        + x(s1.f_minus * s2.f_plus)
        + x(s1.f_plus * s2.f_minus)
        + g1 * h2;
    let b = ep * (g1 * x(s2.d_plus) + g2 * x(s1.f_plus)) + em * (g1 * x(s2.d_minus) + g2 * x(s1.f_minus));
    let c = ep * (h1 * x(s2.f_plus) + h2 * x(s1.d_plus)) + em * (h1 * x(s2.f_minus) + h2 * x(s1.d_minus));
    let ah = e2p * x(s1.f_minus * s2.f_minus)
        + e2m * x(s1.f_plus * s2.f_plus)
        + x(s1.f_minus * s2.f_plus)
        + x(s1.f_plus * s2.f_minus)
        + g1 * h2;
    let dh = e2p * x(s1.d_minus * s2.d_minus)
        + e2m * x(s1.d_plus * s2.d_plus)
        + x(s1.d_minus * s2.d_plus)
        + x(s1.d_plus * s2.d_minus)
        + g2 * h1;
    let bh = -ep * (g1 * x(s2.d_minus) + g2 * x(s1.f_minus)) - em * (g1 * x(s2.d_plus) + g2 * x(s1.f_plus));
    let ch = -ep * (h1 * x(s2.f_minus) + h2 * x(s1.d_minus)) - em * (h1 * x(s2.f_plus) + h2 * x(s1.d_plus));
    ([[a, b], [c, d]], [[ah, bh], [ch, dh]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use tau2_core::scalar_functions::{average_monodromy, average_monodromy_hat};
    use tau2_core::ModelConfig;

    #[test]
    fn two_sites_reduce_to_products() {
        let cfg = ModelConfig::generate(3, 2, 21).unwrap();
        let u = C64::new(0.17, -0.4);
        let (t, th) = averages_two_sites(&cfg.sites()[0], &cfg.sites()[1], 3, u);
        let (mt, mth) = (average_monodromy(u, &cfg), average_monodromy_hat(u, &cfg));
        for i in 0..2 {
            for j in 0..2 {
                assert!((t[i][j] - mt[i][j]).norm() < 1e-12 * mt[i][j].norm().max(1.0));
                assert!((th[i][j] - mth[i][j]).norm() < 1e-12 * mth[i][j].norm().max(1.0));
            }
        }
    }
}
