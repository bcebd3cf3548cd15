//! Scalar functions of the spectral parameter: average values, `a`, `d`,
//! `δ`, `Ã`, `D̃`, `F` and the constant `c`.

use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rk_matrices::{det_q_k, fused_k_top, Side};
use crate::tensorkit::{circle_points, laurent_fit_channels, LaurentCurve, LaurentShape};
use crate::weyl_model::{det_q_l, det_q_l_hat, ModelConfig, SiteParams};
use crate::C64;

/// 2×2 scalar matrix, row-major.
pub type Mat2 = [[C64; 2]; 2];

pub fn mat2_identity() -> Mat2 {
    [[C64::one(), C64::zero()], [C64::zero(), C64::one()]]
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut r = [[C64::zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

/// Products over sites: `D± = ∏ d±_n`, `F± = ∏ f±_n`, `G± = ∏ g±_n`,
/// `H± = ∏ h±_n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelConstants {
    pub d_plus: C64,
    pub d_minus: C64,
    pub f_plus: C64,
    pub f_minus: C64,
    pub g_plus: C64,
    pub g_minus: C64,
    pub h_plus: C64,
    pub h_minus: C64,
}

impl ModelConstants {
    pub fn from_sites(sites: &[SiteParams]) -> Self {
        let prod = |f: fn(&SiteParams) -> C64| sites.iter().fold(C64::one(), |acc, s| acc * f(s));
        Self {
            d_plus: prod(|s| s.d_plus),
            d_minus: prod(|s| s.d_minus),
            f_plus: prod(|s| s.f_plus),
            f_minus: prod(|s| s.f_minus),
            g_plus: prod(|s| s.g_plus),
            g_minus: prod(|s| s.g_minus),
            h_plus: prod(|s| s.h_plus),
            h_minus: prod(|s| s.h_minus),
        }
    }
}

/// Average value `ℒ_n(u) = ∏_{m=1}^{p} L_n(u−mη)` of one site.
pub fn average_l_site(s: &SiteParams, p: usize, u: C64) -> Mat2 {
    let pi = p as i32;
    let (e, ei) = ((u * p as f64).exp(), (-u * p as f64).exp());
    [
        [e * s.d_plus.powi(pi) + ei * s.d_minus.powi(pi), s.g_plus.powi(pi) + s.g_minus.powi(pi)],
        [s.h_plus.powi(pi) + s.h_minus.powi(pi), e * s.f_plus.powi(pi) + ei * s.f_minus.powi(pi)],
    ]
}

/// Average value `ℒ̂_n(u)` of one site.
pub fn average_l_hat_site(s: &SiteParams, p: usize, u: C64) -> Mat2 {
    let pi = p as i32;
    let (e, ei) = ((u * p as f64).exp(), (-u * p as f64).exp());
    [
        [e * s.f_minus.powi(pi) + ei * s.f_plus.powi(pi), -s.g_plus.powi(pi) - s.g_minus.powi(pi)],
        [-s.h_plus.powi(pi) - s.h_minus.powi(pi), e * s.d_minus.powi(pi) + ei * s.d_plus.powi(pi)],
    ]
}

/// `ℒ_n(u)` for site `n` (1-based).
pub fn average_l(n: usize, u: C64, cfg: &ModelConfig) -> Result<Mat2> {
    let s = site(n, cfg)?;
    Ok(average_l_site(s, cfg.p(), u))
}

/// `ℒ̂_n(u)` for site `n` (1-based).
pub fn average_l_hat(n: usize, u: C64, cfg: &ModelConfig) -> Result<Mat2> {
    let s = site(n, cfg)?;
    Ok(average_l_hat_site(s, cfg.p(), u))
}

fn site(n: usize, cfg: &ModelConfig) -> Result<&SiteParams> {
    if n == 0 || n > cfg.n_sites() {
        return Err(Error::SiteIndex { index: n, sites: cfg.n_sites() });
    }
    Ok(&cfg.sites()[n - 1])
}

/// `𝒯(u) = ℒ_N(u)···ℒ₁(u)`.
pub fn average_monodromy(u: C64, cfg: &ModelConfig) -> Mat2 {
    cfg.sites().iter().fold(mat2_identity(), |acc, s| mat2_mul(&average_l_site(s, cfg.p(), u), &acc))
}

/// `𝒯̂(u) = ℒ̂₁(u)···ℒ̂_N(u)`.
pub fn average_monodromy_hat(u: C64, cfg: &ModelConfig) -> Mat2 {
    cfg.sites().iter().fold(mat2_identity(), |acc, s| mat2_mul(&acc, &average_l_hat_site(s, cfg.p(), u)))
}

/// `|sinh(2u+η)|` below this counts as a pole of `a`.
const POLE_TOL: f64 = 1e-12;

/// `a(u)·sinh(2u+η)`, free of poles.
pub fn a_func_regularized(u: C64, cfg: &ModelConfig) -> C64 {
    let eta = cfg.eta();
    let bp = cfg.boundary();
    let k = cfg.constants();
    let gh = k.g_minus * k.h_plus;
    let mut abar = (-eta * cfg.n_sites() as f64).exp() * gh;
    for s in cfg.sites() {
        let sgh = s.g_minus * s.h_plus;
        let left = u.exp() - (-u + eta * 2.0).exp() * s.d_minus * s.f_minus / sgh;
        let right = (-u).exp() * s.d_plus * s.f_plus / sgh - u.exp();
        abar *= left * right;
    }
    (u * 2.0 + eta * 2.0).sinh()
        * (u - bp.alpha_minus).sinh()
        * (u - bp.alpha_plus).sinh()
        * (u - bp.beta_minus).cosh()
        * (u - bp.beta_plus).cosh()
        * abar
        * -4.0
}

/// `a(u)`.
pub fn a_func(u: C64, cfg: &ModelConfig) -> Result<C64> {
    let den = (u * 2.0 + cfg.eta()).sinh();
    if den.norm() < POLE_TOL {
        return Err(Error::Pole { what: "a(u)", u });
    }
    Ok(a_func_regularized(u, cfg) / den)
}

/// `d(u) = a(−u−η)`.
pub fn d_func(u: C64, cfg: &ModelConfig) -> Result<C64> {
    a_func(-u - cfg.eta(), cfg).map_err(|_| Error::Pole { what: "d(u)", u })
}

/// `δ(u) = a(u) d(u−η)`.
pub fn delta(u: C64, cfg: &ModelConfig) -> Result<C64> {
    Ok(a_func(u, cfg)? * d_func(u - cfg.eta(), cfg)?)
}

/// `δ(u)` from quantum determinants:
/// `−Det_q K⁺(u) Det_q T(u) Det_q K⁻(u) Det_q T̂(u) / (sinh(2u+η) sinh(2u−η))`.
pub fn delta_qdet(u: C64, cfg: &ModelConfig) -> Result<C64> {
    let eta = cfg.eta();
    let den = (u * 2.0 + eta).sinh() * (u * 2.0 - eta).sinh();
    if den.norm() < POLE_TOL {
        return Err(Error::Pole { what: "delta(u)", u });
    }
    let bp = cfg.boundary();
    let dt: C64 = cfg.sites().iter().map(|s| det_q_l(s, u, eta)).product();
    let dth: C64 = cfg.sites().iter().map(|s| det_q_l_hat(s, u, eta)).product();
    Ok(-det_q_k(Side::Plus, u, bp, eta) * dt * det_q_k(Side::Minus, u, bp, eta) * dth / den)
}

/// `Ã` and `D̃` from the top blocks `𝒦⁺`, `𝒦⁻` of the spin-p/2 fused
/// K-matrices and the average monodromies.
pub fn tilde_ad_with(kp: &Mat2, km: &Mat2, t: &Mat2, th: &Mat2) -> (C64, C64) {
    let [[a, b], [c, d]] = *t;
    let [[ah, bh], [ch, dh]] = *th;
    let at = (kp[0][0] * a + kp[0][1] * c) * (km[0][0] * ah + km[0][1] * ch)
        + (kp[0][0] * b + kp[0][1] * d) * (km[1][0] * ah + km[1][1] * ch);
    let dt = (kp[1][0] * a + kp[1][1] * c) * (km[0][0] * bh + km[0][1] * dh)
        + (kp[1][0] * b + kp[1][1] * d) * (km[1][0] * bh + km[1][1] * dh);
    (at, dt)
}

/// `(Ã(u), D̃(u))`.
pub fn tilde_ad(u: C64, cfg: &ModelConfig) -> (C64, C64) {
    let (p, eta, bp) = (cfg.p(), cfg.eta(), cfg.boundary());
    let kp = fused_k_top(Side::Plus, p, u, bp, eta);
    let km = fused_k_top(Side::Minus, p, u, bp, eta);
    tilde_ad_with(&kp, &km, &average_monodromy(u, cfg), &average_monodromy_hat(u, cfg))
}

/// `Ā(u) = ∏_{m=1}^{p} a(u−mη)`.
pub fn a_bar(u: C64, cfg: &ModelConfig) -> Result<C64> {
    (1..=cfg.p()).try_fold(C64::one(), |acc, m| Ok(acc * a_func(u - cfg.eta() * m as f64, cfg)?))
}

/// `D̄(u) = ∏_{m=1}^{p} d(u−mη)`.
pub fn d_bar(u: C64, cfg: &ModelConfig) -> Result<C64> {
    (1..=cfg.p()).try_fold(C64::one(), |acc, m| Ok(acc * d_func(u - cfg.eta() * m as f64, cfg)?))
}

/// `F(u) = Ã + D̃ − Ā − D̄`, pointwise.
pub fn f_func(u: C64, cfg: &ModelConfig) -> Result<C64> {
    let (at, dt) = tilde_ad(u, cfg);
    Ok(at + dt - a_bar(u, cfg)? - d_bar(u, cfg)?)
}

/// Fitted Laurent form of `F` with its structure diagnostics.
#[derive(Clone, Debug)]
pub struct FStructure {
    /// Step `2p`, degrees `−(N+2)..=N+2`.
    pub curve: LaurentCurve,
    pub held_out_residual: f64,
    /// Largest step-1 coefficient at an exponent outside `2pℤ`, relative to
    /// the largest coefficient.
    pub off_lattice: f64,
}

/// Real part of the sampling circles: away from the poles of `a` and `d`
/// on `Re u = 0`.
const F_RADIUS: f64 = 0.1;

/// Fits `f` and checks held-out points against the size of the terms that
/// make it up, since `f` itself may cancel to zero.
fn fit_on_circles(shape: LaurentShape, f: impl Fn(C64) -> Result<(C64, f64)>) -> Result<(LaurentCurve, f64)> {
    let fit_u = circle_points(shape.len() + 4, shape.step, F_RADIUS, 0.1);
    let held_u = circle_points(3, shape.step, -F_RADIUS, 0.37);
    let fv = fit_u.iter().map(|&u| f(u)).collect::<Result<Vec<_>>>()?;
    let hv = held_u.iter().map(|&u| f(u)).collect::<Result<Vec<_>>>()?;
    let scale = fv.iter().chain(&hv).fold(0.0f64, |m, v| m.max(v.1));
    let vals = |v: &[(C64, f64)]| v.iter().map(|x| x.0).collect::<Vec<_>>();
    let fit = laurent_fit_channels(&fit_u, &[vals(&fv)], &held_u, &[vals(&hv)], shape, f64::INFINITY)?.remove(0);
    let held = held_u.iter().zip(&hv).map(|(&u, v)| (fit.curve.eval(u) - v.0).norm()).fold(0.0, f64::max) / scale;
    if !(held <= 1e-9) {
        return Err(Error::ShapeMismatch(held));
    }
    Ok((fit.curve, held))
}

/// `F(u)` and the largest of its four terms.
fn f_terms(u: C64, cfg: &ModelConfig) -> Result<(C64, f64)> {
    let (at, dt) = tilde_ad(u, cfg);
    let (ab, db) = (a_bar(u, cfg)?, d_bar(u, cfg)?);
    Ok((at + dt - ab - db, [at, dt, ab, db].iter().fold(0.0, |m, z| m.max(z.norm()))))
}

/// Step-`2p` fit of `F`, degrees `−(N+2)..=N+2`, without the off-lattice
/// check.
pub fn f_fit(cfg: &ModelConfig) -> Result<(LaurentCurve, f64)> {
    let shape = LaurentShape::symmetric(2 * cfg.p() as u32, cfg.n_sites() as i32 + 2);
    fit_on_circles(shape, |u| f_terms(u, cfg))
}

/// Step-`p` fit of `Ã + D̃`, degrees `−(2N+4)..=2N+4`.
pub fn tilde_sum_fit(cfg: &ModelConfig) -> Result<LaurentCurve> {
    let shape = LaurentShape::symmetric(cfg.p() as u32, 2 * cfg.n_sites() as i32 + 4);
    fit_on_circles(shape, |u| {
        let (a, d) = tilde_ad(u, cfg);
        Ok((a + d, a.norm().max(d.norm())))
    })
    .map(|f| f.0)
}

/// Fits `F` on step `2p` and confirms with a step-1 fit that nothing lives
/// off the `2pℤ` exponent lattice.
pub fn f_structure(cfg: &ModelConfig) -> Result<FStructure> {
    let p = cfg.p() as u32;
    let d = cfg.n_sites() as i32 + 2;
    let (curve, held_out_residual) = f_fit(cfg)?;
    let eval = |us: &[C64]| us.iter().map(|&u| f_func(u, cfg)).collect::<Result<Vec<_>>>();
    let d1 = 2 * p as i32 * d;
    let shape1 = LaurentShape::symmetric(1, d1);
    let fit_u1 = circle_points(shape1.len() + 6, 1, F_RADIUS, 0.05);
    let held_u1 = circle_points(3, 1, -F_RADIUS, 0.29);
    let (fv1, hv1) = (eval(&fit_u1)?, eval(&held_u1)?);
    let fit1 = laurent_fit_channels(&fit_u1, &[fv1], &held_u1, &[hv1], shape1, 1e-8)?.remove(0);
    let scale = fit1.curve.max_abs_coeff();
    let worst = fit1.curve.terms().filter(|(n, _)| n % (2 * p as i64) != 0).map(|(_, c)| c.norm()).fold(0.0, f64::max);
    let off_lattice = if scale == 0.0 { 0.0 } else { worst / scale };
    if off_lattice > 1e-9 {
        return Err(Error::ShapeMismatch(off_lattice));
    }
    Ok(FStructure { curve, held_out_residual, off_lattice })
}

/// Step-`2p` Laurent coefficients of `F`.
pub fn f_coeffs(cfg: &ModelConfig) -> Result<LaurentCurve> {
    Ok(f_structure(cfg)?.curve)
}

/// Both sides of the linear equation fixing `c`: `lhs·c = rhs`.
pub fn c_equation(cfg: &ModelConfig) -> (C64, C64, f64) {
    let k = cfg.constants();
    let bp = cfg.boundary();
    let p = cfg.p() as i32;
    let pf = p as f64;
    let eta = cfg.eta();
    let sigma = if cfg.n_sites() % 2 == 0 { 1.0 } else { -1.0 };
    let s = bp.s_total();
    let th = bp.theta_plus - bp.theta_minus;
    let (ff, dd) = (k.f_plus * k.f_minus, k.d_plus * k.d_minus);
    let (gh_m, gh_p) = (k.g_minus * k.h_plus, k.g_plus * k.h_minus);
    let l_terms = [
        (th * pf).exp() * ff.powi(p),
        (-th * pf).exp() * dd.powi(p),
        -(-s * pf).exp() * gh_m.powi(p) * sigma,
        -(s * pf).exp() * gh_p.powi(p) * sigma,
    ];
    let lhs = l_terms.iter().sum::<C64>() * 0.5f64.powi(2 * p);
    let l_scale = l_terms.iter().map(|z| z.norm()).sum::<f64>() * 0.5f64.powi(2 * p);
    let rhs =
        (th.exp() * ff + (-th).exp() * dd - (-s - eta).exp() * gh_m * sigma - (s + eta).exp() * gh_p * sigma) * 0.25;
    (lhs, rhs, l_scale)
}

/// Relative size below which the bracket multiplying `c` counts as zero.
const DEGENERATE_TOL: f64 = 1e-12;

/// The constant `c` of the inhomogeneous T-Q relation.
pub fn c_constant(cfg: &ModelConfig) -> Result<C64> {
    let (lhs, rhs, scale) = c_equation(cfg);
    if !(lhs.norm() > DEGENERATE_TOL * scale) {
        return Err(Error::DegenerateBoundary);
    }
    Ok(rhs / lhs)
}

/// `|lhs·c − rhs|` relative to `|rhs|` (or 1 if `rhs` vanishes).
pub fn c_equation_residual(cfg: &ModelConfig, c: C64) -> f64 {
    let (lhs, rhs, _) = c_equation(cfg);
    let den = if rhs.norm() > 0.0 { rhs.norm() } else { 1.0 };
    (lhs * c - rhs).norm() / den
}

/// `2^{2N(1−p)−4p+2}`.
pub fn tq_prefactor(p: usize, n: usize) -> f64 {
    let e = 2 * n as i32 * (1 - p as i32) - 4 * p as i32 + 2;
    2f64.powi(e)
}

/// Per-site ratios `(g⁺ᵖ + g⁻ᵖ)/(h⁺ᵖ + h⁻ᵖ)`.
pub fn chiral_potts_ratios(cfg: &ModelConfig) -> Vec<C64> {
    let p = cfg.p() as i32;
    cfg.sites()
        .iter()
        .map(|s| (s.g_plus.powi(p) + s.g_minus.powi(p)) / (s.h_plus.powi(p) + s.h_minus.powi(p)))
        .collect()
}

/// Spread of the chiral Potts ratios: `max_n |λ_n − λ_1| / |λ_1|`. Zero iff
/// every site carries the same `λ`.
pub fn chiral_potts_residual(cfg: &ModelConfig) -> f64 {
    let r = chiral_potts_ratios(cfg);
    let l0 = r[0];
    r.iter().map(|x| (x - l0).norm()).fold(0.0, f64::max) / l0.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rk_matrices::BoundaryParams;
    use crate::tensorkit::rel_diff_scalar;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn points() -> Vec<C64> {
        (0..20).map(|k| c(0.1 + 0.03 * k as f64, -0.7 + 0.09 * k as f64)).collect()
    }

    #[test]
    fn constants_match_recomputation() {
        let cfg = ModelConfig::generate(3, 2, 4).unwrap();
        assert_eq!(*cfg.constants(), ModelConstants::from_sites(cfg.sites()));
        let s = cfg.sites();
        assert_eq!(cfg.constants().g_minus, C64::one() * s[0].g_minus * s[1].g_minus);
    }

    #[test]
    fn d_is_crossed_a() {
        let cfg = ModelConfig::generate(3, 2, 1).unwrap();
        let eta = cfg.eta();
        for u in points() {
            let d = d_func(u, &cfg).unwrap();
            let a = a_func(-u - eta, &cfg).unwrap();
            assert!(rel_diff_scalar(d, a) < 1e-14);
        }
    }

    #[test]
    fn a_vanishes_at_alpha_minus() {
        let cfg = ModelConfig::generate(3, 1, 2).unwrap();
        let am = cfg.boundary().alpha_minus;
        let scale = a_func(am + 0.3, &cfg).unwrap().norm();
        assert!(a_func(am, &cfg).unwrap().norm() < 1e-14 * scale);
    }

    #[test]
    fn a_pole_is_reported() {
        let cfg = ModelConfig::generate(3, 1, 2).unwrap();
        let u = -cfg.eta() / 2.0;
        assert!(matches!(a_func(u, &cfg), Err(Error::Pole { .. })));
    }

    #[test]
    fn delta_equals_quantum_determinant_product() {
        for (p, n) in [(3, 1), (3, 2), (5, 1)] {
            let cfg = ModelConfig::generate(p, n, 11).unwrap();
            for u in points() {
                let a = delta(u, &cfg).unwrap();
                let b = delta_qdet(u, &cfg).unwrap();
                assert!(rel_diff_scalar(a, b) < 1e-10, "p={p} n={n}");
            }
        }
    }

    #[test]
    fn average_l_special_case() {
        let s = SiteParams {
            d_plus: C64::one(),
            d_minus: C64::zero(),
            f_plus: C64::one(),
            f_minus: C64::one(),
            g_plus: C64::one(),
            g_minus: C64::one(),
            h_plus: C64::one(),
            h_minus: C64::one(),
        };
        let u = c(0.2, 0.4);
        assert!(rel_diff_scalar(average_l_site(&s, 3, u)[0][0], (u * 3.0).exp()) < 1e-15);
    }

    #[test]
    fn averages_are_eta_periodic() {
        let cfg = ModelConfig::generate(3, 2, 3).unwrap();
        let eta = cfg.eta();
        for u in points() {
            let (t0, t1) = (average_monodromy(u, &cfg), average_monodromy(u + eta, &cfg));
            let (h0, h1) = (average_monodromy_hat(u, &cfg), average_monodromy_hat(u + eta, &cfg));
            for i in 0..2 {
                for j in 0..2 {
                    assert!(rel_diff_scalar(t0[i][j], t1[i][j]) < 1e-13);
                    assert!(rel_diff_scalar(h0[i][j], h1[i][j]) < 1e-13);
                }
            }
            let (a0, d0) = tilde_ad(u, &cfg);
            let (a1, d1) = tilde_ad(u + eta, &cfg);
            assert!(rel_diff_scalar(a0, a1) < 1e-11);
            assert!(rel_diff_scalar(d0, d1) < 1e-11);
        }
    }

    #[test]
    fn average_asymptotics() {
        let cfg = ModelConfig::generate(3, 2, 5).unwrap();
        let k = *cfg.constants();
        let pn = (cfg.p() * cfg.n_sites()) as f64;
        let big = 15.0;
        let u = c(big, 0.3);
        let scale = (u * pn).exp();
        let t = average_monodromy(u, &cfg);
        let th = average_monodromy_hat(u, &cfg);
        assert!(rel_diff_scalar(t[0][0] / scale, k.d_plus.powi(3)) < 1e-10);
        assert!(rel_diff_scalar(t[1][1] / scale, k.f_plus.powi(3)) < 1e-10);
        assert!(rel_diff_scalar(th[0][0] / scale, k.f_minus.powi(3)) < 1e-10);
        assert!(rel_diff_scalar(th[1][1] / scale, k.d_minus.powi(3)) < 1e-10);
        let u = c(-big, 0.3);
        let scale = (-u * pn).exp();
        let t = average_monodromy(u, &cfg);
        let th = average_monodromy_hat(u, &cfg);
        assert!(rel_diff_scalar(t[0][0] / scale, k.d_minus.powi(3)) < 1e-10);
        assert!(rel_diff_scalar(t[1][1] / scale, k.f_minus.powi(3)) < 1e-10);
        assert!(rel_diff_scalar(th[0][0] / scale, k.f_plus.powi(3)) < 1e-10);
        assert!(rel_diff_scalar(th[1][1] / scale, k.d_plus.powi(3)) < 1e-10);
    }

    #[test]
    fn tilde_ad_with_diagonal_k() {
        let z = C64::zero();
        let kp = [[c(1.0, 0.5), z], [z, c(-0.3, 2.0)]];
        let km = [[c(0.7, -0.1), z], [z, c(1.1, 0.4)]];
        let t = [[c(1.0, 1.0), c(2.0, 0.0)], [c(0.0, 3.0), c(-1.0, 0.5)]];
        let th = [[c(0.5, 0.0), c(1.0, -1.0)], [c(2.0, 2.0), c(0.3, 0.1)]];
        let (a, d) = tilde_ad_with(&kp, &km, &t, &th);
        let ea = kp[0][0] * km[0][0] * t[0][0] * th[0][0] + kp[0][0] * km[1][1] * t[0][1] * th[1][0];
        let ed = kp[1][1] * km[0][0] * t[1][0] * th[0][1] + kp[1][1] * km[1][1] * t[1][1] * th[1][1];
        assert!(rel_diff_scalar(a, ea) < 1e-15);
        assert!(rel_diff_scalar(d, ed) < 1e-15);
    }

    #[test]
    fn f_crossing_and_structure() {
        for n in 1..=2 {
            let cfg = ModelConfig::generate(3, n, 7).unwrap();
            let eta = cfg.eta();
            for u in points() {
                let a = f_func(u, &cfg).unwrap();
                let b = f_func(-u - eta, &cfg).unwrap();
                assert!(rel_diff_scalar(a, b) < 1e-10);
            }
            let fs = f_structure(&cfg).unwrap();
            assert!(fs.off_lattice < 1e-9);
            assert!(fs.held_out_residual < 1e-9);
            let curve = &fs.curve;
            let d = n as i32 + 2;
            for k in 0..=d {
                let (a, b) = (curve.coeff(k), curve.coeff(-k));
                assert!((a - b).norm() < 1e-9 * curve.max_abs_coeff(), "F_k = F_-k");
            }
        }
    }

    #[test]
    fn c_substitution() {
        for n in 1..=3 {
            let cfg = ModelConfig::generate(3, n, 21).unwrap();
            let c0 = c_constant(&cfg).unwrap();
            assert!(c_equation_residual(&cfg, c0) < 1e-13);
            let mut bp = *cfg.boundary();
            bp.theta_plus += C64::new(0.0, core::f64::consts::PI);
            let cfg2 = cfg.with_boundary(bp).unwrap();
            let c2 = c_constant(&cfg2).unwrap();
            assert!(c2.is_finite());
            assert!(c_equation_residual(&cfg2, c2) < 1e-13);
        }
    }

    #[test]
    fn c_guard_on_vanishing_bracket() {
        // Choose θ₊ so that the p-th-power bracket vanishes: a quadratic in
        // y = e^{p(θ₊−θ₋)}.
        let cfg = ModelConfig::generate(3, 1, 8).unwrap();
        let k = *cfg.constants();
        let bp = *cfg.boundary();
        let s = bp.s_total();
        let sigma = -1.0;
        let qa = (k.f_plus * k.f_minus).powi(3);
        let qc = (k.d_plus * k.d_minus).powi(3);
        let qb = -((-s * 3.0).exp() * (k.g_minus * k.h_plus).powi(3)
            + (s * 3.0).exp() * (k.g_plus * k.h_minus).powi(3))
            * sigma;
        let y = (-qb + (qb * qb - qa * qc * 4.0).sqrt()) / (qa * 2.0);
        let theta_plus = bp.theta_minus + y.ln() / 3.0;
        let cfg2 = cfg.with_boundary(BoundaryParams { theta_plus, ..bp }).unwrap();
        assert!(matches!(c_constant(&cfg2), Err(Error::DegenerateBoundary)));
    }

    #[test]
    fn prefactor_exponent() {
        assert_eq!(tq_prefactor(3, 1), 2f64.powi(-14));
        assert_eq!(tq_prefactor(3, 2), 2f64.powi(-18));
    }

    #[test]
    fn chiral_potts_checker() {
        let cfg = ModelConfig::generate(3, 1, 1).unwrap();
        assert_eq!(chiral_potts_residual(&cfg), 0.0);
        let cfg = ModelConfig::generate(3, 2, 1).unwrap();
        assert!(chiral_potts_residual(&cfg) > 1e-3);
        let s = cfg.sites()[0];
        let cfg3 = ModelConfig::new(3, alloc::vec![s, s], *cfg.boundary()).unwrap();
        assert!(chiral_potts_residual(&cfg3) < 1e-15);
    }
}
