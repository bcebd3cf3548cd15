//! Monodromy matrices, double-row and fused transfer matrices, the fusion
//! hierarchy and the truncation identity.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::One;

use crate::error::{Error, Result};
use crate::rk_matrices::{
    fused_k_minus, fused_k_plus, k_minus, k_plus, middle_similarity, projector_antisym2, projector_sym,
    symmetric_blocks,
};
use crate::scalar_functions::{average_monodromy, average_monodromy_hat, delta, tilde_ad};
use crate::tensorkit::{circle_points, laurent_fit_channels, rel_diff, LaurentCurve, LaurentShape, OperatorMatrix};
use crate::weyl_model::{det_q_l, det_q_l_hat, l_blocks, l_hat_operator, l_operator, ModelConfig};
use crate::C64;

/// `T(u) = L_N(u)···L₁(u)` on `C² ⊗ (C^p)^{⊗N}`.
pub fn monodromy(cfg: &ModelConfig, u: C64) -> Result<OperatorMatrix> {
    let mut t = OperatorMatrix::identity(&cfg.aux_quantum_space());
    for (i, s) in cfg.sites().iter().enumerate() {
        t = &l_operator(s, i + 1, u, cfg)? * &t;
    }
    Ok(t)
}

/// `T̂(u) = L̂₁(u)···L̂_N(u)`.
pub fn monodromy_hat(cfg: &ModelConfig, u: C64) -> Result<OperatorMatrix> {
    let mut t = OperatorMatrix::identity(&cfg.aux_quantum_space());
    for (i, s) in cfg.sites().iter().enumerate() {
        t = &t * &l_hat_operator(s, i + 1, u, cfg)?;
    }
    Ok(t)
}

/// `t(u) = tr₀{K⁺(u) T(u) K⁻(u) T̂(u)}`.
pub fn transfer_matrix(cfg: &ModelConfig, u: C64) -> Result<OperatorMatrix> {
    let q = OperatorMatrix::identity(&cfg.quantum_space());
    let kp = k_plus(u, cfg.boundary(), cfg.eta()).kron(&q);
    let km = k_minus(u, cfg.boundary()).kron(&q);
    let prod = &(&(&kp * &monodromy(cfg, u)?) * &km) * &monodromy_hat(cfg, u)?;
    Ok(prod.partial_trace_leading(1))
}

/// Closed-form coefficients `(t_{N+2}, t_{−(N+2)})` of `e^{±(2N+4)u}` in
/// `t(u)`.
pub fn transfer_asymptotics(cfg: &ModelConfig) -> (C64, C64) {
    let k = cfg.constants();
    let bp = cfg.boundary();
    let th = bp.theta_plus - bp.theta_minus;
    let bracket = th.exp() * k.f_plus * k.f_minus + (-th).exp() * k.d_plus * k.d_minus;
    let e = cfg.eta() * (cfg.n_sites() as f64 + 2.0);
    (-e.exp() * bracket * 0.25, -(-e).exp() * bracket * 0.25)
}

/// Closed forms of the scalars `t(0)` and `t(iπ/2)`.
pub fn transfer_special_values(cfg: &ModelConfig) -> (C64, C64) {
    let bp = cfg.boundary();
    let eta = cfg.eta();
    let (em, ep) = ((-eta).exp(), eta.exp());
    let (mut p0, mut p1) = (C64::one(), C64::one());
    for s in cfg.sites() {
        let common = em * s.d_plus * s.f_plus + ep * s.d_minus * s.f_minus;
        let gh = ep * s.g_plus * s.h_minus + em * s.g_minus * s.h_plus;
        p0 *= common - gh;
        p1 *= common + gh;
    }
    let ch = eta.cosh();
    let t0 = -bp.alpha_minus.sinh() * bp.beta_minus.cosh() * bp.alpha_plus.sinh() * bp.beta_plus.cosh() * ch * p0 * 8.0;
    let t1 = -bp.alpha_minus.cosh() * bp.beta_minus.sinh() * bp.alpha_plus.cosh() * bp.beta_plus.sinh() * ch * p1 * 8.0;
    (t0, t1)
}

/// Entrywise Laurent fit of `t(u)` in `e^{2u}`, degrees `−(N+2)..=N+2`.
#[derive(Clone, Debug)]
pub struct TransferFit {
    /// Row-major entries of the quantum-space matrix.
    pub entries: Vec<LaurentCurve>,
    /// Largest held-out residual over all entries.
    pub held_out_residual: f64,
}

impl TransferFit {
    /// Coefficient matrix of `e^{2ku}`.
    pub fn coefficient(&self, k: i32, dq: usize) -> OperatorMatrix {
        let v: Vec<C64> = self.entries.iter().map(|c| c.coeff(k)).collect();
        OperatorMatrix::from_row_slice(dq, &v)
    }
}

pub fn transfer_laurent_fit(cfg: &ModelConfig) -> Result<TransferFit> {
    let d = cfg.n_sites() as i32 + 2;
    let shape = LaurentShape::symmetric(2, d);
    let fit_u = circle_points(shape.len() + 3, 2, 0.05, 0.13);
    let mut held_u = circle_points(2, 2, -0.05, 0.71);
    held_u.extend(circle_points(1, 2, 0.0, 0.4).iter().map(|u| u + C64::new(0.02, 0.0)));
    let dq = cfg.quantum_dim();
    let sample = |us: &[C64]| -> Result<Vec<Vec<C64>>> {
        let mats = us.iter().map(|&u| transfer_matrix(cfg, u)).collect::<Result<Vec<_>>>()?;
        Ok((0..dq * dq).map(|e| mats.iter().map(|m| m.entry(e / dq, e % dq)).collect()).collect())
    };
    let (fv, hv) = (sample(&fit_u)?, sample(&held_u)?);
    let fits = laurent_fit_channels(&fit_u, &fv, &held_u, &hv, shape, f64::INFINITY)?;
    // entries are relative to their own scale; measure against the matrix scale
    let scale = hv.iter().chain(fv.iter()).flatten().fold(0.0f64, |m, z| m.max(z.norm()));
    let mut worst = 0.0f64;
    for (f, ys) in fits.iter().zip(&hv) {
        for (&u, y) in held_u.iter().zip(ys) {
            worst = worst.max((f.curve.eval(u) - y).norm() / scale);
        }
    }
    Ok(TransferFit { entries: fits.into_iter().map(|f| f.curve).collect(), held_out_residual: worst })
}

/// `T` (or `T̂`) at `u` placed on auxiliary factor `k` of `m` spin-½ factors
/// followed by the quantum space.
fn embed_aux(t: &OperatorMatrix, k: usize, m: usize, cfg: &ModelConfig) -> Result<OperatorMatrix> {
    let mut space = vec![2; m];
    space.extend(cfg.quantum_space());
    let mut targets = vec![k];
    targets.extend(m..m + cfg.n_sites());
    t.embed(&targets, &space)
}

fn fused_product(two_j: usize, cfg: &ModelConfig, u: C64, hat: bool) -> Result<OperatorMatrix> {
    if two_j == 0 {
        return Err(Error::InvalidParameter("fused monodromy needs 2j >= 1".into()));
    }
    let m = two_j;
    let mut space = vec![2; m];
    space.extend(cfg.quantum_space());
    let mut r = OperatorMatrix::identity(&space);
    for k in 0..m {
        let x = u + cfg.eta() * (k as f64 - (m as f64 - 1.0) / 2.0);
        let t = if hat { monodromy_hat(cfg, x)? } else { monodromy(cfg, x)? };
        r = &r * &embed_aux(&t, k, m, cfg)?;
    }
    if m == 1 {
        return Ok(r);
    }
    let p = projector_sym(m).kron(&OperatorMatrix::identity(&cfg.quantum_space()));
    Ok(&(&p * &r) * &p)
}

/// `T⁽ʲ⁾(u) = P T₁(u−(j−½)η) T₂(u−(j−3/2)η) ··· T_{2j}(u+(j−½)η) P`.
pub fn fused_monodromy(two_j: usize, cfg: &ModelConfig, u: C64) -> Result<OperatorMatrix> {
    fused_product(two_j, cfg, u, false)
}

/// `T̂⁽ʲ⁾(u)`, same arguments and ordering as [`fused_monodromy`].
pub fn fused_monodromy_hat(two_j: usize, cfg: &ModelConfig, u: C64) -> Result<OperatorMatrix> {
    fused_product(two_j, cfg, u, true)
}

/// `t⁽ʲ⁾(u) = tr{K⁺⁽ʲ⁾ T⁽ʲ⁾ K⁻⁽ʲ⁾ T̂⁽ʲ⁾}`; `t⁽⁰⁾ = id`.
pub fn fused_transfer(two_j: usize, cfg: &ModelConfig, u: C64) -> Result<OperatorMatrix> {
    let q = OperatorMatrix::identity(&cfg.quantum_space());
    if two_j == 0 {
        return Ok(q);
    }
    let (bp, eta) = (cfg.boundary(), cfg.eta());
    let kp = fused_k_plus(two_j, u, bp, eta)?.kron(&q);
    let km = fused_k_minus(two_j, u, bp, eta).kron(&q);
    let prod = &(&(&kp * &fused_monodromy(two_j, cfg, u)?) * &km) * &fused_monodromy_hat(two_j, cfg, u)?;
    Ok(prod.partial_trace_leading(two_j))
}

/// `t⁽ʲ⁾` with `t^{(−½)} = 0`.
fn fused_transfer_signed(two_j: i64, cfg: &ModelConfig, u: C64) -> Result<OperatorMatrix> {
    if two_j < 0 {
        Ok(OperatorMatrix::zeros(&cfg.quantum_space()))
    } else {
        fused_transfer(two_j as usize, cfg, u)
    }
}

/// Relative residual of
/// `t(u) t^{(j−½)}(u−jη) = t⁽ʲ⁾(u−(j−½)η) + δ(u) t^{(j−1)}(u−(j+½)η)`.
pub fn check_fusion_hierarchy(cfg: &ModelConfig, two_j: usize, u: C64) -> Result<f64> {
    if two_j == 0 {
        return Err(Error::InvalidParameter("hierarchy needs 2j >= 1".into()));
    }
    let eta = cfg.eta();
    let j = two_j as f64 / 2.0;
    let tj = two_j as i64;
    let lhs = &transfer_matrix(cfg, u)? * &fused_transfer_signed(tj - 1, cfg, u - eta * j)?;
    let rhs = &fused_transfer(two_j, cfg, u - eta * (j - 0.5))?
        + &fused_transfer_signed(tj - 2, cfg, u - eta * (j + 0.5))?.scale(delta(u, cfg)?);
    Ok(rel_diff(&lhs, &rhs))
}

/// Relative residual of
/// `t^{(p/2)}(u) = (Ã(u)+D̃(u))·id + δ(u−((p−1)/2)η) t^{((p−2)/2)}(u)`.
pub fn check_truncation(cfg: &ModelConfig, u: C64) -> Result<f64> {
    let p = cfg.p();
    let lhs = fused_transfer(p, cfg, u)?;
    let (at, dt) = tilde_ad(u, cfg);
    let shift = cfg.eta() * ((p as f64 - 1.0) / 2.0);
    let rhs = &OperatorMatrix::scalar(at + dt, &cfg.quantum_space())
        + &fused_transfer(p - 2, cfg, u)?.scale(delta(u - shift, cfg)?);
    Ok(rel_diff(&lhs, &rhs))
}

/// `Det_q T(u) = ∏ Det_q L_n(u)`.
pub fn det_q_t(cfg: &ModelConfig, u: C64) -> C64 {
    cfg.sites().iter().map(|s| det_q_l(s, u, cfg.eta())).product()
}

/// `Det_q T̂(u) = ∏ Det_q L̂_n(u)`.
pub fn det_q_t_hat(cfg: &ModelConfig, u: C64) -> C64 {
    cfg.sites().iter().map(|s| det_q_l_hat(s, u, cfg.eta())).product()
}

/// Quantum determinant from `tr₁₂{P⁻₁₂ T₁(u) T₂(u−η)}` (or the hatted
/// version), which must be a multiple of the identity.
pub fn det_q_t_trace(cfg: &ModelConfig, u: C64, hat: bool) -> Result<C64> {
    let mono = |x| if hat { monodromy_hat(cfg, x) } else { monodromy(cfg, x) };
    let t1 = embed_aux(&mono(u)?, 0, 2, cfg)?;
    let t2 = embed_aux(&mono(u - cfg.eta())?, 1, 2, cfg)?;
    let pm = projector_antisym2().kron(&OperatorMatrix::identity(&cfg.quantum_space()));
    let m = (&(&pm * &t1) * &t2).partial_trace_leading(2);
    let (c, dev) = m.scalar_part();
    if dev > 1e-9 {
        return Err(Error::NotScalar(dev));
    }
    Ok(c)
}

/// Relative deviation of `∏_{m=1}^{p} O(u−mη)` from `𝒪(u)·id` for the
/// eight entries `A, B, C, D` of `T` and of `T̂`, in that order.
pub fn tarasov_residuals(cfg: &ModelConfig, u: C64) -> Result<[f64; 8]> {
    let p = cfg.p();
    let avg = [average_monodromy(u, cfg), average_monodromy_hat(u, cfg)];
    let q = cfg.quantum_space();
    let mut out = [0.0; 8];
    for (h, av) in avg.iter().enumerate() {
        let mut prods: Vec<OperatorMatrix> = (0..4).map(|_| OperatorMatrix::identity(&q)).collect();
        for m in 1..=p {
            let x = u - cfg.eta() * m as f64;
            let t = if h == 0 { monodromy(cfg, x)? } else { monodromy_hat(cfg, x)? };
            for (e, pr) in prods.iter_mut().enumerate() {
                *pr = &*pr * &t.block(e / 2, e % 2);
            }
        }
        for (e, pr) in prods.iter().enumerate() {
            out[4 * h + e] = rel_diff(pr, &OperatorMatrix::scalar(av[e / 2][e % 2], &q));
        }
    }
    Ok(out)
}

/// `ℒ_n`-level check on a single site: `∏ A_n(u−mη) = 𝒜_n(u)·id` etc.
pub fn site_tarasov_residuals(cfg: &ModelConfig, n: usize, u: C64) -> Result<[f64; 4]> {
    let av = crate::scalar_functions::average_l(n, u, cfg)?;
    let q = cfg.quantum_space();
    let mut prods: Vec<OperatorMatrix> = (0..4).map(|_| OperatorMatrix::identity(&q)).collect();
    for m in 1..=cfg.p() {
        let b = l_blocks(&cfg.sites()[n - 1], n, u - cfg.eta() * m as f64, cfg)?;
        for (e, pr) in prods.iter_mut().enumerate() {
            *pr = &*pr * &b[e];
        }
    }
    let mut out = [0.0; 4];
    for (e, pr) in prods.iter().enumerate() {
        out[e] = rel_diff(pr, &OperatorMatrix::scalar(av[e / 2][e % 2], &q));
    }
    Ok(out)
}

/// Block structure of the spin-p/2 fused monodromy in the symmetric basis
/// ordered `|↑…↑⟩, |↓…↓⟩`, then the remaining states.
#[derive(Clone, Debug)]
pub struct FusedBlockReport {
    /// Norm of the upper-right block relative to the whole matrix.
    pub upper_right: f64,
    /// Deviation of the top-left 2×2 block from the average values.
    pub top_left: f64,
    /// Deviation of the lower-right block from
    /// `Det_q T(u−((p−1)/2)η) F T^{((p−2)/2)}(u) F⁻¹` (only for `p = 3`).
    pub lower_right: Option<f64>,
}

pub fn fused_block_structure(cfg: &ModelConfig, u: C64, hat: bool) -> Result<FusedBlockReport> {
    let p = cfg.p();
    let t = fused_product(p, cfg, u, hat)?;
    let blocks = symmetric_blocks(&t, p);
    let n = p + 1;
    let order: Vec<usize> = [0, p].into_iter().chain(1..p).collect();
    let at = |i: usize, j: usize| &blocks[order[i]][order[j]];
    let total: f64 = blocks.iter().flatten().map(|b| b.norm().powi(2)).sum::<f64>().sqrt();
    let mut ur = 0.0f64;
    for i in 0..2 {
        for j in 2..n {
            ur += at(i, j).norm().powi(2);
        }
    }
    let av = if hat { average_monodromy_hat(u, cfg) } else { average_monodromy(u, cfg) };
    let q = cfg.quantum_space();
    let mut tl = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            tl = tl.max(rel_diff(at(i, j), &OperatorMatrix::scalar(av[i][j], &q)));
        }
    }
    let lower_right = if p == 3 {
        let shift = cfg.eta() * ((p as f64 - 1.0) / 2.0);
        let (det, lower) = if hat {
            (det_q_t_hat(cfg, u - shift), monodromy_hat(cfg, u)?)
        } else {
            (det_q_t(cfg, u - shift), monodromy(cfg, u)?)
        };
        let f = middle_similarity(p)?.kron(&OperatorMatrix::identity(&q));
        let expect = (&(&f * &lower) * &f).scale(det);
        let got = OperatorMatrix::from_blocks(&[
            vec![at(2, 2).clone(), at(2, 3).clone()],
            vec![at(3, 2).clone(), at(3, 3).clone()],
        ]);
        Some(rel_diff(&got, &expect))
    } else {
        None
    };
    Ok(FusedBlockReport { upper_right: ur.sqrt() / total, top_left: tl, lower_right })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rk_matrices::r_matrix;
    use crate::tensorkit::rel_diff_scalar;
    use num_traits::Zero;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn cfg(n: usize, seed: u64) -> ModelConfig {
        ModelConfig::generate(3, n, seed).unwrap()
    }

    #[test]
    fn single_site_monodromy_is_l() {
        let g = cfg(1, 3);
        let u = c(0.2, 0.1);
        let l = l_operator(&g.sites()[0], 1, u, &g).unwrap();
        assert!(rel_diff(&monodromy(&g, u).unwrap(), &l) < 1e-15);
    }

    #[test]
    fn yang_baxter_algebra() {
        let g = cfg(2, 4);
        let (u, v) = (c(0.3, 0.2), c(-0.1, 0.5));
        let mut space = vec![2, 2];
        space.extend(g.quantum_space());
        let t1 = embed_aux(&monodromy(&g, u).unwrap(), 0, 2, &g).unwrap();
        let t2 = embed_aux(&monodromy(&g, v).unwrap(), 1, 2, &g).unwrap();
        let r = r_matrix(u - v, g.eta()).embed(&[0, 1], &space).unwrap();
        assert!(rel_diff(&(&(&r * &t1) * &t2), &(&(&t2 * &t1) * &r)) < 1e-11);
    }

    #[test]
    fn monodromy_shift_by_i_pi() {
        let g = cfg(2, 5);
        let u = c(0.3, 0.2);
        let sz = crate::tensorkit::sigma_z().kron(&OperatorMatrix::identity(&g.quantum_space()));
        let a = monodromy(&g, u + c(0.0, core::f64::consts::PI)).unwrap();
        let b = (&(&sz * &monodromy(&g, u).unwrap()) * &sz).scale(C64::new((-1f64).powi(2), 0.0));
        assert!(rel_diff(&a, &b) < 1e-12);
    }

    #[test]
    fn transfer_commutes_and_is_symmetric() {
        let g = cfg(2, 6);
        let eta = g.eta();
        let (u, v) = (c(0.3, 0.2), c(-0.2, 0.7));
        let (tu, tv) = (transfer_matrix(&g, u).unwrap(), transfer_matrix(&g, v).unwrap());
        assert!(tu.commutator(&tv).norm() / (tu.norm() * tv.norm()) < 1e-10);
        assert!(rel_diff(&transfer_matrix(&g, -u - eta).unwrap(), &tu) < 1e-10);
        assert!(rel_diff(&transfer_matrix(&g, u + c(0.0, core::f64::consts::PI)).unwrap(), &tu) < 1e-12);
    }

    #[test]
    fn special_values() {
        for n in 1..=2 {
            let g = cfg(n, 7);
            let (t0, t1) = transfer_special_values(&g);
            let q = g.quantum_space();
            assert!(rel_diff(&transfer_matrix(&g, C64::zero()).unwrap(), &OperatorMatrix::scalar(t0, &q)) < 1e-10);
            let ipi2 = c(0.0, core::f64::consts::FRAC_PI_2);
            assert!(rel_diff(&transfer_matrix(&g, ipi2).unwrap(), &OperatorMatrix::scalar(t1, &q)) < 1e-10);
        }
    }

    #[test]
    fn asymptotics_and_shape() {
        let g = cfg(2, 8);
        let fit = transfer_laurent_fit(&g).unwrap();
        assert!(fit.held_out_residual < 1e-9, "{}", fit.held_out_residual);
        let (tp, tm) = transfer_asymptotics(&g);
        let dq = g.quantum_dim();
        let q = g.quantum_space();
        assert!(rel_diff(&fit.coefficient(4, dq), &OperatorMatrix::scalar(tp, &q)) < 1e-9);
        assert!(rel_diff(&fit.coefficient(-4, dq), &OperatorMatrix::scalar(tm, &q)) < 1e-9);
        let ratio = tp / tm;
        assert!(rel_diff_scalar(ratio, (g.eta() * 8.0).exp()) < 1e-12);
    }

    #[test]
    fn fused_half_is_plain() {
        let g = cfg(1, 9);
        let u = c(0.2, 0.3);
        assert!(rel_diff(&fused_monodromy(1, &g, u).unwrap(), &monodromy(&g, u).unwrap()) < 1e-15);
        assert!(rel_diff(&fused_transfer(1, &g, u).unwrap(), &transfer_matrix(&g, u).unwrap()) < 1e-14);
        assert!(rel_diff(&fused_transfer(0, &g, u).unwrap(), &OperatorMatrix::identity(&g.quantum_space())) == 0.0);
    }

    #[test]
    fn hierarchy_and_truncation() {
        let u = c(0.21, 0.33);
        let g1 = cfg(1, 10);
        assert!(check_fusion_hierarchy(&g1, 1, u).unwrap() < 1e-12);
        assert!(check_fusion_hierarchy(&g1, 2, u).unwrap() < 1e-9);
        assert!(check_fusion_hierarchy(&g1, 3, u).unwrap() < 1e-8);
        assert!(check_truncation(&g1, u).unwrap() < 1e-8);
        let g2 = cfg(2, 10);
        assert!(check_fusion_hierarchy(&g2, 3, u).unwrap() < 1e-8);
        assert!(check_truncation(&g2, u).unwrap() < 1e-8);
    }

    #[test]
    fn fused_commute() {
        let g = cfg(1, 12);
        let (u, v) = (c(0.21, 0.33), c(-0.15, 0.52));
        let a = fused_transfer(2, &g, u).unwrap();
        let b = fused_transfer(3, &g, v).unwrap();
        let t = transfer_matrix(&g, v).unwrap();
        assert!(a.commutator(&b).norm() / (a.norm() * b.norm()) < 1e-9);
        assert!(a.commutator(&t).norm() / (a.norm() * t.norm()) < 1e-9);
    }

    #[test]
    fn quantum_determinants() {
        let g = cfg(2, 13);
        let u = c(0.27, -0.4);
        assert!(rel_diff_scalar(det_q_t_trace(&g, u, false).unwrap(), det_q_t(&g, u)) < 1e-11);
        assert!(rel_diff_scalar(det_q_t_trace(&g, u, true).unwrap(), det_q_t_hat(&g, u)) < 1e-11);
        let g1 = cfg(1, 13);
        assert!(rel_diff_scalar(det_q_t(&g1, u), det_q_l(&g1.sites()[0], u, g1.eta())) == 0.0);
    }

    #[test]
    fn tarasov_property() {
        for n in 1..=2 {
            let g = cfg(n, 14);
            let r = tarasov_residuals(&g, c(0.3, 0.1)).unwrap();
            assert!(r.iter().all(|x| *x < 1e-9), "{r:?}");
        }
        let g = cfg(1, 14);
        assert!(site_tarasov_residuals(&g, 1, c(0.1, 0.2)).unwrap().iter().all(|x| *x < 1e-10));
    }

    #[test]
    fn block_triangular_fused_monodromy() {
        for n in 1..=2 {
            let g = cfg(n, 15);
            for hat in [false, true] {
                let r = fused_block_structure(&g, c(0.2, 0.35), hat).unwrap();
                assert!(r.upper_right < 1e-10, "{r:?}");
                assert!(r.top_left < 1e-9, "{r:?}");
                assert!(r.lower_right.unwrap() < 1e-10, "{r:?}");
            }
        }
    }
}
