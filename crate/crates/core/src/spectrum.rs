//! Exact diagonalization of the commuting transfer matrices, eigenvalue
//! Laurent curves and eigenvalue-level functional relations.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rk_matrices::f_normalization;
use crate::scalar_functions::{a_func, d_func, delta, tilde_ad};
use crate::tensorkit::{circle_points, eig, laurent_fit_channels, LaurentCurve, LaurentShape, OperatorMatrix};
use crate::transfer::{fused_transfer, transfer_asymptotics, transfer_matrix, transfer_special_values};
use crate::weyl_model::ModelConfig;
use crate::C64;

/// Eigenvalue `Λ_k(u)` as a Laurent polynomial in `e^{2u}`.
#[derive(Clone, Debug)]
pub struct EigCurve {
    pub index: usize,
    /// Step 2, degrees `−(N+2)..=N+2`.
    pub curve: LaurentCurve,
    /// Held-out residual of the fit, relative to the largest sample.
    pub fit_residual: f64,
    /// Condition number of the eigenvector matrix at the anchor.
    pub eigvec_cond: f64,
    /// Largest coefficient beyond degree `N+2` in a fit with one extra
    /// degree on each side, relative to the largest coefficient.
    pub degree_excess: f64,
}

impl EigCurve {
    pub fn eval(&self, u: C64) -> C64 {
        self.curve.eval(u)
    }
}

/// All eigenvalue curves together with the common eigenbasis.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub curves: Vec<EigCurve>,
    /// Eigenvectors as columns.
    pub basis: OperatorMatrix,
    pub basis_inv: OperatorMatrix,
    /// Spectral parameter at which the basis was computed.
    pub anchor: C64,
    /// Largest off-diagonal leakage seen while reading eigenvalues.
    pub leakage: f64,
}

impl Spectrum {
    /// Diagonal of `V⁻¹ M V` together with its relative off-diagonal part.
    pub fn diagonal_of(&self, m: &OperatorMatrix) -> (Vec<C64>, f64) {
        let d = m.transform(&self.basis, &self.basis_inv);
        diag_and_leakage(d.matrix())
    }
}

fn diag_and_leakage(d: &DMatrix<C64>) -> (Vec<C64>, f64) {
    let n = d.nrows();
    let diag: Vec<C64> = (0..n).map(|i| d[(i, i)]).collect();
    let scale = diag.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let mut off = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off = off.max(d[(i, j)].norm());
            }
        }
    }
    (diag, if scale == 0.0 { off } else { off / scale })
}

const MAX_RESAMPLES: usize = 5;
const COND_LIMIT: f64 = 1e6;
const GAP_LIMIT: f64 = 1e-8;
const LEAKAGE_LIMIT: f64 = 1e-8;
const FIT_TOL: f64 = 1e-9;
const SAMPLE_RADIUS: f64 = 0.05;

fn min_relative_gap(values: &[C64]) -> f64 {
    let scale = values.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let mut gap = f64::INFINITY;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            gap = gap.min((values[i] - values[j]).norm());
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        gap / scale
    }
}

fn anchor_candidates(u0: C64) -> impl Iterator<Item = C64> {
    (0..MAX_RESAMPLES).map(move |k| u0 + C64::new(0.037 * k as f64, 0.113 * k as f64))
}

/// Eigenbasis of the commuting family: first `t(u0)` itself, then resampled
/// anchors, then random commuting combinations `t(u0) + γ t(u1)`.
fn eigenbasis(cfg: &ModelConfig, u0: C64) -> Result<(OperatorMatrix, OperatorMatrix, C64, f64)> {
    let accept = |m: &OperatorMatrix| -> Result<Option<(OperatorMatrix, f64)>> {
        let e = eig(m)?;
        if e.cond < COND_LIMIT && min_relative_gap(&e.values) > GAP_LIMIT {
            Ok(Some((e.vectors, e.cond)))
        } else {
            Ok(None)
        }
    };
    for u in anchor_candidates(u0) {
        if let Some((v, cond)) = accept(&transfer_matrix(cfg, u)?)? {
            let vi = v.try_inverse().ok_or(Error::RankDeficient(0.0))?;
            return Ok((v, vi, u, cond));
        }
    }
    for k in 1..=MAX_RESAMPLES {
        let gamma = C64::new(0.61 * k as f64, -0.29 * k as f64);
        let u1 = u0 + C64::new(-0.17, 0.41 * k as f64);
        let m = &transfer_matrix(cfg, u0)? + &transfer_matrix(cfg, u1)?.scale(gamma);
        if let Some((v, cond)) = accept(&m)? {
            let vi = v.try_inverse().ok_or(Error::RankDeficient(0.0))?;
            return Ok((v, vi, u0, cond));
        }
    }
    Err(Error::PersistentDegeneracy(MAX_RESAMPLES))
}

/// Diagonalizes `t(u)` once at an anchor and reads every eigenvalue at
/// `2N+6` sample points by similarity transport, then fits each one.
pub fn eigencurves(cfg: &ModelConfig, u0: C64) -> Result<Spectrum> {
    let (v, vi, anchor, cond) = eigenbasis(cfg, u0)?;
    let dq = cfg.quantum_dim();
    let d = cfg.n_sites() as i32 + 2;
    let shape = LaurentShape::symmetric(2, d);
    let wide = LaurentShape::symmetric(2, d + 1);
    let mut leakage = 0.0f64;
    let mut extra = 0usize;
    loop {
        let fit_u = circle_points(wide.len() + extra, 2, SAMPLE_RADIUS, 0.21);
        let held_u = [C64::new(-SAMPLE_RADIUS, 0.9), C64::new(0.0, 0.3) + SAMPLE_RADIUS * 0.5];
        let mut read = |us: &[C64]| -> Result<Vec<Vec<C64>>> {
            let mut ch = alloc::vec![Vec::with_capacity(us.len()); dq];
            for &u in us {
                let dm = transfer_matrix(cfg, u)?.transform(&v, &vi);
                let (diag, leak) = diag_and_leakage(dm.matrix());
                leakage = leakage.max(leak);
                for (k, z) in diag.into_iter().enumerate() {
                    ch[k].push(z);
                }
            }
            Ok(ch)
        };
        let fv = read(&fit_u)?;
        let hv = read(&held_u)?;
        if leakage > LEAKAGE_LIMIT {
            return Err(Error::Leakage(leakage));
        }
        let fits = laurent_fit_channels(&fit_u, &fv, &held_u, &hv, shape, f64::INFINITY)?;
        let wide_fits = laurent_fit_channels(&fit_u, &fv, &held_u, &hv, wide, f64::INFINITY)?;
        let worst = fits.iter().map(|f| f.held_out_residual).fold(0.0, f64::max);
        if worst > FIT_TOL && extra < 8 {
            extra += 4;
            continue;
        }
        if worst > FIT_TOL {
            return Err(Error::ShapeMismatch(worst));
        }
        let mut curves: Vec<EigCurve> = fits
            .into_iter()
            .zip(wide_fits)
            .enumerate()
            .map(|(k, (f, w))| EigCurve {
                index: k,
                curve: f.curve,
                fit_residual: f.held_out_residual,
                eigvec_cond: cond,
                degree_excess: w.curve.excess_outside(-d, d),
            })
            .collect();
        // deterministic labels: order by the eigenvalue at the anchor
        let mut order: Vec<usize> = (0..dq).collect();
        let at: Vec<C64> = curves.iter().map(|c| c.eval(anchor)).collect();
        order.sort_by(|&i, &j| at[i].re.total_cmp(&at[j].re).then(at[i].im.total_cmp(&at[j].im)));
        let pv = DMatrix::from_fn(dq, dq, |r, c| v.entry(r, order[c]));
        let pvi = DMatrix::from_fn(dq, dq, |r, c| vi.entry(order[r], c));
        let mut sorted = Vec::with_capacity(dq);
        for (new, &old) in order.iter().enumerate() {
            let mut c = curves[old].clone();
            c.index = new;
            sorted.push(c);
        }
        curves = sorted;
        let space = cfg.quantum_space();
        return Ok(Spectrum {
            curves,
            basis: OperatorMatrix::new(pv, space.clone())?,
            basis_inv: OperatorMatrix::new(pvi, space)?,
            anchor,
            leakage,
        });
    }
}

/// `Λ⁽ʲ⁾(u)` from the tridiagonal determinant with diagonal
/// `Λ(u+(j−½−i)η)`, `i = 0..2j−1`, superdiagonal `−a(x_i)` and subdiagonal
/// `−d(x_{i+1})`, expanded as a continuant.
pub fn fused_eigenvalue(lambda: impl Fn(C64) -> C64, two_j: usize, cfg: &ModelConfig, u: C64) -> Result<C64> {
    if two_j == 0 {
        return Ok(C64::one());
    }
    let eta = cfg.eta();
    let j = two_j as f64 / 2.0;
    let x = |i: usize| u + eta * (j - 0.5 - i as f64);
    let mut prev = C64::one();
    let mut cur = lambda(x(0));
    for k in 1..two_j {
        let next = lambda(x(k)) * cur - a_func(x(k - 1), cfg)? * d_func(x(k), cfg)? * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Degree in `e^{2u}` of `f⁽ʲ⁾(u) Λ⁽ʲ⁾(u)`.
pub fn fused_degree(two_j: usize, n_sites: usize) -> i32 {
    let m = two_j as i32;
    m * (n_sites as i32 + 2) + m * (m - 1)
}

/// Laurent curve of `f⁽ʲ⁾(u) Λ⁽ʲ⁾(u)`, which is free of the poles that
/// `Λ⁽ʲ⁾` inherits from `a` and `d`. Divide by `f⁽ʲ⁾` to recover `Λ⁽ʲ⁾`.
pub fn fused_eigencurve(curve: &EigCurve, two_j: usize, cfg: &ModelConfig) -> Result<LaurentCurve> {
    if two_j <= 1 {
        return Ok(curve.curve.clone());
    }
    let d = fused_degree(two_j, cfg.n_sites());
    let shape = LaurentShape::symmetric(2, d);
    let fit_u = circle_points(shape.len() + 4, 2, SAMPLE_RADIUS, 0.17);
    let held_u = circle_points(2, 2, SAMPLE_RADIUS, 1.3);
    let eta = cfg.eta();
    let val = |u: C64| -> Result<C64> {
        Ok(f_normalization(two_j, u, eta) * fused_eigenvalue(|x| curve.eval(x), two_j, cfg, u)?)
    };
    let fv = fit_u.iter().map(|&u| val(u)).collect::<Result<Vec<_>>>()?;
    let hv = held_u.iter().map(|&u| val(u)).collect::<Result<Vec<_>>>()?;
    Ok(laurent_fit_channels(&fit_u, &[fv], &held_u, &[hv], shape, 1e-8)?.remove(0).curve)
}

/// `Λ⁽ʲ⁾(u)` from a fitted [`fused_eigencurve`].
pub fn eval_fused_curve(fused: &LaurentCurve, two_j: usize, cfg: &ModelConfig, u: C64) -> C64 {
    if two_j <= 1 {
        return fused.eval(u);
    }
    fused.eval(u) / f_normalization(two_j, u, cfg.eta())
}

/// Largest relative mismatch between the eigenvalues of `t⁽ʲ⁾(u)` in the
/// common eigenbasis and the determinant representation built from each
/// curve.
pub fn fused_spectrum_residual(spec: &Spectrum, cfg: &ModelConfig, two_j: usize, u: C64) -> Result<f64> {
    let (diag, leak) = spec.diagonal_of(&fused_transfer(two_j, cfg, u)?);
    let scale = diag.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let mut worst = leak;
    for (c, z) in spec.curves.iter().zip(&diag) {
        let lam = fused_eigenvalue(|x| c.eval(x), two_j, cfg, u)?;
        worst = worst.max((lam - z).norm() / scale);
    }
    Ok(worst)
}

/// Per-curve residuals of the eigenvalue properties.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenChecks {
    pub periodicity: f64,
    pub crossing: f64,
    pub value_at_zero: f64,
    pub value_at_i_pi_2: f64,
    pub asymptotic_plus: f64,
    pub asymptotic_minus: f64,
    pub degree_excess: f64,
}

impl EigenChecks {
    pub fn worst(&self) -> f64 {
        [
            self.periodicity,
            self.crossing,
            self.value_at_zero,
            self.value_at_i_pi_2,
            self.asymptotic_plus,
            self.asymptotic_minus,
            self.degree_excess,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn rel(a: C64, b: C64, scale: f64) -> f64 {
    (a - b).norm() / scale.max(b.norm()).max(f64::MIN_POSITIVE)
}

const PROBES: [C64; 4] = [C64::new(0.13, 0.41), C64::new(-0.27, 1.1), C64::new(0.05, -0.6), C64::new(0.31, 2.3)];

/// Periodicity, crossing, `Λ(0)`, `Λ(iπ/2)`, the leading coefficients and
/// the degree of one curve.
pub fn eigen_functional_checks(curve: &EigCurve, cfg: &ModelConfig) -> EigenChecks {
    let eta = cfg.eta();
    let scale = |u: C64| curve.eval(u).norm();
    let ipi = C64::new(0.0, core::f64::consts::PI);
    let periodicity = PROBES.iter().map(|&u| rel(curve.eval(u + ipi), curve.eval(u), scale(u))).fold(0.0, f64::max);
    let crossing = PROBES.iter().map(|&u| rel(curve.eval(-u - eta), curve.eval(u), scale(u))).fold(0.0, f64::max);
    let (t0, t1) = transfer_special_values(cfg);
    let (tp, tm) = transfer_asymptotics(cfg);
    let d = cfg.n_sites() as i32 + 2;
    EigenChecks {
        periodicity,
        crossing,
        value_at_zero: rel(curve.eval(C64::zero()), t0, 0.0),
        value_at_i_pi_2: rel(curve.eval(ipi / 2.0), t1, 0.0),
        asymptotic_plus: rel(curve.curve.coeff(d), tp, 0.0),
        asymptotic_minus: rel(curve.curve.coeff(-d), tm, 0.0),
        degree_excess: curve.degree_excess,
    }
}

/// Relative residual of the `p = 3` relation
/// `Λ(u+η)Λ(u)Λ(u−η) − δ(u+η)Λ(u−η) − δ(u)Λ(u+η) − δ(u−η)Λ(u) = Ã+D̃`,
/// normalized by the largest term.
pub fn p3_eigen_relation(curve: &EigCurve, cfg: &ModelConfig, u: C64) -> Result<f64> {
    if cfg.p() != 3 {
        return Err(Error::InvalidP(cfg.p()));
    }
    let eta = cfg.eta();
    let (lp, l0, lm) = (curve.eval(u + eta), curve.eval(u), curve.eval(u - eta));
    let terms = [lp * l0 * lm, -delta(u + eta, cfg)? * lm, -delta(u, cfg)? * lp, -delta(u - eta, cfg)? * l0];
    let (at, dt) = tilde_ad(u, cfg);
    let lhs: C64 = terms.iter().sum();
    let scale = terms.iter().map(|z| z.norm()).fold((at + dt).norm(), f64::max);
    Ok((lhs - at - dt).norm() / scale)
}

/// Relative residual of
/// `Λ^{(p/2)}(u) = Ã(u)+D̃(u) + δ(u−((p−1)/2)η) Λ^{((p−2)/2)}(u)` with both
/// fused eigenvalues from the determinant representation.
pub fn fused_truncation_residual(curve: &EigCurve, cfg: &ModelConfig, u: C64) -> Result<f64> {
    let p = cfg.p();
    let lam = |x| curve.eval(x);
    let top = fused_eigenvalue(lam, p, cfg, u)?;
    let lower = fused_eigenvalue(lam, p - 2, cfg, u)?;
    let (at, dt) = tilde_ad(u, cfg);
    let d = delta(u - cfg.eta() * ((p as f64 - 1.0) / 2.0), cfg)?;
    let rhs = at + dt + d * lower;
    let scale = top.norm().max((at + dt).norm()).max((d * lower).norm());
    Ok((top - rhs).norm() / scale)
}
