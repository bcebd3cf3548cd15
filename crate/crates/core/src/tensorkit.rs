//! Dense complex operators on tensor-product spaces, eigen-decomposition,
//! Laurent-polynomial fitting and polynomial roots.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, Schur};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::C64;

/// Eigenvector condition number above which a decomposition is flagged.
pub const ILL_CONDITIONED: f64 = 1e8;

/// Square complex matrix acting on a declared product of tensor factors.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    mat: DMatrix<C64>,
    space: Vec<usize>,
}

fn space_dim(space: &[usize]) -> usize {
    space.iter().product()
}

fn strides(space: &[usize]) -> Vec<usize> {
    let mut s = vec![1; space.len()];
    for i in (0..space.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * space[i + 1];
    }
    s
}

impl OperatorMatrix {
    pub fn new(mat: DMatrix<C64>, space: Vec<usize>) -> Result<Self> {
        let dim = space_dim(&space);
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::Dimension(format!("{}x{} matrix on space {:?}", mat.nrows(), mat.ncols(), space)));
        }
        Ok(Self { mat, space })
    }

    /// Square matrix on a single factor.
    pub fn from_matrix(mat: DMatrix<C64>) -> Self {
        assert_eq!(mat.nrows(), mat.ncols(), "operator must be square");
        let n = mat.nrows();
        Self { mat, space: vec![n] }
    }

    pub fn from_row_slice(n: usize, entries: &[C64]) -> Self {
        Self::from_matrix(DMatrix::from_row_slice(n, n, entries))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self::from_matrix(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn identity(space: &[usize]) -> Self {
        let n = space_dim(space);
        Self { mat: DMatrix::identity(n, n), space: space.to_vec() }
    }

    pub fn zeros(space: &[usize]) -> Self {
        let n = space_dim(space);
        Self { mat: DMatrix::zeros(n, n), space: space.to_vec() }
    }

    pub fn scalar(c: C64, space: &[usize]) -> Self {
        Self::identity(space).scale(c)
    }

    /// Assembles an operator whose leading factor has dimension `k` from a
    /// `k × k` grid of blocks sharing one space.
    pub fn from_blocks(blocks: &[Vec<OperatorMatrix>]) -> Self {
        let k = blocks.len();
        let inner = blocks[0][0].space.clone();
        let d = blocks[0][0].dim();
        let mut mat = DMatrix::zeros(k * d, k * d);
        for (i, row) in blocks.iter().enumerate() {
            assert_eq!(row.len(), k, "block grid must be square");
            for (j, b) in row.iter().enumerate() {
                assert_eq!(b.space, inner, "blocks must share a space");
                mat.view_mut((i * d, j * d), (d, d)).copy_from(&b.mat);
            }
        }
        let mut space = vec![k];
        space.extend_from_slice(&inner);
        Self { mat, space }
    }

    /// Block `(i, j)` with respect to the leading factor.
    pub fn block(&self, i: usize, j: usize) -> OperatorMatrix {
        let k = self.space[0];
        let d = self.dim() / k;
        let space = self.space[1..].to_vec();
        let space = if space.is_empty() { vec![1] } else { space };
        Self { mat: self.mat.view((i * d, j * d), (d, d)).into_owned(), space }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn space(&self) -> &[usize] {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn entry(&self, r: usize, c: usize) -> C64 {
        self.mat[(r, c)]
    }

    /// Same entries, relabelled tensor structure.
    pub fn with_space(self, space: Vec<usize>) -> Result<Self> {
        Self::new(self.mat, space)
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { mat: &self.mat * c, space: self.space.clone() }
    }

    pub fn kron(&self, other: &OperatorMatrix) -> Self {
        let mut space = self.space.clone();
        space.extend_from_slice(&other.space);
        Self { mat: self.mat.kronecker(&other.mat), space }
    }

    /// Places `self` on the factors `targets` of `space` (in that order) and
    /// the identity on every other factor.
    pub fn embed(&self, targets: &[usize], space: &[usize]) -> Result<Self> {
        let op_space: Vec<usize> = targets
            .iter()
            .map(|&t| space.get(t).copied().ok_or_else(|| Error::Dimension(format!("factor {t} not in {space:?}"))))
            .collect::<Result<_>>()?;
        let mut seen = vec![false; space.len()];
        for &t in targets {
            if core::mem::replace(&mut seen[t], true) {
                return Err(Error::Dimension(format!("factor {t} targeted twice")));
            }
        }
        if space_dim(&op_space) != self.dim() {
            return Err(Error::Dimension(format!("operator of dim {} on factors {:?}", self.dim(), op_space)));
        }
        let full = strides(space);
        let sub = strides(&op_space);
        let dim = space_dim(space);
        let od = self.dim();
        // offset of each operator index inside the full space
        let offsets: Vec<usize> = (0..od)
            .map(|c| targets.iter().enumerate().map(|(k, &t)| (c / sub[k]) % op_space[k] * full[t]).sum())
            .collect();
        let mut mat = DMatrix::zeros(dim, dim);
        for r in 0..dim {
            let mut sub_r = 0;
            let mut base = r;
            for (k, &t) in targets.iter().enumerate() {
                let digit = (r / full[t]) % space[t];
                sub_r += digit * sub[k];
                base -= digit * full[t];
            }
            for (c_sub, off) in offsets.iter().enumerate() {
                let v = self.mat[(sub_r, c_sub)];
                if v != C64::zero() {
                    mat[(r, base + off)] = v;
                }
            }
        }
        Ok(Self { mat, space: space.to_vec() })
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// Traces out the first `k` factors.
    pub fn partial_trace_leading(&self, k: usize) -> Self {
        let da = space_dim(&self.space[..k]);
        let rest = self.space[k..].to_vec();
        let dq = space_dim(&rest);
        let mut mat = DMatrix::zeros(dq, dq);
        for i in 0..da {
            mat += self.mat.view((i * dq, i * dq), (dq, dq));
        }
        let space = if rest.is_empty() { vec![1] } else { rest };
        Self { mat, space }
    }

    /// Transposes factor `f` only.
    pub fn partial_transpose(&self, f: usize) -> Self {
        let st = strides(&self.space);
        let d = self.space[f];
        let n = self.dim();
        let mut mat = DMatrix::zeros(n, n);
        for r in 0..n {
            let dr = (r / st[f]) % d;
            for c in 0..n {
                let dc = (c / st[f]) % d;
                let r2 = r - dr * st[f] + dc * st[f];
                let c2 = c - dc * st[f] + dr * st[f];
                mat[(r2, c2)] = self.mat[(r, c)];
            }
        }
        Self { mat, space: self.space.clone() }
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.mat.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn commutator(&self, other: &OperatorMatrix) -> Self {
        &(self * other) - &(other * self)
    }

    /// `B† A B` for a matrix `B` whose columns are a basis of a subspace.
    pub fn restrict(&self, basis: &DMatrix<C64>) -> DMatrix<C64> {
        basis.adjoint() * &self.mat * basis
    }

    /// `V⁻¹ A V`.
    pub fn transform(&self, v: &OperatorMatrix, v_inv: &OperatorMatrix) -> Self {
        Self { mat: &v_inv.mat * &self.mat * &v.mat, space: self.space.clone() }
    }

    /// Distance of `self` from the nearest multiple of the identity, relative
    /// to its norm, together with that multiple.
    pub fn scalar_part(&self) -> (C64, f64) {
        let c = self.trace() / self.dim() as f64;
        let dev = (&self.mat - DMatrix::identity(self.dim(), self.dim()) * c).norm();
        let n = self.norm();
        (c, if n == 0.0 { 0.0 } else { dev / n })
    }

    pub fn try_inverse(&self) -> Option<Self> {
        self.mat.clone().try_inverse().map(|mat| Self { mat, space: self.space.clone() })
    }
}

impl Mul<&OperatorMatrix> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions differ");
        OperatorMatrix { mat: &self.mat * &rhs.mat, space: self.space.clone() }
    }
}

impl Mul<C64> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: C64) -> OperatorMatrix {
        self.scale(rhs)
    }
}

impl Add<&OperatorMatrix> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions differ");
        OperatorMatrix { mat: &self.mat + &rhs.mat, space: self.space.clone() }
    }
}

impl Sub<&OperatorMatrix> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions differ");
        OperatorMatrix { mat: &self.mat - &rhs.mat, space: self.space.clone() }
    }
}

impl Neg for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        OperatorMatrix { mat: -&self.mat, space: self.space.clone() }
    }
}

pub fn kron(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    a.kron(b)
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, zero when both vanish.
pub fn rel_diff(a: &OperatorMatrix, b: &OperatorMatrix) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

pub fn rel_diff_scalar(a: C64, b: C64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

/// Pauli matrices on C².
pub fn sigma_z() -> OperatorMatrix {
    OperatorMatrix::from_diagonal(&[C64::one(), -C64::one()])
}

pub fn sigma_y() -> OperatorMatrix {
    let i = C64::i();
    OperatorMatrix::from_row_slice(2, &[C64::zero(), -i, i, C64::zero()])
}

#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<C64>,
    pub vectors: OperatorMatrix,
    /// 2-norm condition number of the eigenvector matrix.
    pub cond: f64,
}

impl Eigen {
    pub fn is_ill_conditioned(&self) -> bool {
        !(self.cond <= ILL_CONDITIONED)
    }

    /// `‖AV − VΛ‖_F / ‖A‖_F`.
    pub fn backward_error(&self, a: &OperatorMatrix) -> f64 {
        let v = self.vectors.matrix();
        let mut vl = v.clone();
        for (j, lam) in self.values.iter().enumerate() {
            let col = v.column(j) * *lam;
            vl.set_column(j, &col);
        }
        let r = (a.matrix() * v - vl).norm();
        let n = a.norm();
        if n == 0.0 {
            r
        } else {
            r / n
        }
    }
}

/// Eigen-decomposition of a general square complex matrix.
///
/// Eigenvalues come from the complex Schur form `A = Q T Q†`; eigenvectors
/// from back-substitution on `T`. Defective or nearly defective inputs do not
/// fail: they show up as a large `cond`.
pub fn eig(a: &OperatorMatrix) -> Result<Eigen> {
    let n = a.dim();
    let schur = Schur::try_new(a.matrix().clone(), f64::EPSILON, 10_000).ok_or(Error::EigenNoConvergence)?;
    let (q, t) = schur.unpack();
    let tnorm = t.norm();
    let smin = (f64::EPSILON * tnorm).max(f64::MIN_POSITIVE);
    let mut y = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        let lam = t[(k, k)];
        y[(k, k)] = C64::one();
        for i in (0..k).rev() {
            let mut s = C64::zero();
            for m in i + 1..=k {
                s += t[(i, m)] * y[(m, k)];
            }
            let mut den = t[(i, i)] - lam;
            if den.norm() < smin {
                den = C64::new(smin, 0.0);
            }
            y[(i, k)] = -s / den;
        }
    }
    let mut v = q * y;
    for mut col in v.column_iter_mut() {
        let nrm = col.norm();
        if nrm > 0.0 && nrm.is_finite() {
            col.unscale_mut(nrm);
        }
    }
    let values: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let cond = if v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        let sv = v.clone().svd(false, false).singular_values;
        let (mx, mn) = sv.iter().fold((0.0f64, f64::INFINITY), |(mx, mn), &s| (mx.max(s), mn.min(s)));
        if mn == 0.0 {
            f64::INFINITY
        } else {
            mx / mn
        }
    } else {
        f64::INFINITY
    };
    Ok(Eigen { values, vectors: OperatorMatrix { mat: v, space: a.space.clone() }, cond })
}

/// Finite Laurent polynomial `Σ_k c_k e^{s k u}` for `k = min_deg..=max_deg`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentCurve {
    step: u32,
    min_deg: i32,
    coeffs: Vec<C64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LaurentShape {
    pub step: u32,
    pub min_deg: i32,
    pub max_deg: i32,
}

impl LaurentShape {
    pub fn new(step: u32, min_deg: i32, max_deg: i32) -> Self {
        assert!(step > 0 && max_deg >= min_deg, "invalid Laurent shape");
        Self { step, min_deg, max_deg }
    }

    /// Degrees `−d..=d`.
    pub fn symmetric(step: u32, d: i32) -> Self {
        Self::new(step, -d, d)
    }

    pub fn len(&self) -> usize {
        (self.max_deg - self.min_deg + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl LaurentCurve {
    pub fn new(step: u32, min_deg: i32, coeffs: Vec<C64>) -> Result<Self> {
        if step == 0 || coeffs.is_empty() {
            return Err(Error::InvalidParameter("Laurent curve needs step > 0 and at least one coefficient".into()));
        }
        Ok(Self { step, min_deg, coeffs })
    }

    pub fn step(&self) -> u32 {
        self.step
    }

    pub fn min_deg(&self) -> i32 {
        self.min_deg
    }

    pub fn max_deg(&self) -> i32 {
        self.min_deg + self.coeffs.len() as i32 - 1
    }

    pub fn shape(&self) -> LaurentShape {
        LaurentShape::new(self.step, self.min_deg, self.max_deg())
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Coefficient of `e^{s k u}`; zero outside the stored range.
    pub fn coeff(&self, k: i32) -> C64 {
        if k < self.min_deg || k > self.max_deg() {
            C64::zero()
        } else {
            self.coeffs[(k - self.min_deg) as usize]
        }
    }

    pub fn leading(&self) -> C64 {
        *self.coeffs.last().unwrap()
    }

    pub fn trailing(&self) -> C64 {
        self.coeffs[0]
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn eval(&self, u: C64) -> C64 {
        let z = (u * self.step as f64).exp();
        let mut acc = C64::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc * z.powi(self.min_deg)
    }

    /// `(exponent n, c)` pairs with the term written as `c e^{n u}`.
    pub fn terms(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        let s = self.step as i64;
        self.coeffs.iter().enumerate().map(move |(i, &c)| ((self.min_deg as i64 + i as i64) * s, c))
    }

    /// Coefficient of `e^{n u}` for an exponent `n`.
    pub fn coeff_of_exponent(&self, n: i64) -> C64 {
        let s = self.step as i64;
        if n % s != 0 {
            C64::zero()
        } else {
            self.coeff((n / s) as i32)
        }
    }

    /// Coefficient-wise comparison after aligning steps, relative to the
    /// largest coefficient magnitude of either curve.
    pub fn rel_distance(&self, other: &LaurentCurve) -> f64 {
        let mut exps: Vec<i64> = self.terms().map(|t| t.0).chain(other.terms().map(|t| t.0)).collect();
        exps.sort_unstable();
        exps.dedup();
        let scale = self.max_abs_coeff().max(other.max_abs_coeff());
        let worst =
            exps.iter().map(|&n| (self.coeff_of_exponent(n) - other.coeff_of_exponent(n)).norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    pub fn approx_eq(&self, other: &LaurentCurve, rel_tol: f64) -> bool {
        self.rel_distance(other) <= rel_tol
    }

    /// Largest coefficient magnitude outside `min..=max`, relative to the
    /// largest overall.
    pub fn excess_outside(&self, min: i32, max: i32) -> f64 {
        let scale = self.max_abs_coeff();
        let worst = (self.min_deg..=self.max_deg())
            .filter(|k| *k < min || *k > max)
            .map(|k| self.coeff(k).norm())
            .fold(0.0, f64::max);
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self { step: self.step, min_deg: self.min_deg, coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    /// Averages the coefficients of `k` and `−k`; for a curve with
    /// `min_deg = −max_deg`.
    pub fn symmetrized(&self) -> Self {
        let n = self.coeffs.len();
        let coeffs = (0..n).map(|i| (self.coeffs[i] + self.coeffs[n - 1 - i]) * 0.5).collect();
        Self { step: self.step, min_deg: self.min_deg, coeffs }
    }
}

#[derive(Clone, Debug)]
pub struct LaurentFit {
    pub curve: LaurentCurve,
    /// Max deviation at the fitted samples, relative to the largest sample.
    pub fit_residual: f64,
    /// Max deviation at held-out samples, relative to the largest sample.
    pub held_out_residual: f64,
}

/// Singular values below this fraction of the largest count as rank loss.
const RANK_TOL: f64 = 1e-13;

/// Least-squares fit of one Laurent shape to several value channels sampled
/// at the same points. `fit_vals[c][i]` is channel `c` at `fit_u[i]`.
///
/// Errors if any channel's held-out residual exceeds `tol`.
pub fn laurent_fit_channels(
    fit_u: &[C64],
    fit_vals: &[Vec<C64>],
    held_u: &[C64],
    held_vals: &[Vec<C64>],
    shape: LaurentShape,
    tol: f64,
) -> Result<Vec<LaurentFit>> {
    let n = shape.len();
    if fit_u.len() < n {
        return Err(Error::TooFewSamples { need: n, got: fit_u.len() });
    }
    let rows = fit_u.len();
    let mut a = DMatrix::<C64>::zeros(rows, n);
    for (i, &u) in fit_u.iter().enumerate() {
        let z = (u * shape.step as f64).exp();
        let mut p = z.powi(shape.min_deg);
        for k in 0..n {
            a[(i, k)] = p;
            p *= z;
        }
    }
    let col_scale: Vec<f64> = (0..n).map(|k| a.column(k).norm()).collect();
    for (k, s) in col_scale.iter().enumerate() {
        if *s > 0.0 {
            a.column_mut(k).unscale_mut(*s);
        }
    }
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    if !(smin > RANK_TOL * smax) {
        return Err(Error::RankDeficient(if smax > 0.0 { smin / smax } else { 0.0 }));
    }
    let mut out = Vec::with_capacity(fit_vals.len());
    for (c, vals) in fit_vals.iter().enumerate() {
        let b = DVector::from_column_slice(vals);
        let x = svd.solve(&b, 0.0).map_err(|_| Error::RankDeficient(smin / smax))?;
        let coeffs: Vec<C64> =
            (0..n).map(|k| if col_scale[k] > 0.0 { x[k] / col_scale[k] } else { C64::zero() }).collect();
        let curve = LaurentCurve { step: shape.step, min_deg: shape.min_deg, coeffs };
        let held = held_vals.get(c).map(|v| v.as_slice()).unwrap_or(&[]);
        let scale = vals.iter().chain(held.iter()).fold(0.0f64, |m, y| m.max(y.norm()));
        let dev =
            |us: &[C64], ys: &[C64]| us.iter().zip(ys).map(|(&u, &y)| (curve.eval(u) - y).norm()).fold(0.0, f64::max);
        let norm = |r: f64| if scale == 0.0 { r } else { r / scale };
        let fit_residual = norm(dev(fit_u, vals));
        let held_out_residual = if held_u.is_empty() { fit_residual } else { norm(dev(held_u, held)) };
        if !(held_out_residual <= tol) {
            return Err(Error::ShapeMismatch(held_out_residual));
        }
        out.push(LaurentFit { curve, fit_residual, held_out_residual });
    }
    Ok(out)
}

/// Least-squares Laurent fit of `(u, value)` samples, checked on `held_out`.
pub fn laurent_fit(
    samples: &[(C64, C64)],
    held_out: &[(C64, C64)],
    shape: LaurentShape,
    tol: f64,
) -> Result<LaurentFit> {
    let fu: Vec<C64> = samples.iter().map(|s| s.0).collect();
    let fv: Vec<C64> = samples.iter().map(|s| s.1).collect();
    let hu: Vec<C64> = held_out.iter().map(|s| s.0).collect();
    let hv: Vec<C64> = held_out.iter().map(|s| s.1).collect();
    let mut fits = laurent_fit_channels(&fu, &[fv], &hu, &[hv], shape, tol)?;
    Ok(fits.remove(0))
}

/// `n` points on the circle `|e^{s u}| = e^{s x}`, equally spaced in phase
/// and rotated by `phase`. Vandermonde systems on such points are as well
/// conditioned as a discrete Fourier transform.
pub fn circle_points(n: usize, step: u32, x: f64, phase: f64) -> Vec<C64> {
    let s = step as f64;
    (0..n).map(|m| C64::new(x, (2.0 * core::f64::consts::PI * m as f64 / n as f64 + phase) / s)).collect()
}

/// Evaluates `Σ c_k x^k` (ascending coefficients).
pub fn poly_eval(coeffs: &[C64], x: C64) -> C64 {
    coeffs.iter().rev().fold(C64::zero(), |acc, c| acc * x + c)
}

fn poly_derivative(coeffs: &[C64]) -> Vec<C64> {
    coeffs.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect()
}

/// Ascending coefficients of `lead · ∏ (x − r)`.
pub fn poly_from_roots(roots: &[C64], lead: C64) -> Vec<C64> {
    let mut c = vec![lead];
    for r in roots {
        let mut next = vec![C64::zero(); c.len() + 1];
        for (k, ck) in c.iter().enumerate() {
            next[k + 1] += ck;
            next[k] -= ck * r;
        }
        c = next;
    }
    c
}

/// Synthetic division by `(x − r)`; returns quotient and remainder.
pub fn poly_deflate(coeffs: &[C64], r: C64) -> (Vec<C64>, C64) {
    let n = coeffs.len() - 1;
    let mut q = vec![C64::zero(); n];
    let mut acc = C64::zero();
    for k in (0..=n).rev() {
        acc = acc * r + coeffs[k];
        if k > 0 {
            q[k - 1] = acc;
        }
    }
    (q, acc)
}

/// All complex roots of `Σ c_k x^k` (ascending coefficients) via the
/// companion matrix, each polished by a few Newton steps.
pub fn poly_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    if coeffs.len() < 2 {
        return Err(Error::DegreeZero);
    }
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    if lead == C64::zero() {
        return Err(Error::LeadingZero);
    }
    let mut comp = DMatrix::<C64>::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = C64::one();
    }
    for i in 0..n {
        comp[(i, n - 1)] = -coeffs[i] / lead;
    }
    let schur = Schur::try_new(comp, f64::EPSILON, 10_000).ok_or(Error::EigenNoConvergence)?;
    let t = schur.unpack().1;
    let deriv = poly_derivative(coeffs);
    let roots = (0..n)
        .map(|i| {
            let mut x = t[(i, i)];
            let mut fx = poly_eval(coeffs, x).norm();
            for _ in 0..4 {
                let d = poly_eval(&deriv, x);
                if d == C64::zero() {
                    break;
                }
                let cand = x - poly_eval(coeffs, x) / d;
                let fc = poly_eval(coeffs, cand).norm();
                if fc < fx {
                    x = cand;
                    fx = fc;
                } else {
                    break;
                }
            }
            x
        })
        .collect();
    Ok(roots)
}

/// Max coefficient deviation between `coeffs` and the re-expansion of
/// `roots`, relative to the largest coefficient.
pub fn reexpansion_residual(coeffs: &[C64], roots: &[C64]) -> f64 {
    let lead = *coeffs.last().unwrap();
    let rebuilt = poly_from_roots(roots, lead);
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let worst = coeffs.iter().zip(&rebuilt).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    worst / scale
}
