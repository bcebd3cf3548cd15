//! Six-vertex R-matrix, symmetrizers, boundary K-matrices and their fused
//! versions.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::tensorkit::{sigma_z, OperatorMatrix};
use crate::weyl_model::random_complex;
use crate::C64;

/// `(α, β, θ)` of one K-matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KParams {
    pub alpha: C64,
    pub beta: C64,
    pub theta: C64,
}

impl KParams {
    pub fn scaled(&self, k: f64) -> Self {
        Self { alpha: self.alpha * k, beta: self.beta * k, theta: self.theta * k }
    }
}

/// Free parameters of both boundaries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryParams {
    pub alpha_minus: C64,
    pub beta_minus: C64,
    pub theta_minus: C64,
    pub alpha_plus: C64,
    pub beta_plus: C64,
    pub theta_plus: C64,
}

impl BoundaryParams {
    /// Moduli in `[0.25, 1]`, uniform phases.
    pub fn sample<R: Rng>(rng: &mut R) -> Self {
        let mut z = [C64::zero(); 6];
        for v in z.iter_mut() {
            *v = random_complex(rng, 0.25, 1.0);
        }
        Self {
            alpha_minus: z[0],
            beta_minus: z[1],
            theta_minus: z[2],
            alpha_plus: z[3],
            beta_plus: z[4],
            theta_plus: z[5],
        }
    }

    pub fn all(&self) -> [C64; 6] {
        [self.alpha_minus, self.beta_minus, self.theta_minus, self.alpha_plus, self.beta_plus, self.theta_plus]
    }

    /// Generic position: `sinh α∓` and `cosh β∓` away from zero.
    pub fn validate(&self) -> Result<()> {
        if self.all().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("boundary parameters must be finite".into()));
        }
        let small = [self.alpha_minus.sinh(), self.alpha_plus.sinh(), self.beta_minus.cosh(), self.beta_plus.cosh()]
            .iter()
            .any(|z| z.norm() < 1e-8);
        if small {
            return Err(Error::InvalidParameter("boundary parameters not in generic position".into()));
        }
        Ok(())
    }

    pub fn minus(&self) -> KParams {
        KParams { alpha: self.alpha_minus, beta: self.beta_minus, theta: self.theta_minus }
    }

    /// `(−α₊, −β₊, θ₊)`: the parameters fed to the K⁻ form to obtain K⁺.
    pub fn plus_mapped(&self) -> KParams {
        KParams { alpha: -self.alpha_plus, beta: -self.beta_plus, theta: self.theta_plus }
    }

    /// `α₊ + β₊ + α₋ + β₋`.
    pub fn s_total(&self) -> C64 {
        self.alpha_plus + self.beta_plus + self.alpha_minus + self.beta_minus
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Minus,
    Plus,
}

/// `K(u)` of the K⁻ form for parameters `kp`, as a 2×2 scalar array.
pub fn k_entries(u: C64, kp: KParams) -> [[C64; 2]; 2] {
    let (sa, ca) = (kp.alpha.sinh(), kp.alpha.cosh());
    let (sb, cb) = (kp.beta.sinh(), kp.beta.cosh());
    let (ch, sh) = (u.cosh(), u.sinh());
    let s2 = (u * 2.0).sinh();
    [
        [(sa * cb * ch + ca * sb * sh) * 2.0, kp.theta.exp() * s2],
        [(-kp.theta).exp() * s2, (sa * cb * ch - ca * sb * sh) * 2.0],
    ]
}

pub fn mat2_op(m: [[C64; 2]; 2]) -> OperatorMatrix {
    OperatorMatrix::from_row_slice(2, &[m[0][0], m[0][1], m[1][0], m[1][1]])
}

pub fn k_matrix(u: C64, kp: KParams) -> OperatorMatrix {
    mat2_op(k_entries(u, kp))
}

pub fn k_minus(u: C64, bp: &BoundaryParams) -> OperatorMatrix {
    k_matrix(u, bp.minus())
}

/// `K⁺(u) = K⁻(−u−η)` with `(α₋, β₋, θ₋) → (−α₊, −β₊, θ₊)`.
pub fn k_plus(u: C64, bp: &BoundaryParams, eta: C64) -> OperatorMatrix {
    k_matrix(-u - eta, bp.plus_mapped())
}

pub fn k_side(side: Side, u: C64, bp: &BoundaryParams, eta: C64) -> OperatorMatrix {
    match side {
        Side::Minus => k_minus(u, bp),
        Side::Plus => k_plus(u, bp, eta),
    }
}

/// Six-vertex R-matrix in the basis `↑↑, ↑↓, ↓↑, ↓↓`, on space `[2, 2]`.
pub fn r_matrix(u: C64, eta: C64) -> OperatorMatrix {
    let a = (u + eta).sinh();
    let b = u.sinh();
    let c = eta.sinh();
    let z = C64::zero();
    OperatorMatrix::from_row_slice(4, &[a, z, z, z, z, b, c, z, z, c, b, z, z, z, z, a])
        .with_space(vec![2, 2])
        .expect("4 = 2 x 2")
}

/// Operator on `(C²)^{⊗m}` sending factor `i` to factor `perm[i]`.
pub fn permutation_operator(perm: &[usize]) -> OperatorMatrix {
    let m = perm.len();
    let d = 1usize << m;
    let mut mat = DMatrix::<C64>::zeros(d, d);
    for a in 0..d {
        let mut b = 0;
        for (i, &pi) in perm.iter().enumerate() {
            let bit = (a >> (m - 1 - i)) & 1;
            b |= bit << (m - 1 - pi);
        }
        mat[(b, a)] = C64::one();
    }
    OperatorMatrix::new(mat, vec![2; m]).expect("dimension 2^m")
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(m - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, m - 1);
            out.push(q);
        }
    }
    out
}

/// `P⁽⁺⁾ = (1/m!) Σ_σ P_σ` on `(C²)^{⊗m}`.
pub fn projector_sym(m: usize) -> OperatorMatrix {
    assert!(m >= 1, "projector needs m >= 1");
    let perms = permutations(m);
    let n = perms.len() as f64;
    let mut acc = OperatorMatrix::zeros(&vec![2; m]);
    for p in &perms {
        acc = &acc + &permutation_operator(p);
    }
    acc.scale(C64::new(1.0 / n, 0.0))
}

/// `P⁽⁻⁾ = (1 − P₁₂)/2` on `C² ⊗ C²`.
pub fn projector_antisym2() -> OperatorMatrix {
    let id = OperatorMatrix::identity(&[2, 2]);
    (&id - &permutation_operator(&[1, 0])).scale(C64::new(0.5, 0.0))
}

/// Orthonormal basis of the symmetric subspace of `(C²)^{⊗m}` as columns,
/// ordered by the number of down spins `0..=m` (`↑` is index 0).
pub fn symmetric_basis(m: usize) -> DMatrix<C64> {
    let d = 1usize << m;
    let mut b = DMatrix::<C64>::zeros(d, m + 1);
    for k in 0..=m {
        let states: Vec<usize> = (0..d).filter(|s| s.count_ones() as usize == k).collect();
        let w = 1.0 / (states.len() as f64).sqrt();
        for s in states {
            b[(s, k)] = C64::new(w, 0.0);
        }
    }
    b
}

/// Blocks of `op` (space `[2; m] ++ rest`) between symmetric basis states:
/// entry `[a][b]` is `⟨s_a| op |s_b⟩` as an operator on `rest`.
pub fn symmetric_blocks(op: &OperatorMatrix, m: usize) -> Vec<Vec<OperatorMatrix>> {
    let rest: Vec<usize> = op.space()[m..].to_vec();
    let rest = if rest.is_empty() { vec![1] } else { rest };
    let dq: usize = rest.iter().product();
    let sb = symmetric_basis(m);
    let b = sb.kronecker(&DMatrix::<C64>::identity(dq, dq));
    let r = op.restrict(&b);
    (0..=m)
        .map(|i| {
            (0..=m)
                .map(|j| OperatorMatrix::new(r.view((i * dq, j * dq), (dq, dq)).into_owned(), rest.clone()).unwrap())
                .collect()
        })
        .collect()
}

/// Similarity relating the middle spin-(p/2) block to the spin-½ objects.
/// For `p = 3` the q-number factor is trivial and it reduces to `σᶻ`.
pub fn middle_similarity(p: usize) -> Result<OperatorMatrix> {
    if p == 3 {
        Ok(sigma_z())
    } else {
        Err(Error::InvalidParameter("middle-block similarity is only provided for p = 3".into()))
    }
}

/// Ordered fusion product for `K` factors given by `kfun`, projected on both
/// sides:
/// `P ∏_{k=1}^{2j} [∏_{l<k} R_{lk}(2u+(k+l−2j−1)η)] K_k(u+(k−j−½)η) P`.
pub fn fused_k_product(two_j: usize, u: C64, eta: C64, kfun: impl Fn(C64) -> OperatorMatrix) -> OperatorMatrix {
    assert!(two_j >= 1, "fused K needs 2j >= 1");
    let m = two_j;
    let space = vec![2; m];
    let mut r = OperatorMatrix::identity(&space);
    for k in 1..=m {
        for l in 1..k {
            let shift = (k + l) as f64 - m as f64 - 1.0;
            let rkl = r_matrix(u * 2.0 + eta * shift, eta).embed(&[l - 1, k - 1], &space).unwrap();
            r = &r * &rkl;
        }
        let shift = (2 * k) as f64 - m as f64 - 1.0;
        let kk = kfun(u + eta * (shift / 2.0)).embed(&[k - 1], &space).unwrap();
        r = &r * &kk;
    }
    if m == 1 {
        return r;
    }
    let p = projector_sym(m);
    &(&p * &r) * &p
}

pub fn fused_k_minus(two_j: usize, u: C64, bp: &BoundaryParams, eta: C64) -> OperatorMatrix {
    let kp = bp.minus();
    fused_k_product(two_j, u, eta, |x| k_matrix(x, kp))
}

fn rho(x: C64, eta: C64) -> C64 {
    (x - eta).sinh() * (x + eta).sinh()
}

/// Factors `−ρ(2u+(l+k+1−2j)η)` of `f^{(j)}(u)` with their `(l, k)` labels.
fn f_factors(two_j: usize, u: C64, eta: C64) -> impl Iterator<Item = (usize, usize, C64)> {
    (1..two_j).flat_map(move |l| {
        (1..=l).map(move |k| {
            let shift = (l + k + 1) as f64 - two_j as f64;
            (l, k, -rho(u * 2.0 + eta * shift, eta))
        })
    })
}

/// `f^{(j)}(u) = ∏_{l=1}^{2j−1} ∏_{k=1}^{l} [−ρ(2u+(l+k+1−2j)η)]`.
pub fn f_normalization(two_j: usize, u: C64, eta: C64) -> C64 {
    f_factors(two_j, u, eta).fold(C64::one(), |acc, (_, _, f)| acc * f)
}

/// Relative size below which a normalization factor counts as a pole.
const POLE_TOL: f64 = 1e-10;

/// Fused `K⁺⁽ʲ⁾(u)`: the fusion product at `−u−η` with mapped parameters,
/// divided by `f^{(j)}(u)`.
pub fn fused_k_plus(two_j: usize, u: C64, bp: &BoundaryParams, eta: C64) -> Result<OperatorMatrix> {
    for (l, k, f) in f_factors(two_j, u, eta) {
        if f.norm() < POLE_TOL {
            return Err(Error::NormalizationPole { l, k, u });
        }
    }
    let kp = bp.plus_mapped();
    let prod = fused_k_product(two_j, -u - eta, eta, |x| k_matrix(x, kp));
    Ok(prod.scale(C64::one() / f_normalization(two_j, u, eta)))
}

/// `μ(u) = ∏_{l=1}^{p−1} ∏_{k=1}^{l} sinh(2u+(l+k−p+1)η)`, the scalar
/// carried by the spin-p/2 fused K⁻ in the symmetric basis.
pub fn mu_normalization(p: usize, u: C64, eta: C64) -> C64 {
    let mut acc = C64::one();
    for l in 1..p {
        for k in 1..=l {
            let shift = (l + k + 1) as f64 - p as f64;
            acc *= (u * 2.0 + eta * shift).sinh();
        }
    }
    acc
}

/// `𝒦(u)`: the `{|↑…↑⟩, |↓…↓⟩}` block of the spin-p/2 fused K, without the
/// `μ` scalar. For the minus side it equals `(½)^{p−1} K⁻(pu)` with
/// `(α, β, θ)` scaled by `p`; the plus side is the same at `−u−η` with the
/// mapped parameters.
pub fn fused_k_top(side: Side, p: usize, u: C64, bp: &BoundaryParams, eta: C64) -> [[C64; 2]; 2] {
    let (x, kp) = match side {
        Side::Minus => (u, bp.minus()),
        Side::Plus => (-u - eta, bp.plus_mapped()),
    };
    let k = k_entries(x * p as f64, kp.scaled(p as f64));
    let c = 0.5f64.powi(p as i32 - 1);
    [[k[0][0] * c, k[0][1] * c], [k[1][0] * c, k[1][1] * c]]
}

/// Closed-form spin-3/2 fused K-matrix blocks at `p = 3`.
#[derive(Clone, Debug)]
pub struct FusedKClosed {
    pub k11: C64,
    pub k12: C64,
    pub k21: C64,
    pub k22: C64,
    /// Block on `(sym|↑↑↓⟩, sym|↑↓↓⟩)`.
    pub k33: OperatorMatrix,
    /// Overall scalar: `μ(u)` for the minus side, `1/μ(u)` for the plus side.
    pub scale: C64,
}

/// Spin-3/2 blocks written out as cubic polynomials in
/// `S = 2 sinh α cosh β` and `C = 2 cosh α sinh β`.
pub fn fused_k_closed_p3(side: Side, u: C64, bp: &BoundaryParams) -> FusedKClosed {
    let eta = C64::new(0.0, 2.0 * core::f64::consts::PI / 3.0);
    let (a, b, th) = match side {
        Side::Minus => (bp.alpha_minus, bp.beta_minus, bp.theta_minus),
        Side::Plus => (bp.alpha_plus, bp.beta_plus, bp.theta_plus),
    };
    let s = a.sinh() * b.cosh() * 2.0;
    let c = a.cosh() * b.sinh() * 2.0;
    let (c3, s3, s6) = ((u * 3.0).cosh(), (u * 3.0).sinh(), (u * 6.0).sinh());
    let even = (s * s * s + s * c * c * 3.0 + s * 3.0) * c3;
    let odd = (s * s * c * 3.0 + c * c * c + c * 3.0) * s3;
    let q = C64::new(0.25, 0.0);
    let mu = mu_normalization(3, u, eta);
    match side {
        Side::Minus => {
            let dk = det_q_k(Side::Minus, u - eta, bp, eta) / (u * 2.0 - eta).sinh();
            let sz = sigma_z();
            FusedKClosed {
                k11: q * (even + odd),
                k22: q * (even - odd),
                k12: q * (th * 3.0).exp() * s6,
                k21: q * (-th * 3.0).exp() * s6,
                k33: (&(&sz * &k_minus(u, bp)) * &sz).scale(dk),
                scale: mu,
            }
        }
        Side::Plus => {
            let dk = -det_q_k(Side::Plus, u - eta, bp, eta) / (u * 2.0).sinh();
            let sz = sigma_z();
            FusedKClosed {
                k11: q * (-even + odd),
                k22: -q * (even + odd),
                k12: -q * (th * 3.0).exp() * s6,
                k21: -q * (-th * 3.0).exp() * s6,
                k33: (&(&sz * &k_plus(u, bp, eta)) * &sz).scale(dk),
                scale: C64::one() / mu,
            }
        }
    }
}

/// Closed-form quantum determinants of `K⁻` and `K⁺`.
pub fn det_q_k(side: Side, u: C64, bp: &BoundaryParams, eta: C64) -> C64 {
    let (a, b, sign, shift) = match side {
        Side::Minus => (bp.alpha_minus, bp.beta_minus, -4.0, -eta * 2.0),
        Side::Plus => (bp.alpha_plus, bp.beta_plus, 4.0, eta * 2.0),
    };
    (u * 2.0 + shift).sinh() * (u + a).sinh() * (u - a).sinh() * (u + b).cosh() * (u - b).cosh() * sign
}

/// Quantum determinant from its trace definition:
/// `tr₁₂{P⁻ K⁻₁(u) R₁₂(2u−η) K⁻₂(u−η)}` and
/// `tr₁₂{P⁻ K⁺₁(u) R₁₂(−2u−η) K⁺₂(u−η)}`.
pub fn det_q_k_trace(side: Side, u: C64, bp: &BoundaryParams, eta: C64) -> C64 {
    let space = [2, 2];
    let k1 = k_side(side, u, bp, eta).embed(&[0], &space).unwrap();
    let k2 = k_side(side, u - eta, bp, eta).embed(&[1], &space).unwrap();
    let r = match side {
        Side::Minus => r_matrix(u * 2.0 - eta, eta),
        Side::Plus => r_matrix(-u * 2.0 - eta, eta),
    };
    (&(&(&projector_antisym2() * &k1) * &r) * &k2).trace()
}

/// `P R_{1,23}(u) P`: spin-1/2 on factor 1 against spin 1 fused from
/// factors 2, 3.
pub fn r_half_one(u: C64, e: C64) -> OperatorMatrix {
    let sp = [2, 2, 2];
    let p = OperatorMatrix::identity(&[2]).kron(&projector_sym(2));
    let r12 = r_matrix(u - e * 0.5, e).embed(&[0, 1], &sp).expect("fixed layout");
    let r13 = r_matrix(u + e * 0.5, e).embed(&[0, 2], &sp).expect("fixed layout");
    &(&(&p * &r12) * &r13) * &p
}

/// Splits a spin-`p/2` operator in the symmetric basis into the block on
/// `(|↑…↑⟩, |↓…↓⟩)`, the size of the block coupling those two states to the
/// middle states (relative to the top rows), and the middle block.
pub fn fused_top_and_mid(op: &OperatorMatrix, p: usize) -> ([[C64; 2]; 2], f64, OperatorMatrix) {
    let bl = symmetric_blocks(op, p);
    let top = [0, p];
    let mid: Vec<usize> = (1..p).collect();
    let t = [[bl[0][0].entry(0, 0), bl[0][p].entry(0, 0)], [bl[p][0].entry(0, 0), bl[p][p].entry(0, 0)]];
    let mut ur = 0.0f64;
    let mut scale = 0.0f64;
    for &i in &top {
        for j in 0..=p {
            scale = scale.max(bl[i][j].entry(0, 0).norm());
        }
        for &j in &mid {
            ur = ur.max(bl[i][j].entry(0, 0).norm());
        }
    }
    let mut m = Vec::new();
    for &i in &mid {
        for &j in &mid {
            m.push(bl[i][j].entry(0, 0));
        }
    }
    (t, ur / scale, OperatorMatrix::from_row_slice(mid.len(), &m))
}
