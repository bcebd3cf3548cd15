//! Cyclic Weyl-algebra representation, site parameters and L-operators.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rk_matrices::BoundaryParams;
use crate::scalar_functions::ModelConstants;
use crate::tensorkit::OperatorMatrix;
use crate::C64;

/// Inhomogeneity parameters of one site.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SiteParams {
    pub d_plus: C64,
    pub d_minus: C64,
    pub f_plus: C64,
    pub f_minus: C64,
    pub g_plus: C64,
    pub g_minus: C64,
    pub h_plus: C64,
    pub h_minus: C64,
}

impl SiteParams {
    /// Fixes `h±` from the six free parameters so that
    /// `g⁻h⁻ = f⁻d⁺` and `g⁺h⁺ = f⁺d⁻`.
    pub fn from_free(d_plus: C64, d_minus: C64, f_plus: C64, f_minus: C64, g_plus: C64, g_minus: C64) -> Result<Self> {
        let free = [d_plus, d_minus, f_plus, f_minus, g_plus, g_minus];
        if free.iter().any(|z| z.norm() == 0.0) {
            return Err(Error::InvalidParameter("site parameters must be nonzero".into()));
        }
        Ok(Self {
            d_plus,
            d_minus,
            f_plus,
            f_minus,
            g_plus,
            g_minus,
            h_minus: f_minus * d_plus / g_minus,
            h_plus: f_plus * d_minus / g_plus,
        })
    }

    pub fn all(&self) -> [C64; 8] {
        [self.d_plus, self.d_minus, self.f_plus, self.f_minus, self.g_plus, self.g_minus, self.h_plus, self.h_minus]
    }

    /// `max(|g⁻h⁻ − f⁻d⁺|, |g⁺h⁺ − f⁺d⁻|)`.
    pub fn constraint_residual(&self) -> f64 {
        let r1 = (self.g_minus * self.h_minus - self.f_minus * self.d_plus).norm();
        let r2 = (self.g_plus * self.h_plus - self.f_plus * self.d_minus).norm();
        r1.max(r2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.all().iter().any(|z| !(z.norm() > 0.0) || !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("site parameters must be finite and nonzero".into()));
        }
        let scale = (self.f_minus * self.d_plus).norm().max((self.f_plus * self.d_minus).norm());
        if self.constraint_residual() > 1e-12 * scale.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "site constraint violated by {:.3e}",
                self.constraint_residual()
            )));
        }
        Ok(())
    }

    /// Draws `d±, f±, g±` with moduli in `[0.5, 2]` and uniform phases.
    pub fn sample<R: Rng>(rng: &mut R) -> Self {
        let mut z = [C64::zero(); 6];
        for v in z.iter_mut() {
            *v = random_complex(rng, 0.5, 2.0);
        }
        Self::from_free(z[0], z[1], z[2], z[3], z[4], z[5]).expect("moduli are bounded below")
    }
}

/// Random complex number with modulus uniform in `[lo, hi]` and uniform phase.
pub fn random_complex<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> C64 {
    let r = rng.random_range(lo..=hi);
    let ph = rng.random_range(0.0..2.0 * core::f64::consts::PI);
    C64::from_polar(r, ph)
}

/// Deterministic site parameters for a seed.
pub fn gen_site_params(seed: u64) -> SiteParams {
    SiteParams::sample(&mut ChaCha8Rng::seed_from_u64(seed))
}

/// One τ₂ instance: `p`, the sites and the boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    p: usize,
    eta: C64,
    q: C64,
    sites: Vec<SiteParams>,
    boundary: BoundaryParams,
    constants: ModelConstants,
}

pub fn check_p(p: usize) -> Result<()> {
    if p < 3 || p % 2 == 0 {
        Err(Error::InvalidP(p))
    } else {
        Ok(())
    }
}

impl ModelConfig {
    pub fn new(p: usize, sites: Vec<SiteParams>, boundary: BoundaryParams) -> Result<Self> {
        check_p(p)?;
        if sites.is_empty() {
            return Err(Error::NoSites);
        }
        for s in &sites {
            s.validate()?;
        }
        boundary.validate()?;
        let eta = C64::new(0.0, 2.0 * core::f64::consts::PI / p as f64);
        let q = (-eta).exp();
        let constants = ModelConstants::from_sites(&sites);
        Ok(Self { p, eta, q, sites, boundary, constants })
    }

    /// Random instance: `n` sites followed by the boundary, all from one
    /// seeded stream.
    pub fn generate(p: usize, n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sites = (0..n).map(|_| SiteParams::sample(&mut rng)).collect();
        let boundary = BoundaryParams::sample(&mut rng);
        Self::new(p, sites, boundary)
    }

    pub fn with_boundary(&self, boundary: BoundaryParams) -> Result<Self> {
        Self::new(self.p, self.sites.clone(), boundary)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn eta(&self) -> C64 {
        self.eta
    }

    pub fn q(&self) -> C64 {
        self.q
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[SiteParams] {
        &self.sites
    }

    pub fn boundary(&self) -> &BoundaryParams {
        &self.boundary
    }

    pub fn constants(&self) -> &ModelConstants {
        &self.constants
    }

    /// `p^N`.
    pub fn quantum_dim(&self) -> usize {
        self.p.pow(self.sites.len() as u32)
    }

    pub fn quantum_space(&self) -> Vec<usize> {
        vec![self.p; self.sites.len()]
    }

    /// `[2, p, …, p]`.
    pub fn aux_quantum_space(&self) -> Vec<usize> {
        let mut s = vec![2];
        s.extend(self.quantum_space());
        s
    }

    /// `|q^p − 1|`.
    pub fn root_of_unity_residual(&self) -> f64 {
        (self.q.powi(self.p as i32) - C64::one()).norm()
    }
}

/// `X = diag(q^m)` and the cyclic shift `Z|m⟩ = |m+1⟩`.
pub fn weyl_generators(p: usize) -> Result<(OperatorMatrix, OperatorMatrix)> {
    check_p(p)?;
    let q = C64::new(0.0, -2.0 * core::f64::consts::PI / p as f64).exp();
    let x = OperatorMatrix::from_diagonal(&(0..p).map(|m| q.powi(m as i32)).collect::<Vec<_>>());
    let mut z = vec![C64::zero(); p * p];
    for m in 0..p {
        z[((m + 1) % p) * p + m] = C64::one();
    }
    Ok((x, OperatorMatrix::from_row_slice(p, &z)))
}

/// Integer power by repeated multiplication.
pub fn op_pow(a: &OperatorMatrix, k: usize) -> OperatorMatrix {
    let mut r = OperatorMatrix::identity(a.space());
    for _ in 0..k {
        r = &r * a;
    }
    r
}

/// `op` on quantum site `n` (1-based), identity elsewhere.
pub fn embed_site(op: &OperatorMatrix, n: usize, cfg: &ModelConfig) -> Result<OperatorMatrix> {
    let sites = cfg.n_sites();
    if n == 0 || n > sites {
        return Err(Error::SiteIndex { index: n, sites });
    }
    op.embed(&[n - 1], &cfg.quantum_space())
}

/// `X_n, X_n^{-1}, Z_n, Z_n^{-1}` on the quantum space. Inverses are the
/// `(p−1)`-th powers.
fn site_generators(n: usize, cfg: &ModelConfig) -> Result<[OperatorMatrix; 4]> {
    let (x, z) = weyl_generators(cfg.p())?;
    let xi = op_pow(&x, cfg.p() - 1);
    let zi = op_pow(&z, cfg.p() - 1);
    Ok([embed_site(&x, n, cfg)?, embed_site(&xi, n, cfg)?, embed_site(&z, n, cfg)?, embed_site(&zi, n, cfg)?])
}

/// The four quantum-space blocks `A, B, C, D` of `L_n(u)`.
pub fn l_blocks(s: &SiteParams, n: usize, u: C64, cfg: &ModelConfig) -> Result<[OperatorMatrix; 4]> {
    let [x, xi, z, zi] = site_generators(n, cfg)?;
    let (e, ei) = (u.exp(), (-u).exp());
    let a = &x.scale(e * s.d_plus) + &xi.scale(ei * s.d_minus);
    let b = &(&xi.scale(s.g_plus) + &x.scale(s.g_minus)) * &z;
    let c = &(&xi.scale(s.h_plus) + &x.scale(s.h_minus)) * &zi;
    let d = &xi.scale(e * s.f_plus) + &x.scale(ei * s.f_minus);
    Ok([a, b, c, d])
}

/// `L_n(u)` on `C² ⊗ (C^p)^{⊗N}`.
pub fn l_operator(s: &SiteParams, n: usize, u: C64, cfg: &ModelConfig) -> Result<OperatorMatrix> {
    let [a, b, c, d] = l_blocks(s, n, u, cfg)?;
    Ok(OperatorMatrix::from_blocks(&[vec![a, b], vec![c, d]]))
}

/// `L̂_n(u) = [[D(−u−η), −B(−u−η)], [−C(−u−η), A(−u−η)]]`.
pub fn l_hat_operator(s: &SiteParams, n: usize, u: C64, cfg: &ModelConfig) -> Result<OperatorMatrix> {
    let [a, b, c, d] = l_blocks(s, n, -u - cfg.eta(), cfg)?;
    Ok(OperatorMatrix::from_blocks(&[vec![d, -&b], vec![-&c, a]]))
}

pub fn det_q_l(s: &SiteParams, u: C64, eta: C64) -> C64 {
    (u * 2.0 - eta).exp() * s.d_plus * s.f_plus + (-u * 2.0 + eta).exp() * s.d_minus * s.f_minus
        - eta.exp() * s.g_plus * s.h_minus
        - (-eta).exp() * s.g_minus * s.h_plus
}

pub fn det_q_l_hat(s: &SiteParams, u: C64, eta: C64) -> C64 {
    (-u * 2.0 - eta).exp() * s.d_plus * s.f_plus + (u * 2.0 + eta).exp() * s.d_minus * s.f_minus
        - eta.exp() * s.g_plus * s.h_minus
        - (-eta).exp() * s.g_minus * s.h_plus
}
