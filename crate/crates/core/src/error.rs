use alloc::string::String;

use crate::C64;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("p must be odd ≥ 3 (got {0})")]
    InvalidP(usize),
    #[error("a model needs at least one site")]
    NoSites,
    #[error("site index {index} out of range 1..={sites}")]
    SiteIndex { index: usize, sites: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("eigen-decomposition did not converge")]
    EigenNoConvergence,
    #[error("rank-deficient system (singular value ratio {0:.3e})")]
    RankDeficient(f64),
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("samples do not have the declared Laurent shape (held-out residual {0:.3e})")]
    ShapeMismatch(f64),
    #[error("polynomial has degree zero")]
    DegreeZero,
    #[error("leading coefficient is zero")]
    LeadingZero,
    #[error("{what} has a pole at u = {u}")]
    Pole { what: &'static str, u: C64 },
    #[error("normalization f^(j) vanishes at u = {u}: factor (l={l}, k={k})")]
    NormalizationPole { l: usize, k: usize, u: C64 },
    #[error("degenerate boundary: parameters lie on the constraint surface where c is undefined")]
    DegenerateBoundary,
    #[error("eigenvalues stay degenerate after {0} resamples")]
    PersistentDegeneracy(usize),
    #[error("off-diagonal leakage {0:.3e} above tolerance")]
    Leakage(f64),
    #[error("trace form is not proportional to the identity (deviation {0:.3e})")]
    NotScalar(f64),
    #[error("T-Q residual {residual:.3e} above tolerance for eigenvalue {index}")]
    TqResidual { index: usize, residual: f64 },
}
