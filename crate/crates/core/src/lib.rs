//! Numerical core for the open quantum τ₂-model with non-diagonal boundaries.
//!
//! Everything here is built explicitly at desk scale: Weyl-algebra
//! L-operators, the six-vertex R-matrix, boundary K-matrices, double-row and
//! fused transfer matrices, the scalar functions entering the fusion
//! hierarchy and the inhomogeneous T-Q relation, and a solver that
//! reconstructs Q-polynomials and Bethe roots from exact spectra.
//!
//! Conventions shared by every module:
//!
//! - `η = 2iπ/p` with `p` odd, `q = e^{−η}`.
//! - Auxiliary tensor factors come first, quantum sites `1..N` follow in
//!   order.
//! - Half-integer spins are passed as `two_j = 2j`.

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod rk_matrices;
pub mod scalar_functions;
pub mod spectrum;
pub mod tensorkit;
pub mod tq_solver;
pub mod transfer;
pub mod weyl_model;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use rk_matrices::BoundaryParams;
pub use tensorkit::{LaurentCurve, OperatorMatrix};
pub use weyl_model::{ModelConfig, SiteParams};
