//! Kernel-based sum-of-squares certificates for polynomials on the unit
//! sphere.
//!
//! The crate is `no_std` and only needs `alloc`. It covers sparse
//! homogeneous (matrix) polynomials, the Gegenbauer family in reproducing
//! normalization, generalized Toeplitz matrices and their spectra, the
//! convergence-rate quantities built from them, harmonic decomposition,
//! certificate construction and verification, and bipartite quantum
//! operators for the best-separable-state problem.
#![cfg_attr(not(test), no_std)]
// `!(x > y)` is used on purpose so that NaN takes the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod certificate;
pub mod error;
pub mod gegenbauer;
pub mod harmonic;
pub mod linalg;
pub mod poly;
pub mod quantum;
pub mod rho;
pub mod sphere;
pub mod toeplitz;

pub use error::{Error, Result};
pub use poly::{MatPoly, Poly, SpherePoint};
