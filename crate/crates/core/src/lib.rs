//! Numerical lab for Riemannian random waves: Euclidean limit kernels,
//! spectral bases on tori and the round sphere, Gaussian wave ensembles and
//! their local rescalings, nodal geometry, and the statistics comparing
//! finite-`λ` fields with their limits.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod kernels;
pub mod manifolds;
pub mod nodal;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod stats;
pub mod wavefields;

pub use error::{Result, RrwError};
