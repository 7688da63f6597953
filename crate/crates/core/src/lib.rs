//! Numerical toolkit for the attenuated photoacoustic operator.
//!
//! The crate models acoustic attenuation through complex frequency-dependent
//! wavenumbers κ(ω), evaluates the free-space kernel of the attenuated wave
//! equation, assembles the Gram matrix of the time-integrated photoacoustic
//! operator on a spherical measurement geometry, and quantifies the
//! ill-posedness of the inverse problem through the decay of the resulting
//! eigenvalue spectra.
//!
//! Modules:
//! - [`attenuation`]: catalog of attenuation models, their holomorphic
//!   extensions, propagation speeds and strong/weak classification.
//! - [`wavekernel`]: the outgoing Helmholtz-type kernel, its exact
//!   directional derivatives and derivative/frequency-integral bounds.
//! - [`geometry`]: spherical measurement surface, interior voxel grid and
//!   bisection-plane circles.
//! - [`operator`]: forward operator matrix and Gram kernel assembly, both
//!   for strongly attenuating media (direct frequency quadrature) and for
//!   weakly attenuating media (closed-form split).
//! - [`spectra`]: Hermitian eigendecomposition and decay-law fitting.
//! - [`bounds`]: constructive eigenvalue upper bounds for integral
//!   operators with smooth kernels, verified against brute-force spectra.
//! - [`signals`]: spectral synthesis of time-domain pressure traces with
//!   causality and front-speed diagnostics.

// negated comparisons like !(x > 0.0) reject NaN on purpose; index loops
// in the matrix kernels mirror the (a, b) entry symmetry
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]
#![allow(clippy::type_complexity)]

pub mod attenuation;
pub mod bounds;
pub mod config;
pub mod error;
pub mod geometry;
pub mod matio;
pub mod operator;
mod quad;
pub mod signals;
pub mod spectra;
pub mod wavekernel;

pub use error::{Error, Result};

/// Library version string echoed into run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
