//! Spectral computations for three identical bosons on the cubic lattice ℤ³
//! whose two-body subsystem has a zero-energy resonance.
//!
//! The crate is organized bottom-up:
//!
//! * [`torus`]: grids on (−π,π]³ and the kinetic symbols;
//! * [`potential`]: finitely supported pair potentials and their kernels;
//! * [`two_body`]: h(k), the Birman–Schwinger operator G(k,z), resonance
//!   calibration, the bound-state dispersion z(k) and the small-k expansions;
//! * [`three_body`]: the essential-spectrum bottom τ(K), exact counting on tiny
//!   grids, and the reduced radial operator whose counts grow like
//!   (λ₀/2π)|log ρ|;
//! * [`model`]: the constant λ₀, the partial-wave symbols, the counting
//!   functional U(μ) and the finite-interval operator S(r).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fit;
pub mod greens;
pub mod linalg;
pub mod model;
pub mod potential;
pub mod quadrature;
pub mod roots;
pub mod special;
pub mod three_body;
pub mod torus;
pub mod two_body;

pub use error::{Error, Result};
pub use linalg::KernelOperator;
pub use model::CountingCurve;
pub use potential::{LatticePotential, PotentialSpec};
pub use torus::{SpectralPoint, TorusGrid, Vec3};
pub use two_body::ResonanceCalibration;
