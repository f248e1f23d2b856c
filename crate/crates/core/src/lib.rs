//! Perturbative invariant tori for chains of weakly coupled rotators.
//!
//! Two independent engines produce the Lindstedt coefficients `u^(k)`: a
//! direct Fourier recursion ([`lindstedt`]) and a sum over labelled plane
//! trees ([`trees`]). The remaining modules supply the small-divisor
//! arithmetic, resonant-cluster diagnostics, torus synthesis and the
//! symplectic integrator used to validate the result.

pub mod error;
pub mod fixtures;
pub mod lindstedt;
pub mod modes;
pub mod ode;
pub mod renorm;
pub mod smalldiv;
pub mod torus;
pub mod trees;

pub use error::{Error, Result};
pub use num_complex::Complex64;
