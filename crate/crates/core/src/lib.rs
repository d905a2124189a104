//! Numerical verification of concentration comparisons for heat equations
//! under Schwarz symmetrization.
//!
//! A Dirichlet problem `u_t - Lap u = f`, `u(0) = g` is solved on a flat,
//! conical or spherical domain `Omega`; the symmetrized problem with data
//! `f#`, `g#` is solved on the model ball of volume `|Omega| / theta`; and the
//! concentrations
//!
//! ```text
//! U(a, t) = (1/theta) int_0^{theta a} u*(s, t) ds,    V(a, t) = int_0^a v*(s, t) ds
//! ```
//!
//! are compared on a shared grid in `a`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod comparison;
pub mod domain;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod rearrangement;
pub mod scenario;
pub mod source;
pub mod special;
pub mod symmetrized;

pub use error::{Error, Result};
