//! Forward and inverse source problems for the subdiffusion equation
//! `D_t^ρ u + A u = f g(t)` with the non-local condition `u(0) = u(T)`.
//!
//! The operator `A` enters only through its eigensystem, so every problem is
//! solved mode by mode in coefficient space.

// input checks are written `!(x > 0.0)` on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod forward;
pub mod fraccalc;
pub mod inverse;
pub mod mlf;
pub mod quad;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
