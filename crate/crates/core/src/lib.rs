//! Long-time asymptotics of the defocusing mKdV equation with step initial data.
//!
//! The solution of q_t − 6q²q_x + q_xxx = 0 with q(x,0) = q_l for x < 0 and q_r for
//! x > 0 (q_r > q_l ≥ 0) develops three regions in ξ = x/(12t): a decaying
//! modulated plane wave around q_l, an elliptic dispersive shock wave, and the
//! constant q_r. This crate evaluates the leading-order formulas and the
//! genus-one theta-function model that underlies the shock wave.

// `!(a < b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod branch;
pub mod error;
pub mod quad;
pub mod rh_model;
pub mod scattering;
pub mod specfun;
pub mod whitham;

pub use error::{Error, Result};
pub use scattering::StepData;
