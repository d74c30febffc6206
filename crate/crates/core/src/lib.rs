//! Computable machinery around convolution with affine arclength measure on
//! polynomial curves.
//!
//! The crate is organised in layers:
//!
//! * [`poly`]: exact polynomial algebra, torsion minors, Jacobians and
//!   affine arclength density of a [`poly::PolyCurve`].
//! * [`roots`]: certified complex root finding.
//! * [`decomp`]: the nearest-root / gap-dyadic interval decomposition and
//!   empirical checks of its conclusions.
//! * [`jacobian`]: the recursive Jacobian ladder, power (alternant)
//!   determinants and the derivative bounds used on decomposition leaves.
//! * [`bands`]: band structures, tuple towers and the conditional Jacobian
//!   lower bound.
//! * [`operator`]: the discretized averaging operator, restricted weak-type
//!   ratios and Knapp sweeps.
//! * [`report`]: configuration, the text report tree and the command
//!   dispatcher used by the `curvelab` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments, clippy::needless_range_loop)]

pub mod bands;
pub mod decomp;
pub mod error;
pub mod jacobian;
pub mod operator;
pub mod poly;
pub mod report;
pub mod rng;
pub mod roots;

pub use error::{Error, Result};
pub use poly::{PolyCurve, Polynomial, Rational};
