//! The averaging operator along a curve piece, its bilinear form on box
//! unions, restricted weak-type ratios and Knapp-type sweeps.

mod averaging;
mod functionals;
mod gridset;
mod knapp;
mod mass_bounds;
mod mu;

pub use averaging::{AveragingOperator, Direction};
pub use functionals::{
    endpoint_exponents, endpoint_exponents_exact, functionals, rwt_ratio, stratified_integral, OperatorFunctionals,
    RwtRatio, StratifiedEstimate, ERROR_SIGMAS,
};
pub use gridset::{GridBox, GridSet};
pub use knapp::{dyadic_scales, knapp_family, knapp_sweep, KnappSweep, SweepRow, Trend};
pub use mass_bounds::{check_mle, check_mlf, MleCheck, MlfCheck, HYPOTHESIS_CONSTANT};
pub use mu::MuMeasure;
