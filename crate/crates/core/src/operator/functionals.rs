//! The bilinear form `T(E, F) = <T chi_E, chi_F>`, its normalizations
//! `alpha = T/|F|`, `beta = T/|E|`, and restricted weak-type ratios.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::poly::Rational;
use crate::rng::{derive_seed, par_samples};

use super::averaging::AveragingOperator;
use super::gridset::GridSet;

/// Reported errors are this many standard errors of the stratified mean.
pub const ERROR_SIGMAS: f64 = 3.0;

/// Stratified Monte Carlo estimate of an integral over a box union.
#[derive(Clone, Debug, PartialEq)]
pub struct StratifiedEstimate {
    pub value: f64,
    pub error: f64,
    pub samples: usize,
    /// Smallest sampled integrand value.
    pub min: f64,
}

/// Integrates `g` over `set`, allocating samples to boxes by volume
/// (at least two per box). Sample `i` always uses stream `i` of `seed`.
pub fn stratified_integral<G>(set: &GridSet, samples: usize, seed: u64, g: G) -> StratifiedEstimate
where
    G: Fn(&[f64]) -> f64 + Sync,
{
    let boxes = set.boxes();
    let counts: Vec<usize> = boxes
        .iter()
        .map(|b| ((samples as f64 * b.volume() / set.measure()).round() as usize).max(2))
        .collect();
    let mut owner = Vec::with_capacity(counts.iter().sum());
    for (bi, &c) in counts.iter().enumerate() {
        owner.extend(std::iter::repeat_n(bi, c));
    }
    let values = par_samples(owner.len(), seed, |i, rng| {
        let x = boxes[owner[i]].sample(rng);
        g(&x)
    });
    let mut value = 0.0;
    let mut var = 0.0;
    let mut start = 0;
    for (b, &c) in boxes.iter().zip(&counts) {
        let v = &values[start..start + c];
        start += c;
        let mean = v.iter().sum::<f64>() / c as f64;
        let s2 = v.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (c - 1) as f64;
        value += b.volume() * mean;
        var += b.volume().powi(2) * s2 / c as f64;
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    StratifiedEstimate { value, error: ERROR_SIGMAS * var.sqrt(), samples: values.len(), min }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorFunctionals {
    /// `T(E, F)` sampled over `F` through `T chi_E`.
    pub t_value: f64,
    pub alpha: f64,
    pub beta: f64,
    pub error: f64,
    /// The same form sampled over `E` through `T* chi_F`.
    pub dual_value: f64,
    pub dual_error: f64,
    pub samples: usize,
    pub mu_total: f64,
}

impl OperatorFunctionals {
    pub fn duality_gap(&self) -> f64 {
        (self.t_value - self.dual_value).abs()
    }

    pub fn duality_consistent(&self) -> bool {
        self.duality_gap() <= self.error + self.dual_error
    }
}

pub fn functionals(
    op: &AveragingOperator,
    e: &GridSet,
    f: &GridSet,
    samples: usize,
    seed: u64,
) -> Result<OperatorFunctionals> {
    check_sets(op, &[e, f])?;
    let primal = stratified_integral(f, samples, derive_seed(seed, 1), |y| op.apply(e, y));
    let dual = stratified_integral(e, samples, derive_seed(seed, 2), |x| op.apply_adjoint(f, x));
    Ok(OperatorFunctionals {
        t_value: primal.value,
        alpha: primal.value / f.measure(),
        beta: primal.value / e.measure(),
        error: primal.error,
        dual_value: dual.value,
        dual_error: dual.error,
        samples: primal.samples,
        mu_total: op.mu_total(),
    })
}

pub(crate) fn check_sets(op: &AveragingOperator, sets: &[&GridSet]) -> Result<()> {
    for s in sets {
        if s.dim() != op.dim() {
            return Err(Error::InvalidArgument(format!("set of dimension {} for a curve in R^{}", s.dim(), op.dim())));
        }
        if !(s.measure() > 0.0) {
            return Err(Error::InvalidArgument("sets must have positive measure".into()));
        }
    }
    Ok(())
}

/// `(p_d, q_d) = ((d+1)/2, (d+1)d / (2(d-1)))` exactly.
pub fn endpoint_exponents_exact(d: usize) -> (Rational, Rational) {
    let d = d as i64;
    (
        Rational::new(BigInt::from(d + 1), BigInt::from(2)),
        Rational::new(BigInt::from((d + 1) * d), BigInt::from(2 * (d - 1))),
    )
}

pub fn endpoint_exponents(d: usize) -> (f64, f64) {
    let d = d as f64;
    ((d + 1.0) / 2.0, (d + 1.0) * d / (2.0 * (d - 1.0)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RwtRatio {
    pub ratio: f64,
    pub error: f64,
    pub p: f64,
    pub q: f64,
    pub functionals: OperatorFunctionals,
}

/// `T(E, F) / (|E|^{1/p} |F|^{1/q'})`.
pub fn rwt_ratio(
    op: &AveragingOperator,
    e: &GridSet,
    f: &GridSet,
    p: f64,
    q: f64,
    samples: usize,
    seed: u64,
) -> Result<RwtRatio> {
    if !(p >= 1.0) || !(q > 1.0) {
        return Err(Error::InvalidArgument(format!("exponents need p >= 1, q > 1, got p = {p}, q = {q}")));
    }
    let fun = functionals(op, e, f, samples, seed)?;
    let denom = e.measure().powf(1.0 / p) * f.measure().powf(1.0 - 1.0 / q);
    Ok(RwtRatio { ratio: fun.t_value / denom, error: fun.error / denom, p, q, functionals: fun })
}
