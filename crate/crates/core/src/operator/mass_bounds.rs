//! Sampled checks of the two multilinear-type lower bounds for `|E_2|` and `|F_2|`.

use crate::bands::{validate_quadruple, Quadruple};
use crate::error::{Error, Result};
use crate::poly::rational_to_f64;
use crate::rng::derive_seed;

use super::averaging::AveragingOperator;
use super::functionals::{check_sets, stratified_integral};
use super::gridset::GridSet;

/// Constant realizing "bounded below up to a constant" in sampled hypotheses.
pub const HYPOTHESIS_CONSTANT: f64 = 0.125;

#[derive(Clone, Debug, PartialEq)]
pub struct MleCheck {
    /// `min T chi_{E_j}` over the sampled points of `F`.
    pub alpha: [f64; 2],
    /// `T(E_j, F) / |E_j|`.
    pub beta: [f64; 2],
    pub exponent: f64,
    pub measure: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub margin: f64,
    pub samples: usize,
}

impl MleCheck {
    pub fn passes(&self) -> bool {
        self.ratio >= self.margin
    }
}

/// Measures `|E_2| / (alpha_1^{d(d+1)/2} (beta_1/alpha_1)^{d-1} (alpha_2/alpha_1)^{(d+1)/2 + n(d-1)/2})`
/// with the `alpha_j, beta_j` read off samples of `F`.
pub fn check_mle(
    op: &AveragingOperator,
    e1: &GridSet,
    e2: &GridSet,
    f: &GridSet,
    margin: f64,
    samples: usize,
    seed: u64,
) -> Result<MleCheck> {
    check_sets(op, &[e1, e2, f])?;
    let s = derive_seed(seed, 11);
    let t1 = stratified_integral(f, samples, s, |y| op.apply(e1, y));
    let t2 = stratified_integral(f, samples, s, |y| op.apply(e2, y));
    let alpha = [t1.min, t2.min];
    let beta = [t1.value / e1.measure(), t2.value / e2.measure()];
    if !(alpha[0] > 0.0) {
        return Err(hyp("alpha_1 > 0", format!("T chi_E1 vanishes at a sampled point of F ({} samples)", t1.samples)));
    }
    if alpha[1] < alpha[0] {
        return Err(hyp("alpha_2 >= alpha_1", format!("alpha_1 = {}, alpha_2 = {}", alpha[0], alpha[1])));
    }
    let d = op.dim() as f64;
    let n = op.mu().n();
    let exponent = (d + 1.0) / 2.0 + n * (d - 1.0) / 2.0;
    let rhs = alpha[0].powf(d * (d + 1.0) / 2.0)
        * (beta[0] / alpha[0]).powf(d - 1.0)
        * (alpha[1] / alpha[0]).powf(exponent);
    let measure = e2.measure();
    Ok(MleCheck { alpha, beta, exponent, measure, rhs, ratio: measure / rhs, margin, samples: t1.samples })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlfCheck {
    /// `min T* chi_{F_j}` over the sampled points of `E`.
    pub beta: [f64; 2],
    /// `T(E, F_j) / |F_j|`.
    pub alpha: [f64; 2],
    pub eta: f64,
    pub c: f64,
    pub measure: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub margin: f64,
    pub samples: usize,
}

impl MlfCheck {
    pub fn passes(&self) -> bool {
        self.ratio >= self.margin
    }
}

/// Measures `|F_2| / (eta^C alpha_1^{r_1} alpha_2^{r_2} beta_1^{s_1} beta_2^{s_2})`.
#[allow(clippy::too_many_arguments)]
pub fn check_mlf(
    op: &AveragingOperator,
    e: &GridSet,
    f1: &GridSet,
    f2: &GridSet,
    eta: f64,
    quadruple: &Quadruple,
    c: f64,
    margin: f64,
    samples: usize,
    seed: u64,
) -> Result<MlfCheck> {
    check_sets(op, &[e, f1, f2])?;
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidArgument(format!("eta must lie in (0, 1], got {eta}")));
    }
    validate_quadruple(op.dim(), quadruple)?;
    let s = derive_seed(seed, 12);
    let t1 = stratified_integral(e, samples, s, |x| op.apply_adjoint(f1, x));
    let t2 = stratified_integral(e, samples, s, |x| op.apply_adjoint(f2, x));
    let beta = [t1.min, t2.min];
    let alpha = [t1.value / f1.measure(), t2.value / f2.measure()];
    for (j, t) in [&t1, &t2].into_iter().enumerate() {
        let need = HYPOTHESIS_CONSTANT * eta * t.value / e.measure();
        if !(beta[j] > 0.0) || beta[j] < need {
            return Err(hyp(
                if j == 0 { "beta_1 >~ eta T(E,F_1)/|E|" } else { "beta_2 >~ eta T(E,F_2)/|E|" },
                format!("sampled minimum {} below {need}", beta[j]),
            ));
        }
    }
    if beta[1] < beta[0] {
        return Err(hyp("beta_2 >= beta_1", format!("beta_1 = {}, beta_2 = {}", beta[0], beta[1])));
    }
    if alpha[1] > alpha[0] * (1.0 + 1e-12) {
        return Err(hyp("alpha_2 <= alpha_1", format!("alpha_1 = {}, alpha_2 = {}", alpha[0], alpha[1])));
    }
    let [r1, r2, s1, s2] = quadruple.exponents().map(|q| rational_to_f64(&q));
    let rhs = eta.powf(c) * alpha[0].powf(r1) * alpha[1].powf(r2) * beta[0].powf(s1) * beta[1].powf(s2);
    let measure = f2.measure();
    Ok(MlfCheck { beta, alpha, eta, c, measure, rhs, ratio: measure / rhs, margin, samples: t1.samples })
}

fn hyp(name: &str, detail: String) -> Error {
    Error::Hypothesis { name: name.to_string(), detail }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::Interval;
    use crate::operator::{GridBox, MuMeasure};
    use crate::poly::{PolyCurve, Rational};

    fn op() -> AveragingOperator {
        AveragingOperator::new(PolyCurve::moment(2).unwrap(), Interval::new(0.0, 1.0), MuMeasure::new(0, 2).unwrap())
            .unwrap()
    }

    #[test]
    fn single_set_form() {
        let o = op();
        let e = GridSet::ball(&[0.0, 0.0], 1.0, 12).unwrap();
        let f = GridSet::ball(&o.point(0.5), 0.2, 12).unwrap();
        let r = check_mle(&o, &e, &e, &f, 1.0, 400, 1).unwrap();
        assert_eq!(r.alpha[0], r.alpha[1]);
        let single = r.alpha[0].powi(3) * (r.beta[0] / r.alpha[0]);
        assert!((r.rhs - single).abs() <= 1e-15 * single);
        assert!(r.passes());
    }

    #[test]
    fn unverifiable_hypothesis_named() {
        let o = op();
        let e = GridSet::single(GridBox::cube(&[5.0, 5.0], 0.1).unwrap());
        let f = GridSet::single(GridBox::cube(&[0.0, 0.0], 0.1).unwrap());
        match check_mle(&o, &e, &e, &f, 1.0, 50, 1) {
            Err(Error::Hypothesis { name, .. }) => assert_eq!(name, "alpha_1 > 0"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn eta_enters_as_power() {
        let o = op();
        let e = GridSet::ball(&[0.0, 0.0], 0.2, 12).unwrap();
        let f = GridSet::ball(&o.point(0.5), 1.0, 12).unwrap();
        let q = Quadruple::small_last_parameter(2, &Rational::from_integer(1.into()));
        let a = check_mlf(&o, &e, &f, &f, 1.0, &q, 1.0, 1.0, 300, 2).unwrap();
        let b = check_mlf(&o, &e, &f, &f, 0.5, &q, 1.0, 1.0, 300, 2).unwrap();
        assert!((b.ratio / a.ratio - 2.0).abs() < 1e-12);
        let bad = Quadruple { r1: q.r2.clone(), ..q };
        assert!(check_mlf(&o, &e, &f, &f, 1.0, &bad, 1.0, 1.0, 300, 2).is_err());
    }
}
