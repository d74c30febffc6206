//! The recursive ladder `J_1, ..., J_d` of nested integrals over minor
//! quotients, and the check that `J_d` reproduces the Jacobian.

use num_traits::Zero;
use rand::Rng;

use super::quadrature::integrate;
use crate::decomp::Interval;
use crate::error::{Error, Result};
use crate::poly::{rational_to_f64, PolyCurve, Rational};
use crate::rng::par_samples;

pub const DEFAULT_LADDER_TOL: f64 = 1e-9;

/// Evaluator for `J_k` on a piece where every minor keeps one sign.
///
/// `J_1(t) = g_1(t)` and `J_k(t) = prod_j g_k(t_j) * int J_{k-1}(s) ds` over
/// the box `[t_1, t_2] x ... x [t_{k-1}, t_k]`, where
/// `g_k = L_{d-k-1} L_{d-k+1} / L_{d-k}^2` and `L_0 = L_{-1} = 1`.
#[derive(Clone, Debug)]
pub struct JLadder {
    curve: PolyCurve,
    piece: Interval,
    tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LadderValue {
    pub value: f64,
    /// Error estimate of the outermost quadrature, scaled by the prefactor.
    pub error: f64,
}

impl JLadder {
    pub fn new(curve: &PolyCurve, piece: Interval) -> Result<Self> {
        Self::with_tolerance(curve, piece, DEFAULT_LADDER_TOL)
    }

    /// `tol` is the relative tolerance of the outermost quadrature level;
    /// level `depth` uses `tol / 4^depth`.
    pub fn with_tolerance(curve: &PolyCurve, piece: Interval, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!("ladder tolerance must be positive, got {tol}")));
        }
        if piece.is_empty() {
            return Err(Error::InvalidArgument(format!("empty piece {piece}")));
        }
        Ok(JLadder { curve: curve.clone(), piece, tol })
    }

    pub fn curve(&self) -> &PolyCurve {
        &self.curve
    }

    pub fn piece(&self) -> Interval {
        self.piece
    }

    /// Per-point factor `g_k(s)`.
    pub fn point_factor(&self, k: usize, s: f64) -> f64 {
        let d = self.curve.dim() as isize;
        let k = k as isize;
        let mid = self.curve.minor_f64(d - k, s);
        self.curve.minor_f64(d - k - 1, s) * self.curve.minor_f64(d - k + 1, s) / (mid * mid)
    }

    pub fn eval(&self, k: usize, t: &[f64]) -> Result<f64> {
        Ok(self.eval_with_error(k, t)?.value)
    }

    pub fn eval_with_error(&self, k: usize, t: &[f64]) -> Result<LadderValue> {
        let d = self.curve.dim();
        if k == 0 || k > d {
            return Err(Error::IndexOutOfRange { index: k as i64, lo: 1, hi: d as i64 });
        }
        if t.len() != k {
            return Err(Error::InvalidArgument(format!("J_{k} takes {k} arguments, got {}", t.len())));
        }
        if let Some(s) = t.iter().find(|s| !self.piece.contains(**s)) {
            return Err(Error::Precondition(format!("argument {s} outside piece {}", self.piece)));
        }
        self.level(k, t, 0)
    }

    fn level(&self, k: usize, t: &[f64], depth: usize) -> Result<LadderValue> {
        let prefactor: f64 = t.iter().map(|&s| self.point_factor(k, s)).product();
        if k == 1 {
            return Ok(LadderValue { value: prefactor, error: 0.0 });
        }
        let bounds: Vec<(f64, f64)> = t.windows(2).map(|w| (w[0], w[1])).collect();
        let mut scratch = Vec::with_capacity(k - 1);
        let (value, error) = self.nested(k - 1, &bounds, &mut scratch, depth)?;
        Ok(LadderValue { value: prefactor * value, error: (prefactor * error).abs() })
    }

    /// Iterated integral of `J_inner` over the box; one adaptive level per axis.
    fn nested(&self, inner: usize, bounds: &[(f64, f64)], s: &mut Vec<f64>, depth: usize) -> Result<(f64, f64)> {
        let axis = s.len();
        let (a, b) = bounds[axis];
        let tol = self.tol / 4f64.powi(depth as i32);
        let r = integrate(
            |x| {
                s.push(x);
                let v = if axis + 1 == bounds.len() {
                    self.level(inner, s, depth + 1).map(|v| v.value)
                } else {
                    self.nested(inner, bounds, s, depth + 1).map(|v| v.0)
                };
                s.pop();
                v
            },
            a,
            b,
            tol,
            depth,
        )?;
        Ok((r.value, r.error))
    }
}

/// The part of a piece where identity tuples are drawn: the middle 80% of a
/// bounded piece, a window of length 2 set back from a finite endpoint, or
/// `[-1, 1]` for the whole line.
pub fn identity_window(piece: &Interval) -> Interval {
    match (piece.lo.is_finite(), piece.hi.is_finite()) {
        (true, true) => {
            let w = piece.width();
            Interval::new(piece.lo + 0.1 * w, piece.hi - 0.1 * w)
        }
        (true, false) => {
            let scale = piece.lo.abs().max(1.0);
            Interval::new(piece.lo + 0.1 * scale, piece.lo + 2.1 * scale)
        }
        (false, true) => {
            let scale = piece.hi.abs().max(1.0);
            Interval::new(piece.hi - 2.1 * scale, piece.hi - 0.1 * scale)
        }
        (false, false) => Interval::new(-1.0, 1.0),
    }
}

/// Sorted tuple of `d` distinct uniform draws from `window`.
pub fn ordered_tuple(window: &Interval, d: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let mut t: Vec<f64> = (0..d).map(|_| window.lo + window.width() * rng.random::<f64>()).collect();
        t.sort_by(f64::total_cmp);
        if t.windows(2).all(|w| w[0] < w[1]) {
            return t;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    pub max_rel_error: f64,
    /// Largest quadrature error estimate relative to `|J_P|`.
    pub max_rel_estimate: f64,
    pub worst: Vec<f64>,
    pub samples: usize,
}

/// Compares `J_d` from the ladder with the exact Jacobian at seeded ordered
/// tuples drawn from [`identity_window`] of `piece`.
pub fn check_identity_jp_equals_jd(
    curve: &PolyCurve,
    piece: &Interval,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<IdentityReport> {
    let ladder = JLadder::with_tolerance(curve, *piece, tol)?;
    let d = curve.dim();
    let window = identity_window(piece);
    let rows = par_samples(samples, seed, |_, rng| -> Result<(f64, f64, Vec<f64>)> {
        let t = ordered_tuple(&window, d, rng);
        let jd = ladder.eval_with_error(d, &t)?;
        let exact: Vec<Rational> = t.iter().map(|&x| Rational::from_float(x).expect("finite")).collect();
        let jp = curve.jacobian_exact(&exact);
        if jp.is_zero() {
            return Err(Error::Precondition(format!("Jacobian vanishes at {t:?}")));
        }
        let jp = rational_to_f64(&jp);
        Ok(((jd.value - jp).abs() / jp.abs(), jd.error / jp.abs(), t))
    });
    let mut report = IdentityReport { max_rel_error: 0.0, max_rel_estimate: 0.0, worst: Vec::new(), samples };
    for row in rows {
        let (err, est, t) = row?;
        if err > report.max_rel_error || report.worst.is_empty() {
            report.max_rel_error = err;
            report.worst = t;
        }
        report.max_rel_estimate = report.max_rel_estimate.max(est);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;

    #[test]
    fn first_level_is_minor_quotient() {
        let c = PolyCurve::moment(3).unwrap();
        let l = JLadder::new(&c, Interval::REAL_LINE).unwrap();
        assert_eq!(l.eval(1, &[0.3]).unwrap(), 3.0);
    }

    #[test]
    fn moment_plane_curve_closed_form() {
        let c = PolyCurve::moment(2).unwrap();
        let l = JLadder::new(&c, Interval::REAL_LINE).unwrap();
        let v = l.eval(2, &[-0.4, 0.7]).unwrap();
        assert!((v - 2.0 * 1.1).abs() < 1e-12);
    }

    #[test]
    fn antisymmetric_and_vanishing_on_ties() {
        let c = PolyCurve::new(vec![
            Polynomial::from_i64s(&[0, 1]),
            Polynomial::from_i64s(&[0, 0, 1]),
            Polynomial::from_i64s(&[0, 0, 0, 0, 1]),
        ])
        .unwrap();
        let l = JLadder::new(&c, Interval::new(0.0, f64::INFINITY)).unwrap();
        let a = l.eval(3, &[0.5, 1.2, 2.0]).unwrap();
        let b = l.eval(3, &[1.2, 0.5, 2.0]).unwrap();
        assert!((a + b).abs() < 1e-9 * a.abs());
        assert_eq!(l.eval(3, &[0.5, 0.5, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn outside_piece_rejected() {
        let c = PolyCurve::moment(2).unwrap();
        let l = JLadder::new(&c, Interval::new(0.0, 1.0)).unwrap();
        assert!(matches!(l.eval(2, &[0.5, 2.0]), Err(Error::Precondition(_))));
    }

    #[test]
    fn identity_on_cusp() {
        let c = PolyCurve::new(vec![Polynomial::from_i64s(&[0, 0, 1]), Polynomial::from_i64s(&[0, 0, 0, 1])]).unwrap();
        let r = check_identity_jp_equals_jd(&c, &Interval::new(0.0, f64::INFINITY), 20, 1e-9, 1).unwrap();
        assert!(r.max_rel_error < 1e-10, "{r:?}");
    }
}
