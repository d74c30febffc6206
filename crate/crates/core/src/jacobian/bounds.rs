//! Sampled derivative bounds on a normalized piece (`b = 0`, piece in `(0, inf)`).

use crate::decomp::{Interval, OffsetRange};
use crate::error::{Error, Result};
use crate::poly::{determinant_f64, JacobianQuotient, PolyCurve};
use crate::rng::par_samples;

#[derive(Clone, Debug, PartialEq)]
pub struct L1BoundReport {
    /// `max |L_1'(s)| s / |L_1(s)|` over the grid.
    pub measured: f64,
    pub witness: f64,
    /// `deg L_1`, the sum of root multiplicities.
    pub degree: usize,
    pub grid: usize,
}

impl L1BoundReport {
    /// Allows rounding in the last bits only.
    pub fn passes(&self) -> bool {
        self.measured <= self.degree as f64 * (1.0 + 1e-12) + 1e-300
    }
}

fn require_positive_piece(piece: &Interval) -> Result<()> {
    if !(piece.lo >= 0.0) || piece.is_empty() {
        return Err(Error::Precondition(format!("piece {piece} is not inside (0, inf)")));
    }
    Ok(())
}

/// Measures `|L_1'(s)| s / |L_1(s)|` on a geometric grid of `piece`.
pub fn check_l1_derivative_bound(curve: &PolyCurve, piece: &Interval, grid: usize) -> Result<L1BoundReport> {
    require_positive_piece(piece)?;
    let l1 = curve.minor_float(1);
    let degree = curve.minor(1)?.degree().max(0) as usize;
    let mut report = L1BoundReport { measured: 0.0, witness: f64::NAN, degree, grid };
    for s in OffsetRange::of(piece, 0.0).grid(grid) {
        let (v, dv) = l1.eval_with_derivative(s);
        let ratio = (dv * s / v).abs();
        if ratio > report.measured || report.witness.is_nan() {
            report.measured = ratio;
            report.witness = s;
        }
    }
    Ok(report)
}

/// `P'(s) / L_1(s)`; its first entry is identically one.
fn normalized_velocity(curve: &PolyCurve, s: f64) -> Vec<f64> {
    let v = curve.velocity(s);
    let l1 = v[0];
    v.iter().map(|x| x / l1).collect()
}

/// Central difference of [`normalized_velocity`] with step `eps^(1/3) * scale`.
fn normalized_velocity_derivative(curve: &PolyCurve, s: f64, scale: f64) -> Vec<f64> {
    let h = f64::EPSILON.cbrt() * scale;
    let (a, b) = (s + h, s - h);
    let width = a - b;
    let pa = normalized_velocity(curve, a);
    let pb = normalized_velocity(curve, b);
    let mut out: Vec<f64> = pa.iter().zip(&pb).map(|(x, y)| (x - y) / width).collect();
    out[0] = 0.0;
    out
}

/// `H(tau) = J_P(tau) / prod_j L_1(tau_j)` and its mixed partial over `subset`.
///
/// `H` is the determinant of the columns `P'(tau_j) / L_1(tau_j)`, each of
/// which depends on one coordinate, so the mixed partial replaces the
/// differentiated columns by their derivatives. The difference step for
/// `tau_j` is proportional to `min(tau_j, scale)`.
pub fn normalized_jacobian_partial(curve: &PolyCurve, tau: &[f64], subset: &[usize], scale: f64) -> (f64, f64) {
    let d = curve.dim();
    let cols: Vec<Vec<f64>> = tau.iter().map(|&s| normalized_velocity(curve, s)).collect();
    let mut dcols = cols.clone();
    for &j in subset {
        dcols[j] = normalized_velocity_derivative(curve, tau[j], tau[j].abs().min(scale));
    }
    let rows = |c: &[Vec<f64>]| -> Vec<Vec<f64>> { (0..d).map(|i| (0..d).map(|j| c[j][i]).collect()).collect() };
    (determinant_f64(&rows(&cols)), determinant_f64(&rows(&dcols)))
}

/// `prod_{j in subset} max(1 / tau_j, max_{i != j} 1 / |tau_j - tau_i|)`.
///
/// This is the largest single term of the sum over `(delta, i)`; the sum is
/// at most `(2 (d - 1))^|subset|` times larger.
pub fn partial_bound_factor(tau: &[f64], subset: &[usize]) -> f64 {
    subset
        .iter()
        .map(|&j| {
            let nearest = tau
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, t)| 1.0 / (tau[j] - t).abs())
                .fold(0.0, f64::max);
            nearest.max(1.0 / tau[j])
        })
        .product()
}

/// `d_A V / V` for the Vandermonde product `V = prod_{i<k} (tau_k - tau_i)`:
/// every `a` in `A` differentiates one factor `(tau_a - tau_b)`, no factor
/// twice.
pub fn vandermonde_log_partial(tau: &[f64], vars: &[usize]) -> f64 {
    fn rec(tau: &[f64], vars: &[usize], partner: &mut Vec<usize>) -> f64 {
        let i = partner.len();
        if i == vars.len() {
            return 1.0;
        }
        let a = vars[i];
        let mut total = 0.0;
        for b in 0..tau.len() {
            if b == a {
                continue;
            }
            // the factor {a, b} was already used by b
            if vars[..i].iter().zip(partner.iter()).any(|(&c, &pc)| c == b && pc == a) {
                continue;
            }
            partner.push(b);
            total += rec(tau, vars, partner) / (tau[a] - tau[b]);
            partner.pop();
        }
        total
    }
    rec(tau, vars, &mut Vec::with_capacity(vars.len()))
}

fn subsets_of(set: &[usize]) -> impl Iterator<Item = (Vec<usize>, Vec<usize>)> + '_ {
    (0u32..(1 << set.len())).map(move |mask| {
        let (mut inside, mut outside) = (Vec::new(), Vec::new());
        for (i, &x) in set.iter().enumerate() {
            if mask >> i & 1 == 1 {
                inside.push(x);
            } else {
                outside.push(x);
            }
        }
        (inside, outside)
    })
}

/// `H / (V prod_j 1/L_1(tau_j)) = Q` and `(d_S H) / (V prod_j 1/L_1(tau_j))`,
/// with `Q = J_P / V` in Schur form around 0, so that nothing cancels for
/// positive `tau`.
///
/// Leibniz over `H = V * Q * prod_j 1/L_1(tau_j)`; the last factor is
/// separable and `d_a (1/L_1) = -(L_1'/L_1) / L_1`.
pub fn scaled_partial(curve: &PolyCurve, quotient: &JacobianQuotient, tau: &[f64], subset: &[usize]) -> (f64, f64) {
    let l1 = curve.minor_float(1);
    let log_l1: Vec<f64> = tau
        .iter()
        .map(|&s| {
            let (v, dv) = l1.eval_with_derivative(s);
            -dv / v
        })
        .collect();
    let mut total = 0.0;
    for (b, rest) in subsets_of(subset) {
        let outer: f64 = rest.iter().map(|&a| log_l1[a]).product();
        let mut inner = 0.0;
        for (vs, qs) in subsets_of(&b) {
            inner += vandermonde_log_partial(tau, &vs) * quotient.eval_partial_offsets(tau, &qs);
        }
        total += outer * inner;
    }
    (quotient.eval_offsets(tau), total)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartialBoundReport {
    /// `max |d_subset H| / (|H| * partial_bound_factor)`.
    pub max_ratio: f64,
    pub witness: Vec<f64>,
    pub samples: usize,
    pub resampled: usize,
}

/// Draws whose coordinates nearly coincide (relative gap below this) are
/// redrawn: the determinant carries no correct digits there.
const MIN_RELATIVE_GAP: f64 = 1e-9;
const MAX_REDRAWS: usize = 1000;

/// Samples `tau` log-uniformly in `piece` and measures the mixed partial of
/// `H` over `subset` (0-based indices) against [`partial_bound_factor`].
///
/// Derivatives come from [`scaled_partial`]. When `subset` is every index
/// the differentiated matrix has a zero first row, which the column route
/// [`normalized_jacobian_partial`] reproduces exactly, so that route is used.
pub fn check_partial_bound(
    curve: &PolyCurve,
    piece: &Interval,
    subset: &[usize],
    samples: usize,
    seed: u64,
) -> Result<PartialBoundReport> {
    require_positive_piece(piece)?;
    let d = curve.dim();
    if subset.iter().any(|&j| j >= d) {
        return Err(Error::InvalidArgument(format!("subset {subset:?} not inside 0..{d}")));
    }
    let mut subset = subset.to_vec();
    subset.sort_unstable();
    subset.dedup();
    let range = OffsetRange::of(piece, 0.0);
    let (u_lo, u_hi) = range.abs_bounds();
    let scale = u_hi - u_lo;
    let quotient = JacobianQuotient::new(curve, 0.0)?;
    let full = subset.len() == d;
    let rows = par_samples(samples, seed, |_, rng| {
        for resampled in 0..MAX_REDRAWS {
            let mut tau: Vec<f64> = (0..d).map(|_| range.sample(rng)).collect();
            tau.sort_by(f64::total_cmp);
            if tau.windows(2).any(|w| w[1] - w[0] <= MIN_RELATIVE_GAP * w[1]) {
                continue;
            }
            let (h, dh) = if full {
                normalized_jacobian_partial(curve, &tau, &subset, scale)
            } else {
                scaled_partial(curve, &quotient, &tau, &subset)
            };
            let ratio = if dh == 0.0 { 0.0 } else { dh.abs() / (h.abs() * partial_bound_factor(&tau, &subset)) };
            return Ok((ratio, tau, resampled));
        }
        Err(Error::Precondition(format!("{MAX_REDRAWS} draws in {piece} all had coincident coordinates")))
    });
    let mut report = PartialBoundReport { max_ratio: 0.0, witness: Vec::new(), samples, resampled: 0 };
    for row in rows {
        let (ratio, tau, resampled) = row?;
        report.resampled += resampled;
        if ratio > report.max_ratio || report.witness.is_empty() {
            report.max_ratio = ratio;
            report.witness = tau;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;

    fn curve(comps: &[&[i64]]) -> PolyCurve {
        PolyCurve::new(comps.iter().map(|c| Polynomial::from_i64s(c)).collect()).unwrap()
    }

    #[test]
    fn constant_l1_measures_zero() {
        let r = check_l1_derivative_bound(&PolyCurve::moment(3).unwrap(), &Interval::new(0.0, 1.0), 64).unwrap();
        assert_eq!(r.measured, 0.0);
        assert!(r.passes());
    }

    #[test]
    fn cusp_measures_one() {
        let c = curve(&[&[0, 0, 1], &[0, 0, 0, 1]]);
        let r = check_l1_derivative_bound(&c, &Interval::new(0.0, 1.0), 64).unwrap();
        assert!((r.measured - 1.0).abs() < 1e-15);
        assert!(r.passes());
    }

    #[test]
    fn shifted_square_stays_below_one() {
        // L_1 = s^2 + 1 on (0, 1): 2 s^2 / (s^2 + 1) peaks at s = 1
        let c = curve(&[&[0, 3, 0, 1], &[0, 0, 1]]);
        let r = check_l1_derivative_bound(&c, &Interval::new(0.0, 1.0), 1000).unwrap();
        assert!(r.measured < 1.0 && r.measured > 0.98, "{r:?}");
    }

    #[test]
    fn negative_piece_rejected() {
        let c = PolyCurve::moment(2).unwrap();
        assert!(check_l1_derivative_bound(&c, &Interval::new(-1.0, 1.0), 8).is_err());
    }

    #[test]
    fn full_subset_has_zero_partial() {
        let c = curve(&[&[0, 1, 2], &[0, 0, 1, 1], &[0, 0, 0, 0, 1]]);
        let (_, dh) = normalized_jacobian_partial(&c, &[0.3, 0.9, 1.7], &[0, 1, 2], 1.0);
        assert_eq!(dh, 0.0);
        let r = check_partial_bound(&c, &Interval::new(0.0, 1.0), &[0, 1, 2], 50, 3).unwrap();
        assert_eq!(r.max_ratio, 0.0);
    }

    #[test]
    fn moment_plane_curve_ratio_one() {
        let c = PolyCurve::moment(2).unwrap();
        let (h, dh) = normalized_jacobian_partial(&c, &[0.9, 1.0], &[0], 1.0);
        assert!((h - 0.2).abs() < 1e-15);
        assert!((dh + 2.0).abs() < 1e-9);
        let ratio = dh.abs() / (h.abs() * partial_bound_factor(&[0.9, 1.0], &[0]));
        assert!((ratio - 1.0).abs() < 1e-9);
        let r = check_partial_bound(&c, &Interval::new(0.0, 1.0), &[0], 200, 5).unwrap();
        assert!(r.max_ratio <= 1.0 + 1e-8, "{r:?}");
    }

    #[test]
    fn vandermonde_partials() {
        let t = [0.5, 1.25, 3.0];
        let v = |t: &[f64]| (t[1] - t[0]) * (t[2] - t[0]) * (t[2] - t[1]);
        let h = 1e-6;
        let fd = (v(&[t[0], t[1] + h, t[2]]) - v(&[t[0], t[1] - h, t[2]])) / (2.0 * h) / v(&t);
        assert!((vandermonde_log_partial(&t, &[1]) - fd).abs() < 1e-8);
        // V is linear in each pair, so the full mixed partial of V is a constant
        let all = vandermonde_log_partial(&t, &[0, 1, 2]) * v(&t);
        assert!((all - 0.0).abs() < 1e-12, "{all}");
        assert_eq!(vandermonde_log_partial(&t, &[]), 1.0);
    }

    #[test]
    fn analytic_and_column_routes_agree() {
        let c = curve(&[&[0, 1, 0, 1], &[0, 0, 1], &[0, 0, 0, 1, 1]]);
        let q = JacobianQuotient::new(&c, 0.0).unwrap();
        let tau = [0.4, 0.9, 1.6];
        for subset in [vec![0], vec![2], vec![0, 1], vec![1, 2]] {
            let (h, dh) = normalized_jacobian_partial(&c, &tau, &subset, 1.0);
            let (q0, dq) = scaled_partial(&c, &q, &tau, &subset);
            assert!((dh / h - dq / q0).abs() < 1e-6 * (dq / q0).abs(), "{subset:?}: {} vs {}", dh / h, dq / q0);
        }
    }

    #[test]
    fn ratio_bounded_near_coincidence() {
        let c = curve(&[&[0, 1, 0, 1], &[0, 0, 1], &[0, 0, 0, 1, 1]]);
        for gap in [1e-1, 1e-2, 1e-3] {
            let tau = [0.4, 0.6, 0.6 + gap];
            let (h, dh) = normalized_jacobian_partial(&c, &tau, &[2], 1.0);
            let ratio = dh.abs() / (h.abs() * partial_bound_factor(&tau, &[2]));
            assert!(ratio < 2.0, "gap {gap}: {ratio}");
        }
    }
}
