use std::collections::HashMap;

use num_traits::One;
use rand::Rng;

use super::{DecompInterval, Interval};
use crate::poly::{FloatPoly, JacobianQuotient, PolyCurve, Polynomial, Rational};
use crate::rng::{par_samples, SampleRng};

/// `|s - b|` is truncated to `[2^-40, 2^40]` for sampling.
pub const TRUNCATION: f64 = 1_099_511_627_776.0;

/// The torsion polynomial in the variable `v = s - center`, so values near
/// the center keep their relative precision.
#[derive(Clone, Debug)]
pub struct ShiftedTorsion {
    pub center: f64,
    poly: FloatPoly,
}

impl ShiftedTorsion {
    pub fn new(curve: &PolyCurve, center: f64) -> Self {
        Self::of(curve.torsion(), center)
    }

    pub fn of(p: &Polynomial, center: f64) -> Self {
        let c = Rational::from_float(center).expect("finite center");
        ShiftedTorsion { center, poly: p.compose_affine(&Rational::one(), &c).to_float() }
    }

    #[inline]
    pub fn eval_offset(&self, v: f64) -> f64 {
        self.poly.eval(v)
    }
}

/// Where sample offsets `v = s - center` of a piece live.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OffsetRange {
    /// `v = sign * u`, `u` in `[u_lo, u_hi]`, sampled geometrically.
    OneSided { sign: f64, u_lo: f64, u_hi: f64 },
    /// The center lies inside the piece (no-center leaves only); `v` in
    /// `[v_lo, v_hi]`, sampled uniformly.
    TwoSided { v_lo: f64, v_hi: f64 },
}

impl OffsetRange {
    pub fn of(interval: &Interval, center: f64) -> Self {
        if interval.contains(center) {
            let v_lo = (interval.lo - center).max(-TRUNCATION);
            let v_hi = (interval.hi - center).min(TRUNCATION);
            return OffsetRange::TwoSided { v_lo, v_hi };
        }
        let (sign, raw_lo, raw_hi) = if interval.lo >= center {
            (1.0, interval.lo - center, interval.hi - center)
        } else {
            (-1.0, center - interval.hi, center - interval.lo)
        };
        let u_lo = if raw_lo > 0.0 {
            raw_lo
        } else if raw_hi.is_finite() {
            raw_hi / TRUNCATION
        } else {
            1.0 / TRUNCATION
        };
        let u_hi = if raw_hi.is_finite() { raw_hi } else { TRUNCATION * u_lo.max(1.0) };
        OffsetRange::OneSided { sign, u_lo, u_hi }
    }

    /// `n` interior grid offsets at positions `(i + 1/2) / n`.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let x = (i as f64 + 0.5) / n as f64;
                match *self {
                    OffsetRange::OneSided { sign, u_lo, u_hi } => sign * u_lo * (u_hi / u_lo).powf(x),
                    OffsetRange::TwoSided { v_lo, v_hi } => v_lo + (v_hi - v_lo) * x,
                }
            })
            .collect()
    }

    /// One random offset: log-uniform in `|s - center|` for one-sided ranges.
    pub fn sample(&self, rng: &mut SampleRng) -> f64 {
        let x: f64 = rng.random();
        match *self {
            OffsetRange::OneSided { sign, u_lo, u_hi } => sign * u_lo * (u_hi / u_lo).powf(x),
            OffsetRange::TwoSided { v_lo, v_hi } => v_lo + (v_hi - v_lo) * x,
        }
    }

    pub fn abs_bounds(&self) -> (f64, f64) {
        match *self {
            OffsetRange::OneSided { u_lo, u_hi, .. } => (u_lo, u_hi),
            OffsetRange::TwoSided { v_lo, v_hi } => (v_lo, v_hi),
        }
    }
}

/// Draws `d` offsets for a piece; exposed for the samplers of other modules.
pub fn sample_offsets(range: &OffsetRange, d: usize, rng: &mut SampleRng) -> Vec<f64> {
    (0..d).map(|_| range.sample(rng)).collect()
}

/// Best power law `|L(s)| ~ a |s - b|^k` over a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerFit {
    pub k: usize,
    pub a: f64,
    pub c_lo: f64,
    pub c_hi: f64,
}

/// Chooses `k` in `0..=max_k` minimizing the spread of
/// `log |L(s)| - k log |s - b|` on the grid (ties to the smaller `k`), then
/// centers `a` geometrically so that `c_lo * c_hi = 1`.
pub fn fit_power_law(torsion: &ShiftedTorsion, range: &OffsetRange, grid: usize, max_k: usize) -> PowerFit {
    let offsets = range.grid(grid.max(2));
    let logs: Vec<(f64, f64)> = offsets.iter().map(|&v| (torsion.eval_offset(v).abs().ln(), v.abs().ln())).collect();
    let two_sided = matches!(range, OffsetRange::TwoSided { .. });
    let mut best: Option<(f64, usize, f64, f64)> = None;
    for k in 0..=(if two_sided { 0 } else { max_k }) {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(lt, lu) in &logs {
            let r = if k == 0 { lt } else { lt - k as f64 * lu };
            lo = lo.min(r);
            hi = hi.max(r);
        }
        let spread = hi - lo;
        if best.is_none_or(|b| spread < b.0 - 1e-9 * b.0.abs().max(1.0)) {
            best = Some((spread, k, lo, hi));
        }
    }
    let (_, k, lo, hi) = best.expect("at least one exponent");
    let log_a = 0.5 * (lo + hi);
    PowerFit { k, a: log_a.exp(), c_lo: (lo - log_a).exp(), c_hi: (hi - log_a).exp() }
}

/// Min and max over the grid of `|L_P(s)| / (a |s - b|^k)`, geometric in
/// `|s - b|`.
pub fn verify_torsion_comparability(piece: &DecompInterval, curve: &PolyCurve, grid: usize) -> (f64, f64) {
    let center = piece.sampling_center();
    let torsion = ShiftedTorsion::new(curve, center);
    comparability_with(&torsion, &piece.interval, center, piece.k, piece.a, grid)
}

/// `(s, |L_P(s)| / (a |s - b|^k))` on the same grid as
/// [`verify_torsion_comparability`].
pub fn comparability_grid(piece: &DecompInterval, curve: &PolyCurve, grid: usize) -> Vec<(f64, f64)> {
    let center = piece.sampling_center();
    let torsion = ShiftedTorsion::new(curve, center);
    let range = OffsetRange::of(&piece.interval, center);
    range
        .grid(grid.max(2))
        .into_iter()
        .map(|v| {
            let log_u = if piece.k == 0 { 0.0 } else { piece.k as f64 * v.abs().ln() };
            (center + v, (torsion.eval_offset(v).abs().ln() - log_u - piece.a.ln()).exp())
        })
        .collect()
}

pub(crate) fn comparability_with(
    torsion: &ShiftedTorsion,
    interval: &Interval,
    center: f64,
    k: usize,
    a: f64,
    grid: usize,
) -> (f64, f64) {
    let range = OffsetRange::of(interval, center);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in range.grid(grid.max(2)) {
        let log_u = if k == 0 { 0.0 } else { k as f64 * v.abs().ln() };
        let r = (torsion.eval_offset(v).abs().ln() - log_u - a.ln()).exp();
        lo = lo.min(r);
        hi = hi.max(r);
    }
    (lo, hi)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeometricReport {
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Tuple attaining the minimum.
    pub witness: Vec<f64>,
    pub samples: usize,
    pub resampled: usize,
}

/// Minimum over seeded tuples in the piece of
/// `|J_P(t)| / (prod_k |L_P(t_k)|^{1/d} prod_{l<k} |t_k - t_l|)`.
///
/// `J_P / prod (t_k - t_l)` is evaluated through divided differences around
/// the piece center, so near-coincident tuples need no special care; tuples
/// with exactly equal coordinates are redrawn.
pub fn verify_geometric_inequality(piece: &DecompInterval, curve: &PolyCurve, samples: usize, seed: u64) -> GeometricReport {
    let d = curve.dim();
    let center = piece.sampling_center();
    let range = OffsetRange::of(&piece.interval, center);
    let torsion = ShiftedTorsion::new(curve, center);
    let quotient = JacobianQuotient::new(curve, center).expect("Vandermonde division of an alternant is exact");
    let inv_d = 1.0 / d as f64;
    let results = par_samples(samples.max(1), seed, |_, rng| {
        let mut redraws = 0usize;
        loop {
            let v = sample_offsets(&range, d, rng);
            let distinct = (0..d).all(|i| (i + 1..d).all(|j| v[i] != v[j]));
            let weights: Vec<f64> = v.iter().map(|&x| torsion.eval_offset(x).abs()).collect();
            if !distinct || weights.iter().any(|&w| w == 0.0 || !w.is_finite()) {
                redraws += 1;
                continue;
            }
            let q = quotient.eval_offsets(&v).abs();
            let denom: f64 = weights.iter().map(|w| w.powf(inv_d)).product();
            return (q / denom, v, redraws);
        }
    });
    let mut report = GeometricReport {
        min_ratio: f64::INFINITY,
        max_ratio: 0.0,
        witness: Vec::new(),
        samples: samples.max(1),
        resampled: 0,
    };
    for (r, v, redraws) in results {
        report.resampled += redraws;
        if r < report.min_ratio {
            report.min_ratio = r;
            report.witness = v.iter().map(|x| x + center).collect();
        }
        report.max_ratio = report.max_ratio.max(r);
    }
    report
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollisionReport {
    pub max_multiplicity: usize,
    /// Distinct tuples sharing the most crowded box.
    pub witnesses: Vec<Vec<f64>>,
    pub samples: usize,
    pub quantum: f64,
    pub bound: usize,
}

impl CollisionReport {
    pub fn within_bound(&self) -> bool {
        self.max_multiplicity <= self.bound
    }
}

/// Monte Carlo witness for the preimage count of `Phi(t) = sum_k eps_k P(t_k)`.
///
/// Images of sampled tuples are quantized to boxes of side `quantum`. In a
/// box holding several tuples, every tuple is pulled by Newton's method onto
/// the image of the first one; tuples that converge inside the piece are
/// genuine preimages of that point. Preimages are canonicalized by sorting
/// coordinates that share a sign in `eps` and clustered at sup-distance `sep`.
/// Returns the largest number of distinct preimages found for one point.
pub fn preimage_collision_probe(
    piece: &DecompInterval,
    curve: &PolyCurve,
    eps: &[i8],
    samples: usize,
    quantum: f64,
    sep: f64,
    seed: u64,
) -> CollisionReport {
    let d = curve.dim();
    assert_eq!(eps.len(), d, "sign vector must have length d");
    let center = piece.sampling_center();
    let range = OffsetRange::of(&piece.interval, center);
    let phi = |t: &[f64]| -> Vec<f64> {
        let mut image = vec![0.0; d];
        for (k, &tk) in t.iter().enumerate() {
            for (x, p) in image.iter_mut().zip(curve.eval(tk)) {
                *x += eps[k] as f64 * p;
            }
        }
        image
    };
    let points = par_samples(samples, seed, |_, rng| {
        let t: Vec<f64> = sample_offsets(&range, d, rng).iter().map(|v| v + center).collect();
        let key: Vec<i64> = phi(&t).iter().map(|x| (x / quantum).floor() as i64).collect();
        (key, t)
    });
    let mut boxes: HashMap<Vec<i64>, Vec<Vec<f64>>> = HashMap::new();
    for (key, t) in points {
        boxes.entry(key).or_default().push(t);
    }
    let mut keys: Vec<&Vec<i64>> = boxes.iter().filter(|(_, v)| v.len() > 1).map(|(k, _)| k).collect();
    keys.sort();
    let mut best: Vec<Vec<f64>> = Vec::new();
    for key in keys {
        let members = &boxes[key];
        let target = phi(&members[0]);
        let mut classes = vec![canonical_tuple(&members[0], eps)];
        for t in &members[1..] {
            if let Some(t) = newton_preimage(curve, eps, &target, t, &piece.interval, &phi) {
                let c = canonical_tuple(&t, eps);
                if classes.iter().all(|u| sup_dist(u, &c) > sep) {
                    classes.push(c);
                }
            }
        }
        if classes.len() > best.len() {
            best = classes;
        }
    }
    // a lone sample is its own single preimage
    let max_multiplicity = best.len().max(usize::from(samples > 0));
    CollisionReport {
        max_multiplicity,
        witnesses: best,
        samples,
        quantum,
        bound: (1..=d).product(),
    }
}

fn newton_preimage(
    curve: &PolyCurve,
    eps: &[i8],
    target: &[f64],
    start: &[f64],
    interval: &Interval,
    phi: &dyn Fn(&[f64]) -> Vec<f64>,
) -> Option<Vec<f64>> {
    let d = start.len();
    let scale = target.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let mut t = start.to_vec();
    for _ in 0..40 {
        let r: Vec<f64> = phi(&t).iter().zip(target).map(|(a, b)| a - b).collect();
        if r.iter().all(|x| x.abs() <= 1e-12 * scale) {
            return t.iter().all(|&x| interval.contains(x)).then_some(t);
        }
        let jac = nalgebra::DMatrix::from_fn(d, d, |i, k| eps[k] as f64 * curve.velocity(t[k])[i]);
        let step = jac.lu().solve(&nalgebra::DVector::from_vec(r))?;
        for (x, dx) in t.iter_mut().zip(step.iter()) {
            *x -= dx;
        }
        if t.iter().any(|x| !x.is_finite()) {
            return None;
        }
    }
    None
}

fn canonical_tuple(t: &[f64], eps: &[i8]) -> Vec<f64> {
    let mut plus: Vec<f64> = t.iter().zip(eps).filter(|(_, &e)| e > 0).map(|(x, _)| *x).collect();
    let mut minus: Vec<f64> = t.iter().zip(eps).filter(|(_, &e)| e <= 0).map(|(x, _)| *x).collect();
    plus.sort_by(f64::total_cmp);
    minus.sort_by(f64::total_cmp);
    plus.extend(minus);
    plus
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::{LineageStep, StepCase};

    fn leaf(lo: f64, hi: f64, b: Option<f64>, k: usize, a: f64) -> DecompInterval {
        DecompInterval {
            interval: Interval::new(lo, hi),
            b,
            k,
            a,
            c_lo: 1.0,
            c_hi: 1.0,
            lineage: vec![LineageStep { step: 0, case: StepCase::Nearest, center: b }],
        }
    }

    fn cusp() -> PolyCurve {
        PolyCurve::new(vec![Polynomial::from_i64s(&[0, 0, 1]), Polynomial::from_i64s(&[0, 0, 0, 1])]).unwrap()
    }

    #[test]
    fn offset_ranges() {
        let r = OffsetRange::of(&Interval::new(0.0, f64::INFINITY), 0.0);
        assert_eq!(r, OffsetRange::OneSided { sign: 1.0, u_lo: 1.0 / TRUNCATION, u_hi: TRUNCATION });
        let r = OffsetRange::of(&Interval::new(-3.0, -1.0), 0.0);
        assert_eq!(r, OffsetRange::OneSided { sign: -1.0, u_lo: 1.0, u_hi: 3.0 });
        let g = r.grid(4);
        assert!(g.iter().all(|&v| (-3.0..-1.0).contains(&v)));
    }

    #[test]
    fn exact_power_laws_have_unit_spread() {
        let c = cusp();
        let piece = leaf(0.0, f64::INFINITY, Some(0.0), 2, 6.0);
        let (lo, hi) = verify_torsion_comparability(&piece, &c, 64);
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
        let fit = fit_power_law(&ShiftedTorsion::new(&c, 0.0), &OffsetRange::of(&piece.interval, 0.0), 64, 2);
        assert_eq!(fit.k, 2);
        assert!((fit.a - 6.0).abs() < 1e-9);
        let m = PolyCurve::moment(3).unwrap();
        let whole = leaf(f64::NEG_INFINITY, f64::INFINITY, None, 0, 12.0);
        let (lo, hi) = verify_torsion_comparability(&whole, &m, 16);
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn planar_moment_curve_ratio_is_one() {
        let m = PolyCurve::moment(2).unwrap();
        let whole = leaf(f64::NEG_INFINITY, f64::INFINITY, None, 0, 2.0);
        let rep = verify_geometric_inequality(&whole, &m, 500, 3);
        assert!((rep.min_ratio - 1.0).abs() < 1e-9, "{}", rep.min_ratio);
        assert!((rep.max_ratio - 1.0).abs() < 1e-9);
    }

    #[test]
    fn geometric_probe_is_reproducible() {
        let c = cusp();
        let piece = leaf(0.0, 1.0, Some(0.0), 2, 6.0);
        let a = verify_geometric_inequality(&piece, &c, 2000, 11);
        let b = verify_geometric_inequality(&piece, &c, 2000, 11);
        assert_eq!(a, b);
        assert!(a.min_ratio > 0.0);
    }

    #[test]
    fn near_coincident_tuples_stay_bounded() {
        // divided differences agree with the determinant route on a 1D slice
        let c = cusp();
        let v = c.shifted_velocity(0.0);
        let t = 0.4;
        let mut prev: Option<f64> = None;
        for k in 1..12 {
            let h = 10f64.powi(-k);
            let q = v.vandermonde_quotient(&[t, t + h]).abs();
            let ratio = q / (6.0 * t * t * 6.0 * (t + h) * (t + h)).sqrt();
            if let Some(p) = prev {
                assert!((ratio - p).abs() < 1e-2);
            }
            prev = Some(ratio);
        }
    }

    #[test]
    fn symmetric_images_count_once() {
        let m = PolyCurve::moment(2).unwrap();
        let piece = leaf(0.0, 1.0, Some(0.0), 0, 2.0);
        let rep = preimage_collision_probe(&piece, &m, &[1, 1], 20_000, 1e-3, 1e-3, 5);
        assert!(rep.within_bound(), "{rep:?}");
        assert_eq!(canonical_tuple(&[0.5, 0.2], &[1, 1]), canonical_tuple(&[0.2, 0.5], &[1, 1]));
        assert_ne!(canonical_tuple(&[0.5, 0.2], &[1, -1]), canonical_tuple(&[0.2, 0.5], &[1, -1]));
    }
}
