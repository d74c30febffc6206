//! The averaging operator `T f(x) = int_I f(x - P(s)) d mu(s)` and its
//! adjoint on indicator functions of box unions.
//!
//! For a box the admissible parameters `{s in I : x -/+ P(s) in box}` form a
//! finite union of intervals whose endpoints are roots of `P_i(s) - level`;
//! these are located by derivative-chain isolation and bisection, so the
//! integral over `mu` is evaluated in closed form rather than by quadrature.

use crate::decomp::Interval;
use crate::error::{Error, Result};
use crate::poly::{FloatPoly, PolyCurve};

use super::gridset::{GridBox, GridSet};
use super::mu::MuMeasure;

/// Whether the set is probed by `x - P(s)` (the operator) or `x + P(s)` (its adjoint).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Adjoint,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => -1.0,
            Direction::Adjoint => 1.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AveragingOperator {
    curve: PolyCurve,
    interval: Interval,
    mu: MuMeasure,
    cut: f64,
    /// Coordinate ranges of `P` over the interval.
    ranges: Vec<(f64, f64)>,
    /// `chains[i][k]` is the `k`-th derivative of component `i`.
    chains: Vec<Vec<FloatPoly>>,
}

impl AveragingOperator {
    pub fn new(curve: PolyCurve, interval: Interval, mu: MuMeasure) -> Result<Self> {
        if !interval.is_bounded() || interval.lo < 0.0 || interval.is_empty() {
            return Err(Error::Precondition(format!(
                "operator interval must be a bounded subinterval of (0, inf), got ({}, {})",
                interval.lo, interval.hi
            )));
        }
        if curve.dim() != mu.d {
            return Err(Error::InvalidArgument(format!(
                "curve dimension {} does not match measure dimension {}",
                curve.dim(),
                mu.d
            )));
        }
        let chains = curve
            .components()
            .iter()
            .map(|c| {
                let mut chain = vec![c.to_float()];
                while chain.last().unwrap().degree() > 0 {
                    let next = chain.last().unwrap().derivative();
                    chain.push(next);
                }
                chain
            })
            .collect();
        let mut op = AveragingOperator { curve, interval, mu, cut: 0.0, ranges: Vec::new(), chains };
        op.ranges = (0..op.dim()).map(|i| op.component_range(i, interval.lo, interval.hi)).collect();
        Ok(op)
    }

    /// The truncated operator integrating over `I \ [0, c gamma^n]`.
    pub fn truncated(&self, c: f64, gamma: f64) -> Self {
        AveragingOperator { cut: c * gamma.powf(self.mu.n()), ..self.clone() }
    }

    pub fn curve(&self) -> &PolyCurve {
        &self.curve
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn mu(&self) -> &MuMeasure {
        &self.mu
    }

    pub fn dim(&self) -> usize {
        self.mu.d
    }

    /// Integration range after truncation; may be empty.
    pub fn effective_interval(&self) -> Interval {
        Interval::new(self.interval.lo.max(self.cut), self.interval.hi)
    }

    pub fn mu_total(&self) -> f64 {
        let r = self.effective_interval();
        if r.is_empty() {
            0.0
        } else {
            self.mu.interval(r.lo, r.hi).unwrap_or(0.0)
        }
    }

    pub fn point(&self, s: f64) -> Vec<f64> {
        self.chains.iter().map(|c| c[0].eval(s)).collect()
    }

    /// Roots of `P_i(s) = level` inside `[lo, hi]`, ascending.
    pub fn component_crossings(&self, i: usize, level: f64, lo: f64, hi: f64) -> Vec<f64> {
        crossings(&self.chains[i], level, lo, hi)
    }

    /// Extreme values of component `i` over `[lo, hi]`.
    pub fn component_range(&self, i: usize, lo: f64, hi: f64) -> (f64, f64) {
        let chain = &self.chains[i];
        let mut pts = vec![lo, hi];
        if chain.len() > 1 {
            pts.extend(crossings(&chain[1..], 0.0, lo, hi));
        }
        pts.iter().map(|&s| chain[0].eval(s)).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
    }

    /// `{s in I : x + sign * P(s) in set}` as sorted disjoint intervals.
    pub fn preimage(&self, set: &GridSet, x: &[f64], dir: Direction) -> Vec<Interval> {
        let range = self.effective_interval();
        if range.is_empty() {
            return Vec::new();
        }
        let mut out: Vec<Interval> = set.boxes().iter().flat_map(|b| self.box_preimage(b, x, dir, range)).collect();
        out.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        merge(out)
    }

    fn box_preimage(&self, b: &GridBox, x: &[f64], dir: Direction, range: Interval) -> Vec<Interval> {
        let sign = dir.sign();
        // boxes out of reach of x + sign * P(I)
        let reachable = (0..self.dim()).all(|i| {
            let (a, c) = self.ranges[i];
            let (u, v) = if sign > 0.0 { (x[i] + a, x[i] + c) } else { (x[i] - c, x[i] - a) };
            u <= b.hi[i] && b.lo[i] <= v
        });
        if !reachable {
            return Vec::new();
        }
        let levels: Vec<(f64, f64)> = (0..self.dim())
            .map(|i| {
                let u = sign * (b.lo[i] - x[i]);
                let v = sign * (b.hi[i] - x[i]);
                (u.min(v), u.max(v))
            })
            .collect();
        let mut cuts = vec![range.lo, range.hi];
        for (i, &(a, c)) in levels.iter().enumerate() {
            cuts.extend(crossings(&self.chains[i], a, range.lo, range.hi));
            cuts.extend(crossings(&self.chains[i], c, range.lo, range.hi));
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let inside = |s: f64| {
            levels.iter().enumerate().all(|(i, &(a, c))| {
                let v = self.chains[i][0].eval(s);
                a <= v && v <= c
            })
        };
        let mut out = Vec::new();
        for w in cuts.windows(2) {
            if w[1] > w[0] && inside(0.5 * (w[0] + w[1])) {
                out.push(Interval::new(w[0], w[1]));
            }
        }
        merge(out)
    }

    /// `T chi_E (x)`.
    pub fn apply(&self, e: &GridSet, x: &[f64]) -> f64 {
        self.mu.union(&self.preimage(e, x, Direction::Forward)).unwrap_or(0.0)
    }

    /// `T* chi_F (y) = int_I chi_F(y + P(s)) d mu(s)`.
    pub fn apply_adjoint(&self, f: &GridSet, y: &[f64]) -> f64 {
        self.mu.union(&self.preimage(f, y, Direction::Adjoint)).unwrap_or(0.0)
    }
}

fn merge(sorted: Vec<Interval>) -> Vec<Interval> {
    let mut out: Vec<Interval> = Vec::with_capacity(sorted.len());
    for iv in sorted {
        match out.last_mut() {
            Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
            _ => out.push(iv),
        }
    }
    out
}

/// Roots of `chain[0](s) = level` in `[lo, hi]`, found by splitting at the
/// critical points (roots of `chain[1]`) and bisecting monotone pieces.
fn crossings(chain: &[FloatPoly], level: f64, lo: f64, hi: f64) -> Vec<f64> {
    let p = &chain[0];
    let deg = p.degree();
    if deg <= 0 || !(lo <= hi) {
        return Vec::new();
    }
    let f = |s: f64| p.eval(s) - level;
    let mut pts = vec![lo];
    if deg >= 2 {
        pts.extend(crossings(&chain[1..], 0.0, lo, hi));
    }
    pts.push(hi);
    let mut out: Vec<f64> = Vec::new();
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (f(a), f(b));
        if fa == 0.0 {
            out.push(a);
        }
        if fa * fb < 0.0 {
            out.push(bisect(&f, a, b, fa));
        }
    }
    if f(hi) == 0.0 {
        out.push(hi);
    }
    out.dedup();
    out
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moment_op(d: usize) -> AveragingOperator {
        AveragingOperator::new(PolyCurve::moment(d).unwrap(), Interval::new(0.0, 1.0), MuMeasure::new(0, d).unwrap())
            .unwrap()
    }

    fn unit_box(lo: [f64; 2]) -> GridSet {
        GridSet::single(GridBox::new(lo.to_vec(), vec![lo[0] + 1.0, lo[1] + 1.0]).unwrap())
    }

    #[test]
    fn sign_analysis_at_origin() {
        let op = moment_op(2);
        assert_eq!(op.apply(&unit_box([0.0, 0.0]), &[0.0, 0.0]), 0.0);
        assert!((op.apply(&unit_box([-1.0, -1.0]), &[0.0, 0.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn huge_box_gives_full_mass() {
        let op = moment_op(3);
        let e = GridSet::single(GridBox::cube(&[0.0; 3], 100.0).unwrap());
        assert!((op.apply(&e, &[0.3, -0.2, 0.5]) - 1.0).abs() < 1e-15);
        assert!((op.truncated(1.0, 0.25).apply(&e, &[0.0; 3]) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn preimage_of_slab() {
        // x - (s, s^2) with x = (1, 1): second coordinate 1 - s^2 in [0.5, 0.84]
        let op = moment_op(2);
        let e = GridSet::single(GridBox::new(vec![-5.0, 0.5], vec![5.0, 0.84]).unwrap());
        let pre = op.preimage(&e, &[1.0, 1.0], Direction::Forward);
        assert_eq!(pre.len(), 1);
        assert!((pre[0].lo - 0.4).abs() < 1e-14);
        assert!((pre[0].hi - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn weighted_measure_used() {
        let curve = PolyCurve::moment(2).unwrap();
        let mu = MuMeasure::new(3, 2).unwrap();
        let op = AveragingOperator::new(curve, Interval::new(0.0, 1.0), mu).unwrap();
        let e = GridSet::single(GridBox::cube(&[0.0; 2], 10.0).unwrap());
        assert!((op.apply(&e, &[0.0, 0.0]) - mu.n()).abs() < 1e-14);
    }

    #[test]
    fn crossings_of_oscillating_polynomial() {
        // (s - 0.2)(s - 0.5)(s - 0.9)
        let p = FloatPoly::new(vec![-0.09, 0.73, -1.6, 1.0]);
        let chain = vec![p.clone(), p.derivative(), p.derivative().derivative()];
        let r = crossings(&chain, 0.0, 0.0, 1.0);
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([0.2, 0.5, 0.9]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn unbounded_interval_rejected() {
        let curve = PolyCurve::moment(2).unwrap();
        assert!(AveragingOperator::new(curve, Interval::new(0.0, f64::INFINITY), MuMeasure::new(0, 2).unwrap()).is_err());
    }
}
