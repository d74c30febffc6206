//! Greedy discrete tuple towers.
//!
//! Starting from `x0`, level `i` draws `t_i` so that `x0 + sum_{j<=i} (-1)^{j+1} P(t_j)`
//! lands in the level's target set. The admissible parameters are exact
//! preimage intervals; floor and near-point excisions are removed and the
//! surviving `mu`-mass is compared with the demanded level. Chains that fall
//! short are discarded; if every chain falls short the tower fails.

use crate::decomp::Interval;
use crate::error::{Error, Result};
use crate::operator::{AveragingOperator, Direction, GridSet};
use crate::rng::{derive_seed, par_samples, stream};

use super::exponents::TowerVariant;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TowerParams {
    /// Constant for demanded masses, floors and excision radii.
    pub c: f64,
    /// Radius constant for the top-level near-point excision.
    pub c_prime: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Number of independent chains.
    pub chains: usize,
    /// Candidate starting points examined for `x0`.
    pub candidates: usize,
    pub seed: u64,
}

/// Radius constant `c^{2+w}` for the top-level excision; it keeps every
/// excised ball inside `[t_j/2, 2 t_j]` with `mu`-mass at most `c * alpha2`.
pub fn top_radius_constant(c: f64, w: f64) -> f64 {
    c.powf(2.0 + w)
}

impl TowerParams {
    pub fn gamma1(&self) -> f64 {
        self.alpha1.max(self.beta1)
    }
}

/// The three sets of a tower: `(E1, E2, F)` for the `E_2` variant,
/// `(E, F1, F2)` for the `F_2` variant.
#[derive(Clone, Copy, Debug)]
pub struct TowerSets<'a> {
    pub first: &'a GridSet,
    pub second: &'a GridSet,
    pub third: &'a GridSet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    E,
    E1,
    E2,
    F,
    F1,
    F2,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::E => "E",
            Target::E1 => "E1",
            Target::E2 => "E2",
            Target::F => "F",
            Target::F1 => "F1",
            Target::F2 => "F2",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TowerLevel {
    pub level: usize,
    pub target: Target,
    pub demand: f64,
    pub floor: f64,
    pub survivors: usize,
    pub discarded: usize,
    /// Smallest surviving mass among retained chains.
    pub min_mass: f64,
    /// The level's prefix samples `(t_1, ..., t_i)` of retained chains.
    pub samples: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TupleTower {
    pub variant: TowerVariant,
    pub x0: Vec<f64>,
    pub params: TowerParams,
    pub n: f64,
    pub k: usize,
    pub levels: Vec<TowerLevel>,
}

impl TupleTower {
    /// Complete tuples of chains that reached the top.
    pub fn tuples(&self) -> &[Vec<f64>] {
        &self.levels.last().expect("tower has levels").samples
    }
}

struct Schedule {
    target: Target,
    dir: Direction,
    demand: f64,
    floor: f64,
    /// Excision radius constant for earlier points (`None` at the top).
    radius: Option<f64>,
}

fn schedule(variant: TowerVariant, d: usize, p: &TowerParams, n: f64) -> Vec<Schedule> {
    let top = variant.levels(d);
    let g1 = p.c * p.gamma1().powf(n);
    (1..=top)
        .map(|i| {
            let odd = i % 2 == 1;
            let dir = if odd { Direction::Adjoint } else { Direction::Forward };
            match variant {
                TowerVariant::MlE => {
                    if i == top {
                        Schedule { target: Target::E2, dir, demand: p.c * p.alpha2, floor: p.c * p.alpha2.powf(n), radius: None }
                    } else if odd {
                        Schedule { target: Target::F, dir, demand: p.c * p.beta1, floor: g1, radius: Some(p.beta1) }
                    } else {
                        Schedule { target: Target::E1, dir, demand: p.c * p.alpha1, floor: g1, radius: Some(p.alpha1) }
                    }
                }
                TowerVariant::MlF => {
                    if i == top {
                        Schedule { target: Target::F2, dir, demand: p.c * p.beta2, floor: p.c * p.beta2.powf(n), radius: None }
                    } else if odd {
                        Schedule { target: Target::F1, dir, demand: p.c * p.beta1, floor: g1, radius: Some(p.beta1) }
                    } else {
                        Schedule { target: Target::E, dir, demand: p.c * p.alpha1, floor: g1, radius: Some(p.alpha1) }
                    }
                }
            }
        })
        .collect()
}

fn set_for<'a>(variant: TowerVariant, sets: &TowerSets<'a>, target: Target) -> &'a GridSet {
    match (variant, target) {
        (TowerVariant::MlE, Target::E1) => sets.first,
        (TowerVariant::MlE, Target::E2) => sets.second,
        (TowerVariant::MlE, _) => sets.third,
        (TowerVariant::MlF, Target::E) => sets.first,
        (TowerVariant::MlF, Target::F1) => sets.second,
        (TowerVariant::MlF, _) => sets.third,
    }
}

/// Removes `(a, b)` from a sorted union of intervals.
pub fn excise(pieces: &[Interval], a: f64, b: f64) -> Vec<Interval> {
    let mut out = Vec::with_capacity(pieces.len() + 1);
    for p in pieces {
        if b <= p.lo || a >= p.hi {
            out.push(*p);
            continue;
        }
        if p.lo < a {
            out.push(Interval::new(p.lo, a));
        }
        if b < p.hi {
            out.push(Interval::new(b, p.hi));
        }
    }
    out
}

/// Admissible parameters for the next level after all excisions.
fn admissible(
    op: &AveragingOperator,
    set: &GridSet,
    x: &[f64],
    step: &Schedule,
    prior: &[f64],
    p: &TowerParams,
    n: f64,
    w: f64,
) -> Vec<Interval> {
    let mut pieces = op.preimage(set, x, step.dir);
    pieces = excise(&pieces, f64::NEG_INFINITY, step.floor);
    for &tj in prior {
        match step.radius {
            Some(scale) => {
                let r = p.c * scale * tj.powf(-w);
                pieces = excise(&pieces, tj - r, tj + r);
            }
            None => {
                // top scale: alpha2, or beta2 in the F_2 variant
                let cut = p.c * p.alpha2.powf(n);
                if tj < cut {
                    pieces = excise(&pieces, f64::NEG_INFINITY, 2.0 * cut);
                } else {
                    let r = p.c_prime * p.alpha2 * tj.powf(-w);
                    pieces = excise(&pieces, tj - r, tj + r);
                }
            }
        }
    }
    pieces
}

enum ChainEnd {
    Complete,
    Short { level: usize, mass: f64 },
}

struct Chain {
    prefix: Vec<f64>,
    masses: Vec<f64>,
    end: ChainEnd,
}

/// Builds a tower for `variant`; `sets` are `(E1, E2, F)` or `(E, F1, F2)`.
pub fn build_tuple_tower(
    op: &AveragingOperator,
    sets: TowerSets<'_>,
    variant: TowerVariant,
    params: &TowerParams,
) -> Result<TupleTower> {
    let d = op.dim();
    let mut p = *params;
    if !(p.c > 0.0 && p.c_prime > 0.0) || p.chains == 0 || p.candidates == 0 {
        return Err(Error::InvalidArgument("tower constants and counts must be positive".into()));
    }
    for v in [p.alpha1, p.alpha2, p.beta1, p.beta2] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!("tower scales must be positive, got {v}")));
        }
    }
    for s in [sets.first, sets.second, sets.third] {
        if s.dim() != d || !(s.measure() > 0.0) {
            return Err(Error::InvalidArgument("tower sets must be positive-measure subsets of R^d".into()));
        }
    }
    if variant == TowerVariant::MlF {
        // the top level of the F_2 variant is governed by beta2
        p.alpha2 = p.beta2;
    }
    let n = op.mu().n();
    let w = op.mu().weight_exponent();
    let steps = schedule(variant, d, &p, n);

    let start = sets.first;
    let first = set_for(variant, &sets, steps[0].target);
    let cands = par_samples(p.candidates, derive_seed(p.seed, 21), |_, rng| {
        let b = &start.boxes()[pick_box(start, rand::Rng::random::<f64>(rng))];
        let x = b.sample(rng);
        let m = op.mu().union(&admissible(op, first, &x, &steps[0], &[], &p, n, w)).unwrap_or(0.0);
        (x, m)
    });
    let (x0, _) = cands
        .into_iter()
        .fold((Vec::new(), f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best });

    let chain_seed = derive_seed(p.seed, 22);
    let chains: Vec<Chain> = par_samples(p.chains, chain_seed, |i, _| {
        let mut rng = stream(chain_seed, i as u64);
        let mut x = x0.clone();
        let mut prefix = Vec::with_capacity(steps.len());
        let mut masses = Vec::with_capacity(steps.len());
        for (lvl, step) in steps.iter().enumerate() {
            let set = set_for(variant, &sets, step.target);
            let pieces = admissible(op, set, &x, step, &prefix, &p, n, w);
            let mass = op.mu().union(&pieces).unwrap_or(0.0);
            if mass < step.demand {
                return Chain { prefix, masses, end: ChainEnd::Short { level: lvl + 1, mass } };
            }
            let Some(s) = op.mu().sample_union(&pieces, &mut rng) else {
                return Chain { prefix, masses, end: ChainEnd::Short { level: lvl + 1, mass } };
            };
            let ps = op.point(s);
            let sign = if step.dir == Direction::Adjoint { 1.0 } else { -1.0 };
            for (xi, pi) in x.iter_mut().zip(&ps) {
                *xi += sign * pi;
            }
            prefix.push(s);
            masses.push(mass);
        }
        Chain { prefix, masses, end: ChainEnd::Complete }
    });

    let mut levels = Vec::with_capacity(steps.len());
    for (lvl, step) in steps.iter().enumerate() {
        let reached: Vec<&Chain> = chains.iter().filter(|c| c.prefix.len() > lvl).collect();
        let dropped = chains
            .iter()
            .filter(|c| matches!(c.end, ChainEnd::Short { level, .. } if level == lvl + 1))
            .count();
        if reached.is_empty() {
            let have = chains
                .iter()
                .filter_map(|c| match c.end {
                    ChainEnd::Short { level, mass } if level == lvl + 1 => Some(mass),
                    _ => None,
                })
                .fold(0.0, f64::max);
            return Err(Error::MassShortfall { level: lvl + 1, have, need: step.demand });
        }
        levels.push(TowerLevel {
            level: lvl + 1,
            target: step.target,
            demand: step.demand,
            floor: step.floor,
            survivors: reached.len(),
            discarded: dropped,
            min_mass: reached.iter().map(|c| c.masses[lvl]).fold(f64::INFINITY, f64::min),
            samples: reached.iter().map(|c| c.prefix[..=lvl].to_vec()).collect(),
        });
    }
    Ok(TupleTower { variant, x0, params: *params, n, k: op.mu().k, levels })
}

fn pick_box(set: &GridSet, u: f64) -> usize {
    let mut acc = 0.0;
    for (i, b) in set.boxes().iter().enumerate() {
        acc += b.volume() / set.measure();
        if u < acc {
            return i;
        }
    }
    set.boxes().len() - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::MuMeasure;
    use crate::poly::PolyCurve;

    fn op(k: usize) -> AveragingOperator {
        AveragingOperator::new(PolyCurve::moment(2).unwrap(), Interval::new(0.0, 1.0), MuMeasure::new(k, 2).unwrap())
            .unwrap()
    }

    fn params(alpha2: f64) -> TowerParams {
        TowerParams {
            c: 0.125,
            c_prime: 0.125,
            alpha1: 0.5,
            alpha2,
            beta1: 0.5,
            beta2: 0.5,
            chains: 50,
            candidates: 8,
            seed: 4,
        }
    }

    #[test]
    fn large_ball_builds_every_level() {
        let o = op(0);
        let ball = GridSet::ball(&[0.0, 0.0], 4.0, 16).unwrap();
        let t = build_tuple_tower(&o, TowerSets { first: &ball, second: &ball, third: &ball }, TowerVariant::MlE, &params(0.5))
            .unwrap();
        assert_eq!(t.levels.len(), 4);
        for l in &t.levels {
            assert!(l.min_mass >= l.demand);
            assert!(l.samples.iter().all(|s| s.len() == l.level && s[l.level - 1] >= l.floor));
        }
        assert_eq!(t.tuples().len(), 50);
        // alternating sums land in the targets
        for tup in t.tuples() {
            let mut x = t.x0.clone();
            for (i, s) in tup.iter().enumerate() {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                for (a, b) in x.iter_mut().zip(o.point(*s)) {
                    *a += sign * b;
                }
                assert!(ball.contains(&x));
            }
        }
    }

    #[test]
    fn unsatisfiable_top_demand() {
        let o = op(0);
        let ball = GridSet::ball(&[0.0, 0.0], 4.0, 16).unwrap();
        let err = build_tuple_tower(&o, TowerSets { first: &ball, second: &ball, third: &ball }, TowerVariant::MlE, &params(9.0))
            .unwrap_err();
        assert!(matches!(err, Error::MassShortfall { level: 4, .. }), "{err:?}");
    }

    #[test]
    fn near_point_excision_mass() {
        for k in [0usize, 1, 3] {
            let o = op(k);
            let (w, n) = (o.mu().weight_exponent(), o.mu().n());
            let (c, alpha2): (f64, f64) = (0.125, 0.3);
            let cp = top_radius_constant(c, w);
            for tj in [c * alpha2.powf(n), 0.3, 0.9] {
                let r = cp * alpha2 * tj.powf(-w);
                assert!(r <= c * tj);
                let m = o.mu().interval(tj - r, tj + r).unwrap();
                assert!(m <= c * alpha2, "K {k} t {tj}: {m}");
            }
        }
    }

    #[test]
    fn excise_pieces() {
        let p = vec![Interval::new(0.0, 1.0), Interval::new(2.0, 3.0)];
        assert_eq!(excise(&p, 0.5, 2.5), vec![Interval::new(0.0, 0.5), Interval::new(2.5, 3.0)]);
    }
}
