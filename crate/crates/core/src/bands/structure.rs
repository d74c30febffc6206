//! Band structures: partitions of a point tuple by weighted separation.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// `m(a, b) = |a - b| (a b)^{K / (d(d+1))}` on `(0, inf)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeparationMetric {
    pub k: usize,
    pub d: usize,
}

impl SeparationMetric {
    pub fn exponent(&self) -> f64 {
        self.k as f64 / (self.d * (self.d + 1)) as f64
    }

    pub fn eval(&self, a: f64, b: f64) -> f64 {
        (a - b).abs() * (a * b).powf(self.exponent())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum BandClass {
    Free,
    QuasiFree,
    Bound,
}

impl BandClass {
    pub fn name(self) -> &'static str {
        match self {
            BandClass::Free => "free",
            BandClass::QuasiFree => "quasi-free",
            BandClass::Bound => "bound",
        }
    }
}

/// Scales attached to a band structure. Separations are measured in the
/// weighted metric; bands split where it exceeds `delta * alpha1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandParams {
    pub delta: f64,
    pub delta_prime: f64,
    pub alpha1: f64,
    pub beta1: f64,
    pub k: usize,
    pub d: usize,
}

impl BandParams {
    pub fn metric(&self) -> SeparationMetric {
        SeparationMetric { k: self.k, d: self.d }
    }

    pub fn split_threshold(&self) -> f64 {
        self.delta * self.alpha1
    }

    fn validate(&self) -> Result<()> {
        let ok = [self.delta, self.delta_prime, self.alpha1, self.beta1].iter().all(|v| v.is_finite() && *v > 0.0);
        if !ok || self.d < 2 {
            return Err(Error::InvalidArgument(format!("band parameters must be positive: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BandStructure {
    indices: Vec<usize>,
    values: BTreeMap<usize, f64>,
    /// Bands ordered by position along the line, members ascending by index.
    bands: Vec<Vec<usize>>,
    class: BTreeMap<usize, BandClass>,
    quasi_bind: BTreeMap<usize, usize>,
    bind: BTreeMap<usize, usize>,
    /// Indices in increasing order of their points.
    order: Vec<usize>,
    params: BandParams,
}

/// First-stage bands on indices `1..=t.len()`.
pub fn build_bands(t: &[f64], params: &BandParams) -> Result<BandStructure> {
    let indices: Vec<usize> = (1..=t.len()).collect();
    build_bands_indexed(&indices, t, params)
}

/// Bands are the connected components of the relation "weighted metric at
/// most `delta * alpha1`". With `K > 0` the metric is not monotone along the
/// line, so every pair is linked, not only sorted neighbours.
pub fn build_bands_indexed(indices: &[usize], t: &[f64], params: &BandParams) -> Result<BandStructure> {
    params.validate()?;
    sorted_order(indices, t)?;
    let metric = params.metric();
    let threshold = params.split_threshold();
    let n = t.len();
    let mut root: Vec<usize> = (0..n).collect();
    fn find(root: &mut [usize], mut a: usize) -> usize {
        while root[a] != a {
            root[a] = root[root[a]];
            a = root[a];
        }
        a
    }
    for a in 0..n {
        for b in a + 1..n {
            if !(metric.eval(t[a], t[b]) > threshold) {
                let (ra, rb) = (find(&mut root, a), find(&mut root, b));
                root[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for a in 0..n {
        let r = find(&mut root, a);
        groups.entry(r).or_default().push(indices[a]);
    }
    BandStructure::from_partition(indices, t, groups.into_values().collect(), *params)
}

fn sorted_order(indices: &[usize], t: &[f64]) -> Result<Vec<usize>> {
    if indices.len() != t.len() || t.is_empty() {
        return Err(Error::InvalidArgument("need one point per index and at least one point".into()));
    }
    if t.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidArgument(format!("band points must lie in (0, inf): {t:?}")));
    }
    let mut pos: Vec<usize> = (0..t.len()).collect();
    pos.sort_by(|&a, &b| t[a].total_cmp(&t[b]));
    if pos.windows(2).any(|w| t[w[0]] == t[w[1]]) {
        return Err(Error::InvalidArgument("coincident points have no band structure".into()));
    }
    let mut seen = indices.to_vec();
    seen.sort_unstable();
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("repeated index".into()));
    }
    Ok(pos.into_iter().map(|p| indices[p]).collect())
}

impl BandStructure {
    /// Classifies an explicitly given partition.
    pub fn from_partition(indices: &[usize], t: &[f64], bands: Vec<Vec<usize>>, params: BandParams) -> Result<Self> {
        params.validate()?;
        let order = sorted_order(indices, t)?;
        let mut members: Vec<usize> = bands.iter().flatten().copied().collect();
        members.sort_unstable();
        let mut expected = indices.to_vec();
        expected.sort_unstable();
        if members != expected || bands.iter().any(Vec::is_empty) {
            return Err(Error::InvalidArgument("bands must partition the index set".into()));
        }
        let values: BTreeMap<usize, f64> = indices.iter().copied().zip(t.iter().copied()).collect();
        let mut bands: Vec<Vec<usize>> = bands
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        bands.sort_by(|a, b| {
            let lo = |band: &Vec<usize>| band.iter().map(|i| values[i]).fold(f64::INFINITY, f64::min);
            lo(a).total_cmp(&lo(b))
        });
        let mut class = BTreeMap::new();
        let mut quasi_bind = BTreeMap::new();
        let mut bind = BTreeMap::new();
        for band in &bands {
            let head = band[0];
            class.insert(head, BandClass::Free);
            match band.len() {
                1 => {}
                2 => {
                    class.insert(band[1], BandClass::QuasiFree);
                    quasi_bind.insert(band[1], head);
                }
                _ => {
                    for &i in &band[1..] {
                        class.insert(i, BandClass::Bound);
                        bind.insert(i, head);
                    }
                }
            }
        }
        Ok(BandStructure { indices: expected, values, bands, class, quasi_bind, bind, order, params })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn bands(&self) -> &[Vec<usize>] {
        &self.bands
    }

    pub fn params(&self) -> &BandParams {
        &self.params
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[&i]
    }

    /// Index order by increasing point value.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn class(&self, i: usize) -> BandClass {
        self.class[&i]
    }

    pub fn quasi_bind(&self) -> &BTreeMap<usize, usize> {
        &self.quasi_bind
    }

    pub fn bind(&self) -> &BTreeMap<usize, usize> {
        &self.bind
    }

    pub fn band_of(&self, i: usize) -> usize {
        self.bands.iter().position(|b| b.contains(&i)).expect("index in structure")
    }

    pub fn count(&self, c: BandClass) -> usize {
        self.class.values().filter(|&&x| x == c).count()
    }

    /// Free and quasi-free indices, ascending.
    pub fn lambda(&self) -> Vec<usize> {
        self.class.iter().filter(|(_, c)| **c != BandClass::Bound).map(|(i, _)| *i).collect()
    }

    /// Number of quasi-free indices.
    pub fn quasi_free_count(&self) -> usize {
        self.count(BandClass::QuasiFree)
    }

    /// Exactly `d` free or quasi-free indices, every even index free.
    pub fn counting_condition(&self) -> bool {
        self.lambda().len() == self.params.d
            && self.indices.iter().filter(|i| *i % 2 == 0).all(|&i| self.class(i) == BandClass::Free)
    }

    fn same_band(&self, i: usize, j: usize) -> bool {
        self.band_of(i) == self.band_of(j)
    }

    fn metric_of(&self, i: usize, j: usize) -> f64 {
        self.params.metric().eval(self.value(i), self.value(j))
    }
}

/// Violated pairs for the separation clauses of a band structure.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BandVerification {
    /// Indices in different bands closer than `delta * alpha1`.
    pub separation: Vec<(usize, usize)>,
    /// Quasi-bound pairs outside `(c0 * beta1, delta * alpha1)`.
    pub quasi: Vec<(usize, usize)>,
    /// Bound pairs not within `delta' * alpha1`.
    pub bound: Vec<(usize, usize)>,
}

impl BandVerification {
    pub fn passes(&self) -> bool {
        self.separation.is_empty() && self.quasi.is_empty() && self.bound.is_empty()
    }
}

pub fn verify_band_conclusions(bs: &BandStructure, c0: f64) -> BandVerification {
    let p = bs.params;
    let mut out = BandVerification::default();
    for (a, &i) in bs.indices.iter().enumerate() {
        for &j in &bs.indices[a + 1..] {
            if !bs.same_band(i, j) && !(bs.metric_of(i, j) > p.delta * p.alpha1) {
                out.separation.push((i, j));
            }
        }
    }
    for (&i, &j) in &bs.quasi_bind {
        let m = bs.metric_of(i, j);
        if !(c0 * p.beta1 < m && m < p.delta * p.alpha1) {
            out.quasi.push((i, j));
        }
    }
    for (&i, &j) in &bs.bind {
        if !(bs.metric_of(i, j) < p.delta_prime * p.alpha1) {
            out.bound.push((i, j));
        }
    }
    out
}

/// Result of the iterative refinement.
#[derive(Clone, Debug, PartialEq)]
pub struct RefinedBands {
    pub structure: BandStructure,
    /// Rounds used, the first build included.
    pub rounds: usize,
    pub converged: bool,
}

/// Rebuilds at `delta <- eps * delta`, `delta' <- eps * delta'` until every
/// bound pair sits within `delta' * alpha1`, for at most `2d` rounds.
pub fn refine_bands(indices: &[usize], t: &[f64], params: &BandParams, eps: f64) -> Result<RefinedBands> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("refinement factor must lie in (0, 1), got {eps}")));
    }
    let mut p = *params;
    let max_rounds = 2 * params.d;
    let mut bs = build_bands_indexed(indices, t, &p)?;
    for round in 1..=max_rounds {
        if verify_band_conclusions(&bs, 0.0).bound.is_empty() {
            return Ok(RefinedBands { structure: bs, rounds: round, converged: true });
        }
        if round == max_rounds {
            break;
        }
        p.delta *= eps;
        p.delta_prime *= eps;
        bs = build_bands_indexed(indices, t, &p)?;
    }
    Ok(RefinedBands { structure: bs, rounds: max_rounds, converged: false })
}

/// Largest `|t_i - t_j| / min(t_i, t_j)` over pairs sharing a band; requires
/// every point above `c * alpha1^n`.
pub fn within_band_comparability(bs: &BandStructure, c: f64, n: f64) -> Result<f64> {
    let floor = c * bs.params.alpha1.powf(n);
    if let Some(&i) = bs.indices.iter().find(|&&i| bs.value(i) < floor) {
        return Err(Error::Precondition(format!(
            "t_{i} = {} lies below the floor c * alpha1^n = {floor}",
            bs.value(i)
        )));
    }
    let mut worst: f64 = 0.0;
    for band in &bs.bands {
        for (a, &i) in band.iter().enumerate() {
            for &j in &band[a + 1..] {
                let (x, y) = (bs.value(i), bs.value(j));
                worst = worst.max((x - y).abs() / x.min(y));
            }
        }
    }
    Ok(worst)
}

/// Threshold realizing "much smaller than" for same-band comparability.
pub const COMPARABILITY_LIMIT: f64 = 0.5;

#[cfg(test)]
mod tests {
    use super::*;

    fn params(delta_alpha: f64, k: usize, d: usize) -> BandParams {
        BandParams { delta: delta_alpha, delta_prime: delta_alpha / 128.0, alpha1: 1.0, beta1: 1e-3, k, d }
    }

    #[test]
    fn small_example() {
        let bs = build_bands(&[0.1, 0.1001, 0.5], &params(0.01, 0, 2)).unwrap();
        assert_eq!(bs.bands(), &[vec![1, 2], vec![3]]);
        assert_eq!(bs.class(1), BandClass::Free);
        assert_eq!(bs.class(2), BandClass::QuasiFree);
        assert_eq!(bs.class(3), BandClass::Free);
        assert_eq!(bs.quasi_bind()[&2], 1);
        assert_eq!(bs.quasi_free_count(), 1);
    }

    #[test]
    fn separated_and_clustered() {
        let t = [0.9, 0.1, 0.5, 0.3];
        let far = build_bands(&t, &params(1e-3, 0, 2)).unwrap();
        assert_eq!(far.bands().len(), 4);
        assert_eq!(far.count(BandClass::Free), 4);
        let near = build_bands(&t, &params(10.0, 0, 2)).unwrap();
        assert_eq!(near.bands(), &[vec![1, 2, 3, 4]]);
        assert_eq!(near.count(BandClass::Bound), 3);
        assert_eq!(near.bind()[&4], 1);
        let pair = build_bands(&[0.5, 0.2], &params(10.0, 0, 2)).unwrap();
        assert_eq!(pair.class(2), BandClass::QuasiFree);
    }

    #[test]
    fn least_index_not_least_point_is_free() {
        let bs = build_bands(&[0.2, 0.1], &params(1.0, 0, 2)).unwrap();
        assert_eq!(bs.order(), &[2, 1]);
        assert_eq!(bs.class(1), BandClass::Free);
    }

    #[test]
    fn coincident_points_rejected() {
        assert!(build_bands(&[0.3, 0.3], &params(0.1, 0, 2)).is_err());
        assert!(build_bands(&[0.3, -0.3], &params(0.1, 0, 2)).is_err());
    }

    #[test]
    fn weighted_metric_changes_split() {
        // gap 0.05 at t ~ 0.01: weight (t t)^{K/6} with K = 3 shrinks it
        let t = [0.01, 0.06];
        assert_eq!(build_bands(&t, &params(0.01, 0, 2)).unwrap().bands().len(), 2);
        assert_eq!(build_bands(&t, &params(0.01, 3, 2)).unwrap().bands().len(), 1);
    }

    #[test]
    fn forced_violation_reported() {
        let p = params(0.01, 0, 2);
        let bs = BandStructure::from_partition(&[1, 2, 3], &[0.1, 0.5, 0.9], vec![vec![1, 2, 3]], p).unwrap();
        let v = verify_band_conclusions(&bs, 0.5);
        assert!(v.bound.contains(&(2, 1)) && v.bound.contains(&(3, 1)));
        assert!(!v.passes());
    }

    #[test]
    fn quasi_lower_bound() {
        let p = params(0.01, 0, 2);
        let bs = build_bands(&[0.1, 0.1001, 0.5], &p).unwrap();
        // c0 * beta1 = 5e-4 > gap 1e-4
        let v = verify_band_conclusions(&bs, 0.5);
        assert_eq!(v.quasi, vec![(2, 1)]);
        assert!(verify_band_conclusions(&bs, 0.05).passes());
    }

    #[test]
    fn refinement_splits_loose_bands() {
        let p = params(0.1, 0, 2);
        let t = [0.1, 0.15, 0.2];
        let r = refine_bands(&[1, 2, 3], &t, &p, 1.0 / 64.0).unwrap();
        assert!(r.converged);
        assert_eq!(r.rounds, 2);
        assert!(verify_band_conclusions(&r.structure, 0.0).passes());
    }

    #[test]
    fn comparability_within_bands() {
        let p = params(0.01, 0, 2);
        let bs = build_bands(&[0.1, 0.1001, 0.5], &p).unwrap();
        let r = within_band_comparability(&bs, 0.05, 1.0).unwrap();
        assert!(r < COMPARABILITY_LIMIT && r > 0.0);
        let single = build_bands(&[0.1, 0.5], &p).unwrap();
        assert_eq!(within_band_comparability(&single, 0.05, 1.0).unwrap(), 0.0);
        assert!(within_band_comparability(&bs, 0.5, 1.0).is_err());
    }
}
