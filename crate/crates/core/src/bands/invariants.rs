//! Randomized invariant checks for band structures.

use rand::seq::SliceRandom;
use rand::Rng;

use super::structure::{build_bands_indexed, refine_bands, verify_band_conclusions, BandClass, BandParams, BandStructure};
use super::two_stage::{build_two_stage_bands, TwoStageParams};
use crate::error::Result;
use crate::rng::{par_samples, SampleRng};

/// `k` points in `(0, 1]`: each new point is either uniform or a copy of an
/// earlier one moved by a log-uniform amount in `[1e-9, 1e-1]`, so clusters
/// at many scales occur. Consecutive points differ by at least `1e-12`.
pub fn random_configuration(k: usize, rng: &mut SampleRng) -> Vec<f64> {
    let mut t: Vec<f64> = Vec::with_capacity(k);
    while t.len() < k {
        let x = if t.is_empty() || rng.random_bool(0.5) {
            rng.random_range(0.01..1.0)
        } else {
            let base = t[rng.random_range(0..t.len())];
            let gap = 10f64.powf(rng.random_range(-9.0..-1.0));
            let x = if rng.random_bool(0.5) { base + gap } else { base - gap };
            if !(0.001..=1.0).contains(&x) {
                continue;
            }
            x
        };
        if t.iter().all(|&y| (x - y).abs() > 1e-12) {
            t.push(x);
        }
    }
    t
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BandInvariantReport {
    pub configurations: usize,
    /// Some index lacks exactly one class and one band.
    pub totality: usize,
    /// Bands at `delta` not nested in bands at `2 delta`.
    pub monotonicity: usize,
    /// Rebuilding from the points or from the partition changes the structure.
    pub idempotence: usize,
    /// Refinement hit its round limit.
    pub unconverged: usize,
    /// Converged structures violating a separation, quasi or bound clause.
    pub clauses: usize,
    /// First offending configuration, if any.
    pub witness: Option<Vec<f64>>,
}

impl BandInvariantReport {
    pub fn passes(&self) -> bool {
        self.totality + self.monotonicity + self.idempotence + self.unconverged + self.clauses == 0
    }
}

fn is_total(bs: &BandStructure) -> bool {
    let mut seen: Vec<usize> = bs.bands().iter().flatten().copied().collect();
    seen.sort_unstable();
    if seen != bs.indices() {
        return false;
    }
    bs.bands().iter().all(|band| {
        band.iter().enumerate().all(|(pos, &i)| {
            let want = match (pos, band.len()) {
                (0, _) => BandClass::Free,
                (_, 2) => BandClass::QuasiFree,
                _ => BandClass::Bound,
            };
            bs.class(i) == want
                && match want {
                    BandClass::Free => !bs.bind().contains_key(&i) && !bs.quasi_bind().contains_key(&i),
                    BandClass::QuasiFree => bs.quasi_bind().get(&i) == Some(&band[0]),
                    BandClass::Bound => bs.bind().get(&i) == Some(&band[0]),
                }
        })
    })
}

fn is_refinement(fine: &BandStructure, coarse: &BandStructure) -> bool {
    fine.bands().iter().all(|band| band.iter().all(|&i| coarse.band_of(i) == coarse.band_of(band[0])))
}

/// Draws `configurations` tuples of `d..=2d-1` points with `K` in `0..=2` and
/// checks totality, monotonicity in `delta`, idempotence and, after
/// refinement, the separation/quasi/bound clauses with `c0 = 1/2`.
pub fn check_band_invariants(configurations: usize, d: usize, seed: u64) -> Result<BandInvariantReport> {
    let eps = 1.0 / 64.0;
    let rows = par_samples(configurations, seed, |_, rng| -> Result<(u8, Vec<f64>)> {
        let k = rng.random_range(d..=2 * d - 1);
        let t = random_configuration(k, rng);
        let delta = 0.125;
        let params = BandParams {
            delta,
            delta_prime: 0.5 * eps * delta,
            alpha1: 1.0,
            beta1: 1e-14,
            k: rng.random_range(0..=2),
            d,
        };
        let idx: Vec<usize> = (1..=k).collect();
        let bs = build_bands_indexed(&idx, &t, &params)?;
        let mut flags = 0u8;
        if !is_total(&bs) {
            flags |= 1;
        }
        let coarse = build_bands_indexed(&idx, &t, &BandParams { delta: 2.0 * delta, ..params })?;
        if !is_refinement(&bs, &coarse) {
            flags |= 2;
        }
        let again = build_bands_indexed(&idx, &t, &params)?;
        let from_parts = BandStructure::from_partition(&idx, &t, bs.bands().to_vec(), params)?;
        if again != bs || from_parts != bs {
            flags |= 4;
        }
        let refined = refine_bands(&idx, &t, &params, eps)?;
        if !refined.converged {
            flags |= 8;
        } else if !verify_band_conclusions(&refined.structure, 0.5).passes() || !is_total(&refined.structure) {
            flags |= 16;
        }
        Ok((flags, t))
    });
    let mut report = BandInvariantReport { configurations, ..Default::default() };
    for row in rows {
        let (flags, t) = row?;
        report.totality += (flags & 1 != 0) as usize;
        report.monotonicity += (flags & 2 != 0) as usize;
        report.idempotence += (flags & 4 != 0) as usize;
        report.unconverged += (flags & 8 != 0) as usize;
        report.clauses += (flags & 16 != 0) as usize;
        if flags != 0 && report.witness.is_none() {
            report.witness = Some(t);
        }
    }
    Ok(report)
}

/// Parameters used for the synthetic two-scale data.
pub fn two_scale_params(d: usize) -> TwoStageParams {
    let eps = 1.0 / 64.0;
    let delta = 0.1;
    let delta_prime = 0.5 * eps * delta;
    let rho = 0.5 * delta_prime;
    TwoStageParams {
        delta,
        delta_prime,
        rho,
        rho_prime: 0.5 * eps * rho,
        alpha1: 1.0,
        beta1: 1e-9,
        beta2: 1e-8,
        gamma2: 1e-2,
        c_n: 0.5,
        eps,
        k: 0,
        d,
    }
}

fn log_uniform(rng: &mut SampleRng, lo: f64, hi: f64) -> f64 {
    lo * (hi / lo).powf(rng.random::<f64>())
}

/// Random sizes summing to `total`.
fn composition(total: usize, rng: &mut SampleRng) -> Vec<usize> {
    let mut parts = Vec::new();
    let mut left = total;
    while left > 0 {
        let s = rng.random_range(1..=left.min(3));
        parts.push(s);
        left -= s;
    }
    parts
}

/// Offsets of a cluster of `size` points: a pair gets a gap in
/// `[pair_lo, pair_hi]`, larger clusters fit in diameter `tight`.
fn cluster(size: usize, pair_lo: f64, pair_hi: f64, tight: f64, rng: &mut SampleRng) -> Vec<f64> {
    match size {
        1 => vec![0.0],
        2 => vec![0.0, log_uniform(rng, pair_lo, pair_hi)],
        _ => {
            let step = tight / size as f64;
            (0..size).map(|j| j as f64 * step * rng.random_range(0.9..1.0)).collect()
        }
    }
}

/// `2d - 1` points separated at two scales, built so the first stage splits
/// at `delta * alpha1` and the band of the last index splits again at
/// `rho * gamma2`, with every pair clear of the forbidden windows.
pub fn two_scale_configuration(p: &TwoStageParams, rng: &mut SampleRng) -> Vec<f64> {
    let total = 2 * p.d - 1;
    let first_split = p.delta * p.alpha1;
    let second_split = p.rho * p.gamma2;
    let last_size = rng.random_range(1..=total.min(4));
    let others = composition(total - last_size, rng);
    let sub = composition(last_size, rng);

    // second-stage subclusters, spaced well beyond `rho * gamma2`
    let mut last_cluster = Vec::new();
    let mut base = 0.0;
    for &s in &sub {
        let c = cluster(s, 4.0 * p.c_n * p.beta2, 0.5 * second_split, 0.5 * p.rho_prime * p.gamma2, rng);
        let width = c.last().copied().unwrap_or(0.0);
        last_cluster.extend(c.iter().map(|x| base + x));
        base += width + log_uniform(rng, 2.0 * second_split, 4.0 * second_split);
    }
    let last_offsets = last_cluster.clone();

    let mut groups: Vec<Vec<f64>> = others
        .iter()
        .map(|&s| cluster(s, 4.0 * p.c_n * p.beta1, 0.5 * first_split, 0.5 * p.delta_prime * p.alpha1, rng))
        .collect();
    groups.push(last_offsets);
    let last_group = groups.len() - 1;
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.shuffle(rng);

    let mut points: Vec<(f64, bool)> = Vec::new();
    let mut x = 0.05;
    for g in order {
        for (j, off) in groups[g].iter().enumerate() {
            points.push((x + off, g == last_group && j == 0));
        }
        x += groups[g].last().copied().unwrap_or(0.0) + 2.0 * first_split;
    }
    // the last index sits on the first point of its group, others shuffled
    let anchor = points.iter().position(|p| p.1).expect("last group present");
    let last_value = points.remove(anchor).0;
    let mut rest: Vec<f64> = points.into_iter().map(|p| p.0).collect();
    rest.shuffle(rng);
    rest.push(last_value);
    rest
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TwoStageSummary {
    pub configurations: usize,
    pub failures: usize,
    pub witness: Option<Vec<f64>>,
}

/// Builds and verifies two-stage bands on synthetic two-scale data.
pub fn check_two_stage_synthetic(configurations: usize, d: usize, seed: u64) -> Result<TwoStageSummary> {
    let p = two_scale_params(d);
    let rows = par_samples(configurations, seed, |_, rng| -> Result<(bool, Vec<f64>)> {
        let t = two_scale_configuration(&p, rng);
        let tb = build_two_stage_bands(&t, &p)?;
        Ok((tb.verify().passes(), t))
    });
    let mut out = TwoStageSummary { configurations, ..Default::default() };
    for row in rows {
        let (ok, t) = row?;
        if !ok {
            out.failures += 1;
            out.witness.get_or_insert(t);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn random_configurations_are_distinct() {
        let mut rng = stream(3, 0);
        for _ in 0..100 {
            let t = random_configuration(7, &mut rng);
            assert_eq!(t.len(), 7);
            assert!(t.iter().all(|&x| x > 0.0 && x <= 1.0));
        }
    }

    #[test]
    fn invariants_hold() {
        for d in 2..=5 {
            let r = check_band_invariants(200, d, 11).unwrap();
            assert!(r.passes(), "d = {d}: {r:?}");
        }
    }

    #[test]
    fn synthetic_two_scale_data_satisfies_clauses() {
        for d in 2..=5 {
            let r = check_two_stage_synthetic(200, d, 5).unwrap();
            assert_eq!(r.failures, 0, "d = {d}: {r:?}");
        }
    }
}
