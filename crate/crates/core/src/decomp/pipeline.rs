use std::collections::HashMap;

use num_complex::Complex64;

use super::verify::{fit_power_law, OffsetRange, ShiftedTorsion};
use super::{d1_decompose, d2_decompose, DecompInterval, Interval, LineageStep, StepCase};
use crate::error::{Error, Result};
use crate::poly::PolyCurve;
use crate::roots::{find_roots, RootSet};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecompOptions {
    /// Certified root tolerance (relative to root magnitude above 1).
    pub root_tol: f64,
    /// Grid size for fitting and measuring the power law on each leaf.
    pub grid: usize,
}

impl Default for DecompOptions {
    fn default() -> Self {
        DecompOptions { root_tol: 1e-10, grid: 64 }
    }
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub leaves: Vec<DecompInterval>,
    /// Roots of `L_1, ..., L_d`.
    pub minor_roots: Vec<RootSet>,
    /// Pieces after the initial split at real roots of every minor.
    pub initial: Vec<Interval>,
    /// Upper bound on the leaf count depending only on `N` and `d`.
    pub bound: u128,
}

#[derive(Clone, Debug)]
struct Work {
    interval: Interval,
    center: Option<f64>,
    ancestors: Vec<f64>,
    lineage: Vec<LineageStep>,
}

/// Runs the full decomposition of the real line for a nondegenerate curve.
///
/// 1. split at every real root of `L_1, ..., L_d`;
/// 2. nearest-root partition with respect to the roots of `L_d`;
/// 3. for `n = 0..d-1`: gap/dyadic split around the current center with
///    respect to the roots of `L_{n+1}`; gaps keep the center, dyadic pieces
///    are re-partitioned by nearest root among the roots of `L_{n+1}` and all
///    ancestor centers (every resulting piece is kept);
/// 4. split at ancestor centers so none lies inside a leaf.
///
/// Each leaf then gets the best-fit power law `|L_P| ~ a |s - b|^k`.
pub fn dw_decompose(curve: &PolyCurve, opts: &DecompOptions) -> Result<Decomposition> {
    if !curve.is_nondegenerate() {
        return Err(Error::DegenerateCurve);
    }
    let d = curve.dim();
    let tol = opts.root_tol;
    let minor_roots = curve.minors().iter().map(|p| find_roots(p, tol)).collect::<Result<Vec<_>>>()?;

    // one representative per real location shared between minors
    let mut reals: Vec<f64> = minor_roots.iter().flat_map(RootSet::real_roots).collect();
    reals.sort_by(f64::total_cmp);
    let mut reps: Vec<f64> = Vec::new();
    for x in reals {
        match reps.last() {
            Some(&r) if (x - r).abs() <= tol * x.abs().max(1.0) => {}
            _ => reps.push(x),
        }
    }
    let snap = |z: Complex64| -> Complex64 {
        if z.im != 0.0 {
            return z;
        }
        let r = reps
            .iter()
            .copied()
            .find(|&r| (z.re - r).abs() <= tol * z.re.abs().max(1.0))
            .unwrap_or(z.re);
        Complex64::new(r, 0.0)
    };
    let roots: Vec<Vec<Complex64>> = minor_roots
        .iter()
        .map(|rs| {
            let mut v: Vec<Complex64> = rs.values().into_iter().map(snap).collect();
            v.dedup();
            v
        })
        .collect();

    let initial = Interval::REAL_LINE.split_at(&reps);
    let mut work: Vec<Work> = Vec::new();
    for j in &initial {
        for p in d1_decompose(*j, &roots[d - 1]) {
            work.push(Work {
                interval: p.interval,
                center: p.center,
                ancestors: p.center.into_iter().collect(),
                lineage: vec![
                    LineageStep { step: 0, case: StepCase::Initial, center: None },
                    LineageStep { step: 0, case: StepCase::Nearest, center: p.center },
                ],
            });
        }
    }

    for n in 0..d.saturating_sub(1) {
        let etas = &roots[n];
        let mut next = Vec::with_capacity(work.len());
        for w in work {
            match w.center {
                None => {
                    for p in d1_decompose(w.interval, etas) {
                        let mut item = w.clone();
                        item.interval = p.interval;
                        item.center = p.center;
                        item.ancestors.extend(p.center);
                        item.lineage.push(LineageStep { step: n + 1, case: StepCase::Uncentered, center: p.center });
                        next.push(item);
                    }
                }
                Some(b) => {
                    let betas: Vec<Complex64> = etas.iter().map(|z| z - b).collect();
                    for g in d2_decompose(w.interval, b, &betas) {
                        if g.is_gap() {
                            let mut item = w.clone();
                            item.interval = g.interval;
                            item.lineage.push(LineageStep { step: n + 1, case: StepCase::Gap, center: Some(b) });
                            next.push(item);
                            continue;
                        }
                        let mut targets = etas.clone();
                        for &a in &w.ancestors {
                            let z = Complex64::new(a, 0.0);
                            if !targets.contains(&z) {
                                targets.push(z);
                            }
                        }
                        for p in d1_decompose(g.interval, &targets) {
                            let mut item = w.clone();
                            item.interval = p.interval;
                            item.center = p.center;
                            if let Some(c) = p.center {
                                if !item.ancestors.contains(&c) {
                                    item.ancestors.push(c);
                                }
                            }
                            item.lineage.push(LineageStep { step: n + 1, case: StepCase::Dyadic, center: p.center });
                            next.push(item);
                        }
                    }
                }
            }
        }
        work = next;
    }

    let mut leaves_raw: Vec<Work> = Vec::new();
    for w in work {
        for piece in w.interval.split_at(&w.ancestors) {
            let mut item = w.clone();
            item.interval = piece;
            item.lineage.push(LineageStep { step: d, case: StepCase::Final, center: w.center });
            leaves_raw.push(item);
        }
    }
    leaves_raw.sort_by(|a, b| a.interval.lo.total_cmp(&b.interval.lo));

    let max_k = curve.torsion().degree().max(0) as usize;
    let mut shifted: HashMap<u64, ShiftedTorsion> = HashMap::new();
    let leaves = leaves_raw
        .into_iter()
        .map(|w| {
            let mut leaf = DecompInterval {
                interval: w.interval,
                b: w.center,
                k: 0,
                a: 1.0,
                c_lo: 1.0,
                c_hi: 1.0,
                lineage: w.lineage,
            };
            let center = leaf.sampling_center();
            let torsion =
                shifted.entry(center.to_bits()).or_insert_with(|| ShiftedTorsion::new(curve, center));
            let range = OffsetRange::of(&leaf.interval, center);
            let fit = fit_power_law(torsion, &range, opts.grid, if leaf.b.is_some() { max_k } else { 0 });
            leaf.k = fit.k;
            leaf.a = fit.a;
            leaf.c_lo = fit.c_lo;
            leaf.c_hi = fit.c_hi;
            leaf
        })
        .collect();

    Ok(Decomposition { leaves, minor_roots, initial, bound: piece_bound(curve.degree(), d) })
}

/// Upper bound on the number of leaves for degree `n` curves in dimension `d`.
///
/// With `D_j = max(0, j n - j(j+1)/2)` bounding `deg L_j`: the initial split
/// gives at most `1 + sum D_j` pieces; a nearest-root split with `m` roots
/// at most `max(1, 2m + 2m^2)`; a gap/dyadic split with `m` offsets at most
/// `6m + 2`; the final split at most `d + 1` per piece.
pub fn piece_bound(n: usize, d: usize) -> u128 {
    let deg = |j: usize| -> u128 { (j * n).saturating_sub(j * (j + 1) / 2) as u128 };
    let f1 = |m: u128| -> u128 { (2 * m + 2 * m * m).max(1) };
    let f2 = |m: u128| -> u128 { 6 * m + 2 };
    let mut b: u128 = 1 + (1..=d).map(deg).sum::<u128>();
    b = b.saturating_mul(f1(deg(d)));
    for step in 0..d.saturating_sub(1) {
        let m = deg(step + 1);
        b = b.saturating_mul(f2(m)).saturating_mul(f1(m + step as u128 + 1));
    }
    b.saturating_mul(d as u128 + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;

    fn curve(comps: &[&[i64]]) -> PolyCurve {
        PolyCurve::new(comps.iter().map(|c| Polynomial::from_i64s(c)).collect()).unwrap()
    }

    fn assert_cover(dec: &Decomposition) {
        let l = &dec.leaves;
        assert_eq!(l[0].interval.lo, f64::NEG_INFINITY);
        assert_eq!(l.last().unwrap().interval.hi, f64::INFINITY);
        for w in l.windows(2) {
            assert_eq!(w[0].interval.hi, w[1].interval.lo);
        }
        for leaf in l {
            if let Some(b) = leaf.b {
                assert!(!leaf.interval.contains(b));
            }
        }
        assert!((l.len() as u128) <= dec.bound);
    }

    #[test]
    fn moment_curve_is_one_flat_piece() {
        for d in 2..=5 {
            let dec = dw_decompose(&PolyCurve::moment(d).unwrap(), &DecompOptions::default()).unwrap();
            assert_eq!(dec.leaves.len(), 1);
            let leaf = &dec.leaves[0];
            assert_eq!((leaf.k, leaf.b), (0, None));
            let expect: f64 = (1..=d).map(|j| (1..=j).product::<usize>() as f64).product();
            assert!((leaf.a - expect).abs() < 1e-9 * expect);
            assert_cover(&dec);
        }
    }

    #[test]
    fn cusp_centers_at_zero() {
        let dec = dw_decompose(&curve(&[&[0, 0, 1], &[0, 0, 0, 1]]), &DecompOptions::default()).unwrap();
        assert_cover(&dec);
        assert_eq!(dec.leaves.len(), 2);
        for leaf in &dec.leaves {
            assert_eq!(leaf.b, Some(0.0));
            assert_eq!(leaf.k, 2);
            assert!((leaf.a - 6.0).abs() < 1e-9);
            assert!(leaf.spread() < 1.0 + 1e-9);
        }
    }

    #[test]
    fn cubic_graph_has_linear_torsion() {
        let c = curve(&[&[0, 1], &[0, -3, 0, 1]]);
        assert_eq!(c.torsion(), &Polynomial::from_i64s(&[0, 6]));
        let dec = dw_decompose(&c, &DecompOptions::default()).unwrap();
        assert_cover(&dec);
        for leaf in &dec.leaves {
            assert_eq!(leaf.b, Some(0.0));
            assert_eq!(leaf.k, 1);
        }
    }

    #[test]
    fn degenerate_curve_rejected() {
        let c = curve(&[&[0, 1], &[0, 2]]);
        assert!(matches!(dw_decompose(&c, &DecompOptions::default()), Err(Error::DegenerateCurve)));
    }

    #[test]
    fn bound_grows_with_degree() {
        assert!(piece_bound(3, 2) < piece_bound(6, 2));
        assert!(piece_bound(6, 2) < piece_bound(6, 3));
    }
}
