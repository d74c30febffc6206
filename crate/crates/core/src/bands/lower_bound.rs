//! Separation consequences of tower tuples and the conditional lower bound
//! for the Jacobian in band coordinates.
//!
//! For a band structure with free or quasi-free set `Lambda`, the bound
//! indices are reparametrized as `t_j = tau_b + sigma_j tau_b^{-w}` around the
//! free index `b` they are bound to, and the Jacobian is taken in `tau` alone.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::{functionals, AveragingOperator, GridBox, GridSet};
use crate::poly::PolyCurve;

use super::exponents::TowerVariant;
use super::structure::{refine_bands, verify_band_conclusions, BandParams, BandStructure};
use super::tower::{build_tuple_tower, top_radius_constant, TowerParams, TowerSets};

/// Constant realizing "bounded below up to a constant" in the separation checks.
pub const ELIM_DIFF_CONSTANT: f64 = 0.125;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElimParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub n: f64,
    pub k: usize,
    pub d: usize,
    /// The tower constant; thresholds are `ELIM_DIFF_CONSTANT * c * scale * weight`.
    pub c: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ElimDiffReport {
    /// Violations `(k, j)` with `k` odd.
    pub odd: Vec<(usize, usize)>,
    /// Violations with `k < 2d` even.
    pub even: Vec<(usize, usize)>,
    /// Violations with `k = 2d`.
    pub top: Vec<(usize, usize)>,
    /// Pairs with `t_j, t_k` within a factor two of each other.
    pub comparable_pairs: usize,
    /// Pairs farther apart in ratio.
    pub distant_pairs: usize,
}

impl ElimDiffReport {
    pub fn passes(&self) -> bool {
        self.odd.is_empty() && self.even.is_empty() && self.top.is_empty()
    }
}

/// Checks the three pairwise separations on a complete `2d`-tuple.
pub fn check_elim_diff(t: &[f64], p: &ElimParams) -> Result<ElimDiffReport> {
    let top = 2 * p.d;
    if t.len() != top {
        return Err(Error::InvalidArgument(format!("expected a {top}-tuple, got {} entries", t.len())));
    }
    let e = p.k as f64 / (p.d * (p.d + 1)) as f64;
    let top_scale = p.alpha2.powf((1.0 + p.n) / 2.0) * p.alpha1.powf((1.0 - p.n) / 2.0);
    let mut out = ElimDiffReport::default();
    for k in 2..=top {
        for j in 1..k {
            let (tk, tj) = (t[k - 1], t[j - 1]);
            let scale = if k == top {
                top_scale
            } else if k % 2 == 1 {
                p.beta1
            } else {
                p.alpha1
            };
            let need = ELIM_DIFF_CONSTANT * p.c * scale * (tk * tj).powf(-e);
            let ratio = tk.max(tj) / tk.min(tj);
            if ratio <= 2.0 {
                out.comparable_pairs += 1;
            } else {
                out.distant_pairs += 1;
            }
            if !((tk - tj).abs() >= need) {
                let bucket = if k == top {
                    &mut out.top
                } else if k % 2 == 1 {
                    &mut out.odd
                } else {
                    &mut out.even
                };
                bucket.push((k, j));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LbjParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub n: f64,
    pub k: usize,
    /// Lower-bound constant for quasi-bound pairs.
    pub c0: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LbjValue {
    /// `|J(tau, sigma)|`.
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// `|J_P(tau)|` at the free and quasi-free points alone.
    pub jp: f64,
    pub quasi_free: usize,
    pub tau: Vec<f64>,
}

/// Evaluates both sides of the lower bound for `|J(tau, sigma)|` at the tuple
/// stored in `bs` (indices label alternation signs `(-1)^{i+1}`). Refuses if
/// the band clauses or the counting condition fail.
pub fn lower_bound_jp_product(curve: &PolyCurve, bs: &BandStructure, p: &LbjParams) -> Result<LbjValue> {
    let d = curve.dim();
    if bs.params().d != d {
        return Err(Error::InvalidArgument("band structure built for another dimension".into()));
    }
    let v = verify_band_conclusions(bs, p.c0);
    if !v.passes() {
        return Err(Error::Precondition(format!("band clauses violated: {v:?}")));
    }
    if !bs.counting_condition() {
        return Err(Error::Precondition(format!(
            "need exactly {d} free or quasi-free indices with every even index free, have {:?}",
            bs.lambda()
        )));
    }
    let w = 2.0 * p.k as f64 / (d * (d + 1)) as f64;
    let sign = |i: usize| if i % 2 == 1 { 1.0 } else { -1.0 };
    let lambda = bs.lambda();
    let mut m = DMatrix::<f64>::zeros(d, d);
    for (col, &b) in lambda.iter().enumerate() {
        let tb = bs.value(b);
        let mut v: Vec<f64> = curve.velocity(tb).iter().map(|x| sign(b) * x).collect();
        for (&j, _) in bs.bind().iter().filter(|(_, &f)| f == b) {
            let tj = bs.value(j);
            let chain = 1.0 - w * (tj - tb) / tb;
            for (acc, x) in v.iter_mut().zip(curve.velocity(tj)) {
                *acc += sign(j) * chain * x;
            }
        }
        for (row, x) in v.into_iter().enumerate() {
            m[(row, col)] = x;
        }
    }
    let lhs = m.determinant().abs();
    let tau: Vec<f64> = lambda.iter().map(|&b| bs.value(b)).collect();
    let jp = curve.jacobian(&tau).abs();
    let mcount = bs.quasi_free_count();
    let dd = d as f64;
    let rhs = p.alpha1.powf(dd * (dd - 1.0) / 2.0)
        * (p.beta1 / p.alpha1).powi(mcount as i32)
        * (p.alpha2 / p.alpha1).powf((1.0 + p.n) * (dd - 1.0) / 2.0)
        * tau.iter().map(|t| t.powf(w)).product::<f64>();
    Ok(LbjValue { lhs, rhs, ratio: lhs / rhs, jp, quasi_free: mcount, tau })
}

/// Configuration of a lower-bound campaign on one curve piece.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LbjCampaign {
    /// Complete tower tuples to evaluate.
    pub configurations: usize,
    pub candidates: usize,
    pub samples: usize,
    pub c: f64,
    pub delta: f64,
    pub eps: f64,
    pub seed: u64,
}

impl Default for LbjCampaign {
    fn default() -> Self {
        LbjCampaign { configurations: 1000, candidates: 64, samples: 2000, c: 0.125, delta: 0.125, eps: 1.0 / 64.0, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LbjSummary {
    pub alpha1: f64,
    pub beta1: f64,
    pub configurations: usize,
    pub evaluated: usize,
    /// Tuples for which no suffix admitted a valid band structure.
    pub skipped: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub worst: Vec<f64>,
    /// Evaluated configurations by quasi-free count.
    pub by_quasi_free: Vec<usize>,
    pub elim_diff_failures: usize,
}

/// The standard sets: `E1 = E2` a box around the origin with the half-widths
/// of the coordinate ranges of `P(I)`, `F` half that size around the center of `P(I)`.
pub fn standard_tower_sets(op: &AveragingOperator) -> Result<(GridSet, GridSet)> {
    let iv = op.interval();
    let mut half = Vec::new();
    let mut mid = Vec::new();
    for i in 0..op.dim() {
        let (a, b) = op.component_range(i, iv.lo, iv.hi);
        half.push(0.5 * (b - a));
        mid.push(0.5 * (a + b));
    }
    let e = GridBox::new(half.iter().map(|h| -h).collect(), half.clone())?;
    let f = GridBox::new(
        mid.iter().zip(&half).map(|(m, h)| m - 0.5 * h).collect(),
        mid.iter().zip(&half).map(|(m, h)| m + 0.5 * h).collect(),
    )?;
    Ok((GridSet::single(e), GridSet::single(f)))
}

/// Builds a tower on the standard sets and evaluates the lower bound on
/// every complete tuple, using the shortest suffix `k >= d` whose refined
/// band structure satisfies all clauses.
pub fn lbj_campaign(op: &AveragingOperator, cfg: &LbjCampaign) -> Result<LbjSummary> {
    let d = op.dim();
    let (e, f) = standard_tower_sets(op)?;
    let fun = functionals(op, &e, &f, cfg.samples, cfg.seed)?;
    let (alpha1, beta1) = (fun.alpha, fun.beta);
    let mut tp = TowerParams {
        c: cfg.c,
        c_prime: top_radius_constant(cfg.c, op.mu().weight_exponent()),
        alpha1,
        alpha2: alpha1,
        beta1,
        beta2: beta1,
        chains: cfg.configurations,
        candidates: cfg.candidates,
        seed: cfg.seed,
    };
    let sets = TowerSets { first: &e, second: &e, third: &f };
    let mut tower = build_tuple_tower(op, sets, TowerVariant::MlE, &tp)?;
    // grow the chain count until enough chains complete
    for _ in 0..4 {
        let done = tower.tuples().len();
        if done >= cfg.configurations {
            break;
        }
        let rate = done.max(1) as f64 / tp.chains as f64;
        tp.chains = ((cfg.configurations as f64 / rate) * 1.1).ceil() as usize + 16;
        tower = build_tuple_tower(op, sets, TowerVariant::MlE, &tp)?;
    }
    let tuples = &tower.tuples()[..tower.tuples().len().min(cfg.configurations)];
    let n = op.mu().n();
    let kexp = op.mu().k;
    let bp = BandParams {
        delta: cfg.delta,
        delta_prime: 0.5 * cfg.eps * cfg.delta,
        alpha1,
        beta1,
        k: kexp,
        d,
    };
    let lp = LbjParams { alpha1, alpha2: alpha1, beta1, n, k: kexp, c0: 0.5 * cfg.c };
    let ep = ElimParams { alpha1, alpha2: alpha1, beta1, n, k: kexp, d, c: cfg.c };
    let mut summary = LbjSummary {
        alpha1,
        beta1,
        configurations: tuples.len(),
        evaluated: 0,
        skipped: 0,
        min_ratio: f64::INFINITY,
        max_ratio: 0.0,
        worst: Vec::new(),
        by_quasi_free: vec![0; d],
        elim_diff_failures: 0,
    };
    for t in tuples {
        if !check_elim_diff(t, &ep)?.passes() {
            summary.elim_diff_failures += 1;
        }
        match evaluate_tuple(op.curve(), t, &bp, &lp, cfg.eps)? {
            Some(v) => {
                summary.evaluated += 1;
                summary.by_quasi_free[v.quasi_free] += 1;
                summary.max_ratio = summary.max_ratio.max(v.ratio);
                if v.ratio < summary.min_ratio {
                    summary.min_ratio = v.ratio;
                    summary.worst = t.clone();
                }
            }
            None => summary.skipped += 1,
        }
    }
    Ok(summary)
}

fn evaluate_tuple(curve: &PolyCurve, t: &[f64], bp: &BandParams, lp: &LbjParams, eps: f64) -> Result<Option<LbjValue>> {
    let d = bp.d;
    for k in d..2 * d {
        let indices: Vec<usize> = (2 * d - k + 1..=2 * d).collect();
        let values = &t[2 * d - k..];
        let refined = refine_bands(&indices, values, bp, eps)?;
        let bs = &refined.structure;
        if refined.converged && bs.counting_condition() && verify_band_conclusions(bs, lp.c0).passes() {
            return lower_bound_jp_product(curve, bs, lp).map(Some);
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bands::build_bands_indexed;
    use crate::decomp::Interval;
    use crate::operator::MuMeasure;

    fn bp(d: usize) -> BandParams {
        BandParams { delta: 0.01, delta_prime: 1e-4, alpha1: 1.0, beta1: 1e-3, k: 0, d }
    }

    fn lp() -> LbjParams {
        LbjParams { alpha1: 1.0, alpha2: 1.0, beta1: 1e-3, n: 1.0, k: 0, c0: 0.5 }
    }

    #[test]
    fn separated_plane_moment_curve() {
        // indices 3, 4 free; J = det[(1, 2 t3), -(1, 2 t4)] = 2 (t3 - t4) up to sign
        let curve = PolyCurve::moment(2).unwrap();
        let bs = build_bands_indexed(&[3, 4], &[0.2, 0.7], &bp(2)).unwrap();
        let v = lower_bound_jp_product(&curve, &bs, &lp()).unwrap();
        assert!((v.lhs - 1.0).abs() < 1e-14);
        assert_eq!(v.rhs, 1.0);
        assert!((v.jp - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quasi_free_pair_changes_rhs() {
        let curve = PolyCurve::moment(2).unwrap();
        let bs = build_bands_indexed(&[3, 4], &[0.2, 0.205], &bp(2)).unwrap();
        // 4 quasi-free but even: counting condition fails, refusal
        assert!(lower_bound_jp_product(&curve, &bs, &lp()).is_err());
        let bs = build_bands_indexed(&[2, 3], &[0.2, 0.205], &bp(2)).unwrap();
        let v = lower_bound_jp_product(&curve, &bs, &lp()).unwrap();
        assert_eq!(v.quasi_free, 1);
        assert!((v.rhs - 1e-3).abs() < 1e-18);
        assert!((v.lhs - 0.01).abs() < 1e-14);
    }

    #[test]
    fn bound_index_enters_column() {
        // d = 3 on indices 2..6: band {2, 3, 5} with 3, 5 bound to 2; 4 and 6 alone
        let curve = PolyCurve::moment(3).unwrap();
        let p = BandParams { delta: 0.05, delta_prime: 0.05, alpha1: 1.0, beta1: 1e-3, k: 0, d: 3 };
        let t = [0.1, 0.11, 0.5, 0.12, 0.8];
        let bs =
            BandStructure::from_partition(&[2, 3, 4, 5, 6], &t, vec![vec![2, 3, 5], vec![4], vec![6]], p).unwrap();
        let v = lower_bound_jp_product(&curve, &bs, &lp()).unwrap();
        let vel = |s: f64| [1.0, 2.0 * s, 3.0 * s * s];
        let (a, b, c) = (vel(0.1), vel(0.11), vel(0.12));
        let c1: Vec<f64> = (0..3).map(|i| -a[i] + b[i] + c[i]).collect();
        let c2: Vec<f64> = vel(0.5).iter().map(|x| -x).collect();
        let c3: Vec<f64> = vel(0.8).iter().map(|x| -x).collect();
        let det = c1[0] * (c2[1] * c3[2] - c2[2] * c3[1]) - c2[0] * (c1[1] * c3[2] - c1[2] * c3[1])
            + c3[0] * (c1[1] * c2[2] - c1[2] * c2[1]);
        assert!((v.lhs - det.abs()).abs() < 1e-14);
        assert_eq!(v.tau, vec![0.1, 0.5, 0.8]);
        // index 4 bound instead: an even index that is not free is refused
        let bs = BandStructure::from_partition(&[2, 3, 4, 5, 6], &t, vec![vec![2, 3, 4], vec![5], vec![6]], p).unwrap();
        assert!(lower_bound_jp_product(&curve, &bs, &lp()).is_err());
    }

    #[test]
    fn refusal_on_violated_clause() {
        let curve = PolyCurve::moment(2).unwrap();
        let bs = BandStructure::from_partition(&[3, 4], &[0.2, 0.7], vec![vec![3, 4]], bp(2)).unwrap();
        assert!(matches!(lower_bound_jp_product(&curve, &bs, &lp()), Err(Error::Precondition(_))));
    }

    #[test]
    fn elim_diff_branches() {
        let p = ElimParams { alpha1: 0.1, alpha2: 0.2, beta1: 0.01, n: 1.0, k: 0, d: 2, c: 0.125 };
        let r = check_elim_diff(&[0.1, 0.5, 0.9, 0.3], &p).unwrap();
        assert!(r.passes());
        assert!(r.distant_pairs > 0 && r.comparable_pairs > 0);
        // near-equal top pair below the alpha2-type threshold
        let r = check_elim_diff(&[0.1, 0.5, 0.9, 0.9 + 1e-5], &p).unwrap();
        assert_eq!(r.top, vec![(4, 3)]);
    }

    #[test]
    fn campaign_on_plane_moment_curve() {
        let op = AveragingOperator::new(PolyCurve::moment(2).unwrap(), Interval::new(0.0, 1.0), MuMeasure::new(0, 2).unwrap())
            .unwrap();
        let s = lbj_campaign(&op, &LbjCampaign { configurations: 200, ..Default::default() }).unwrap();
        assert!(s.configurations > 0);
        assert!(s.evaluated > 0);
        assert!(s.min_ratio > 0.0);
    }
}
