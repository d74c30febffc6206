//! Command dispatch: each command runs module operations and records one
//! check per verified property.

use std::time::Instant;

use num_bigint::BigInt;
use rand::Rng;

use super::config::RunConfig;
use super::schema::{fmt_f64, fmt_list, CheckRecord, Status, Table, VerificationReport};
use crate::bands::{
    build_bands_indexed, build_tuple_tower, check_band_invariants, check_two_stage_synthetic, lbj_campaign,
    random_configuration, r_d, refine_bands, standard_tower_sets, top_radius_constant, validate_exponent_bookkeeping,
    verify_band_conclusions, BandParams, BandStructure, LbjCampaign, TowerParams, TowerSets, TowerVariant,
};
use crate::decomp::{
    comparability_grid, dw_decompose, normalize_piece, verify_geometric_inequality, DecompInterval, DecompOptions,
    Decomposition, Interval,
};
use crate::error::{Error, Result};
use crate::jacobian::{check_identity_jp_equals_jd, check_l1_derivative_bound, check_partial_bound, check_vandermonde_family};
use crate::operator::{
    check_mle, check_mlf, dyadic_scales, endpoint_exponents, functionals, knapp_sweep, rwt_ratio, AveragingOperator,
    GridSet, MuMeasure,
};
use crate::poly::{superfactorial, PolyCurve, Rational};
use crate::rng::{derive_seed, stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Decompose,
    VerifyIdentity,
    VerifyVandermonde,
    VerifyDerivativeBounds,
    VerifyGeometric,
    VerifyLbj,
    BandsBuild,
    BandsVerify,
    TowerBuild,
    OperatorRatio,
    OperatorSweepKnapp,
    OperatorCheckMle,
    OperatorCheckMlf,
}

impl Command {
    pub const ALL: [Command; 13] = [
        Command::Decompose,
        Command::VerifyIdentity,
        Command::VerifyVandermonde,
        Command::VerifyDerivativeBounds,
        Command::VerifyGeometric,
        Command::VerifyLbj,
        Command::BandsBuild,
        Command::BandsVerify,
        Command::TowerBuild,
        Command::OperatorRatio,
        Command::OperatorSweepKnapp,
        Command::OperatorCheckMle,
        Command::OperatorCheckMlf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Decompose => "decompose",
            Command::VerifyIdentity => "verify-identity",
            Command::VerifyVandermonde => "verify-vandermonde",
            Command::VerifyDerivativeBounds => "verify-derivative-bounds",
            Command::VerifyGeometric => "verify-geometric",
            Command::VerifyLbj => "verify-lbj",
            Command::BandsBuild => "bands-build",
            Command::BandsVerify => "bands-verify",
            Command::TowerBuild => "tower-build",
            Command::OperatorRatio => "operator-ratio",
            Command::OperatorSweepKnapp => "operator-sweep-knapp",
            Command::OperatorCheckMle => "operator-check-mle",
            Command::OperatorCheckMlf => "operator-check-mlf",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Command::ALL.into_iter().find(|c| c.name() == s)
    }

    /// Parameters accepted under `[params]`.
    pub fn params(self) -> &'static [&'static str] {
        match self {
            Command::Decompose => &["grid", "leaf"],
            Command::VerifyIdentity => &["max_rel_error", "exact_tuples", "max_nested_dim"],
            Command::VerifyVandermonde => &["max_dim", "max_sum"],
            Command::VerifyDerivativeBounds => &["grid", "partial_samples"],
            Command::VerifyGeometric => &["leaf"],
            Command::VerifyLbj => &["configurations", "candidates", "c", "delta", "eps", "golden", "leaf"],
            Command::BandsBuild => &["points", "size", "d", "k", "delta", "delta_prime", "alpha1", "beta1", "c0", "eps"],
            Command::BandsVerify => &["configurations", "dmin", "dmax"],
            Command::TowerBuild => &["variant", "chains", "candidates", "c", "k", "leaf"],
            Command::OperatorRatio => &["p", "q", "k", "leaf", "e_center", "e_radius", "f_center", "f_radius"],
            Command::OperatorSweepKnapp => &["dmin", "dmax", "t0", "kmin", "kmax", "k", "max_over_min"],
            Command::OperatorCheckMle => &["k", "cells", "e_radius", "f_radius", "f_at", "margin"],
            Command::OperatorCheckMlf => &["k", "cells", "e_radius", "f_radius", "f_at", "eta", "c", "margin"],
        }
    }
}

/// Validates `cfg` for `cmd`, runs it and times it.
pub fn run(cmd: Command, cfg: &RunConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    cfg.check_params(cmd.params())?;
    let start = Instant::now();
    let mut report = VerificationReport::new(cmd.name(), cfg.echo());
    match cmd {
        Command::Decompose => decompose(cfg, &mut report)?,
        Command::VerifyIdentity => verify_identity(cfg, &mut report)?,
        Command::VerifyVandermonde => verify_vandermonde(cfg, &mut report)?,
        Command::VerifyDerivativeBounds => verify_derivative_bounds(cfg, &mut report)?,
        Command::VerifyGeometric => verify_geometric(cfg, &mut report)?,
        Command::VerifyLbj => verify_lbj(cfg, &mut report)?,
        Command::BandsBuild => bands_build(cfg, &mut report)?,
        Command::BandsVerify => bands_verify(cfg, &mut report)?,
        Command::TowerBuild => tower_build(cfg, &mut report)?,
        Command::OperatorRatio => operator_ratio(cfg, &mut report)?,
        Command::OperatorSweepKnapp => sweep_knapp(cfg, &mut report)?,
        Command::OperatorCheckMle => check_mle_cmd(cfg, &mut report)?,
        Command::OperatorCheckMlf => check_mlf_cmd(cfg, &mut report)?,
    }
    report.wall_time = Some(start.elapsed().as_secs_f64());
    Ok(report)
}

/// Turns a module error into a failed check; configuration errors pass through.
fn guard(name: &str, anchor: &str, f: impl FnOnce() -> Result<CheckRecord>) -> Result<CheckRecord> {
    match f() {
        Ok(c) => Ok(c),
        Err(e @ Error::Config { .. }) => Err(e),
        Err(e) => Ok(CheckRecord::new(name, anchor, Status::Fail).witness("error", e.to_string())),
    }
}

fn decomposition(curve: &PolyCurve, cfg: &RunConfig) -> Result<Decomposition> {
    dw_decompose(curve, &DecompOptions { root_tol: cfg.tolerances.root, ..DecompOptions::default() })
}

fn lineage(leaf: &DecompInterval) -> String {
    let steps: Vec<String> = leaf
        .lineage
        .iter()
        .map(|s| match s.center {
            Some(c) => format!("{}@{}", s.case.as_str(), fmt_f64(c)),
            None => s.case.as_str().to_string(),
        })
        .collect();
    steps.join(">")
}

fn endpoints(iv: &Interval) -> String {
    format!("{},{}", fmt_f64(iv.lo), fmt_f64(iv.hi))
}

/// Leaves selected by the optional `leaf` parameter.
fn selected_leaves(cfg: &RunConfig, dec: &Decomposition) -> Result<Vec<usize>> {
    if cfg.params.contains_key("leaf") {
        let i = cfg.param_usize("leaf", 0)?;
        if i >= dec.leaves.len() {
            return Err(Error::config("params.leaf", format!("only {} leaves", dec.leaves.len())));
        }
        return Ok(vec![i]);
    }
    Ok((0..dec.leaves.len()).collect())
}

fn decompose(cfg: &RunConfig, report: &mut VerificationReport) -> Result<()> {
    let curve = cfg.curve()?;
    let grid = cfg.param_usize("grid", 64)?;
    let dec = decomposition(&curve, cfg)?;
    let bound = dec.bound as f64;
    report.checks.push(
        CheckRecord::new("leaf-count", "leaf-count-bound", Status::from_bool((dec.leaves.len() as f64) <= bound))
            .measure("leaves", dec.leaves.len() as f64)
            .measure("bound", bound),
    );
    let mut leaves = Table::new("leaves", &["index", "lo", "hi", "k", "a", "spread"]);
    for (i, leaf) in dec.leaves.iter().enumerate() {
        let spread = leaf.spread();
        report.checks.push(
            CheckRecord::new(
                format!("leaf-{i}.comparability"),
                "torsion-comparability",
                Status::from_bool(spread <= cfg.tolerances.comparability),
            )
            .measure("spread", spread)
            .measure("c_lo", leaf.c_lo)
            .measure("c_hi", leaf.c_hi)
            .measure("k", leaf.k as f64)
            .measure("a", leaf.a)
            .witness("interval", endpoints(&leaf.interval))
            .witness("center", leaf.b.map(fmt_f64).unwrap_or_else(|| "none".into()))
            .witness("lineage", lineage(leaf)),
        );
        leaves.push(vec![i as f64, leaf.interval.lo, leaf.interval.hi, leaf.k as f64, leaf.a, spread]);
    }
    report.tables.push(leaves);
    let which = cfg.param_usize("leaf", 0)?;
    if let Some(leaf) = dec.leaves.get(which) {
        let mut t = Table::new(format!("comparability.leaf-{which}"), &["s", "ratio"]);
        for (s, r) in comparability_grid(leaf, &curve, grid) {
            t.push(vec![s, r]);
        }
        report.tables.push(t);
    }
    Ok(())
}

fn is_moment_curve(curve: &PolyCurve) -> bool {
    PolyCurve::moment(curve.dim()).is_ok_and(|m| m.components() == curve.components())
}

fn random_rational(rng: &mut impl Rng) -> Rational {
    Rational::new(BigInt::from(rng.random_range(-1000i64..=1000)), BigInt::from(rng.random_range(1i64..=1000)))
}

fn verify_identity(cfg: &RunConfig, report: &mut VerificationReport) -> Result<()> {
    let curve = cfg.curve()?;
    let seed = cfg.seed()?;
    let d = curve.dim();
    let default_err = if d <= 3 { 1e-6 } else { 1e-4 };
    let max_err = cfg.param_positive("max_rel_error", default_err)?;
    let samples = cfg.samples_or(50);
    if is_moment_curve(&curve) {
        let want = Rational::from_integer(superfactorial(d));
        let torsion = curve.torsion();
        let ok = torsion.is_constant() && torsion.coeff(0) == want;
        report.checks.push(
            CheckRecord::new("exact.torsion", "moment-torsion-constant", Status::from_bool(ok))
                .witness("torsion", format!("{:?}", torsion.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>()))
                .witness("expected", want.to_string()),
        );
        let tuples = cfg.param_usize("exact_tuples", 100)?;
        let dfact: BigInt = (1..=d as u64).map(BigInt::from).product();
        let mut rng = stream(derive_seed(seed, 3), 0);
        let mut bad = None;
        for _ in 0..tuples {
            let t: Vec<Rational> = (0..d).map(|_| random_rational(&mut rng)).collect();
            let mut v = Rational::from_integer(dfact.clone());
            for k in 0..d {
                for i in 0..k {
                    v *= &t[k] - &t[i];
                }
            }
            if curve.jacobian_exact(&t) != v {
                bad = Some(t);
                break;
            }
        }
        let mut c = CheckRecord::new("exact.jacobian", "moment-jacobian-vandermonde", Status::from_bool(bad.is_none()))
            .measure("tuples", tuples as f64);
        if let Some(t) = bad {
            c = c.witness("tuple", t.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(","));
        }
        report.checks.push(c);
    }
    // The ladder integrates over d(d-1)/2 nested axes.
    let nested = d * (d - 1) / 2;
    let max_nested = cfg.param_usize("max_nested_dim", 6)?;
    if nested > max_nested {
        report.checks.push(
            CheckRecord::new("identity", "nested-jacobian-identity", Status::Warn)
                .measure("nested_dim", nested as f64)
                .measure("max_nested_dim", max_nested as f64)
                .witness("skipped", "nested quadrature dimension over budget; raise params.max_nested_dim to force"),
        );
        return Ok(());
    }
    let pieces = match cfg.interval()? {
        Some(iv) => vec![iv],
        None => decomposition(&curve, cfg)?.initial,
    };
    for (i, piece) in pieces.iter().enumerate() {
        let name = format!("piece-{i}.identity");
        let rec = guard(&name, "nested-jacobian-identity", || {
            let r = check_identity_jp_equals_jd(&curve, piece, samples, cfg.tolerances.quadrature, derive_seed(seed, 100 + i as u64))?;
            Ok(CheckRecord::new(&name, "nested-jacobian-identity", Status::from_bool(r.max_rel_error <= max_err))
                .measure("max_rel_error", r.max_rel_error)
                .measure("max_rel_estimate", r.max_rel_estimate)
                .measure("threshold", max_err)
                .measure("samples", r.samples as f64)
                .witness("piece", endpoints(piece))
                .witness("worst", fmt_list(&r.worst)))
        })?;
        report.checks.push(rec);
    }
    Ok(())
}

fn verify_vandermonde(cfg: &RunConfig, report: &mut VerificationReport) -> Result<()> {
    let max_dim = cfg.param_usize("max_dim", 4)?;
    let max_sum = cfg.param_usize("max_sum", 20)? as u32;
    let s = check_vandermonde_family(max_dim, max_sum);
    let mut c = CheckRecord::new("family", "power-determinant-factorization", Status::from_bool(s.failures.is_empty()))
        .measure("lists", s.lists as f64)
        .measure("max_terms", s.max_terms as f64)
        .measure("failures", s.failures.len() as f64);
    if let Some((alpha, msg)) = s.failures.first() {
        c = c.witness("exponents", format!("{alpha:?}")).witness("error", msg.clone());
    }
    report.checks.push(c);
    Ok(())
}

fn verify_derivative_bounds(cfg: &RunConfig, report: &mut VerificationReport) -> Result<()> {
    let curve = cfg.curve()?;
    let grid = cfg.param_usize("grid", 256)?;
    let partial = cfg.param_usize("partial_samples", 0)?;
    let seed = if partial > 0 { Some(cfg.seed()?) } else { None };
    let dec = decomposition(&curve, cfg)?;
    let d = curve.dim();
    for (i, leaf) in dec.leaves.iter().enumerate() {
        let name = format!("leaf-{i}.l1-derivative");
        let rec = guard(&name, "l1-log-derivative", || {
            let n = normalize_piece(leaf, &curve)?;
            let r = check_l1_derivative_bound(&n.curve, &n.interval, grid)?;
            Ok(CheckRecord::new(&name, "l1-log-derivative", Status::from_bool(r.passes()))
                .measure("measured", r.measured)
                .measure("degree", r.degree as f64)
                .witness("s", fmt_f64(r.witness))
                .witness("interval", endpoints(&leaf.interval)))
        })?;
        report.checks.push(rec);
        if let Some(seed) = seed {
            for subset in [vec![0usize], (0..d).collect::<Vec<_>>()] {
                let label: Vec<String> = subset.iter().map(|j| (j + 1).to_string()).collect();
                let name = format!("leaf-{i}.partial-{}", label.join("-"));
                let rec = guard(&name, "jacobian-partial-bound", || {
                    let n = normalize_piece(leaf, &curve)?;
                    let r = check_partial_bound(&n.curve, &n.interval, &subset, partial, derive_seed(seed, i as u64))?;
                    let status = if r.max_ratio.is_finite() { Status::Pass } else { Status::Warn };
                    Ok(CheckRecord::new(&name, "jacobian-partial-bound", status)
                        .measure("max_ratio", r.max_ratio)
                        .measure("resampled", r.resampled as f64)
                        .witness("tau", fmt_list(&r.witness)))
                })?;
                report.checks.push(rec);
            }
        }
    }
    Ok(())
}

fn verify_geometric(cfg: &RunConfig, report: &mut VerificationReport) -> Result<()> {
    let curve = cfg.curve()?;
    let seed = cfg.seed()?;
    let samples = cfg.samples_or(100_000);
    let dec = decomposition(&curve, cfg)?;
    let mut table = Table::new("geometric", &["index", "min_ratio", "max_ratio", "spread"]);
    for i in selected_leaves(cfg, &dec)? {
        let leaf = &dec.leaves[i];
        let spread = leaf.spread();
        report.checks.push(
            CheckRecord::new(
                format!("leaf-{i}.comparability"),
                "torsion-comparability",
                Status::from_bool(spread <= cfg.tolerances.comparability),
            )
            .measure("spread", spread)
            .witness("interval", endpoints(&leaf.interval)),
        );
        let r = verify_geometric_inequality(leaf, &curve, samples, derive_seed(seed, i as u64));
        report.checks.push(
            CheckRecord::new(
                format!("leaf-{i}.geometric"),
                "geometric-inequality",
                Status::from_bool(r.min_ratio > 0.0 && r.min_ratio.is_finite()),
            )
            .measure("min_ratio", r.min_ratio)
            .measure("max_ratio", r.max_ratio)
            .measure("samples", r.samples as f64)
            .measure("resampled", r.resampled as f64)
            .witness("tuple", fmt_list(&r.witness)),
        );
        table.push(vec![i as f64, r.min_ratio, r.max_ratio, spread]);
    }
    report.tables.push(table);
    Ok(())
}

fn verify_lbj(cfg: &RunConfig, report: &mut VerificationReport) -> Result<()> {
    let curve = cfg.curve()?;
    let seed = cfg.seed()?;
    let d = curve.dim();
    let base = LbjCampaign::default();
    let campaign = LbjCampaign {
        configurations: cfg.param_usize("configurations", base.configurations)?,
        candidates: cfg.param_usize("candidates", base.candidates)?,
        samples: cfg.samples_or(base.samples),
        c: cfg.param_positive("c", base.c)?,
        delta: cfg.param_positive("delta", base.delta)?,
        eps: cfg.param_positive("eps", base.eps)?,
        seed,
    };
    let golden = cfg.param_f64("golden", 0.0)?;
    let rec = guard("exponents", "exponent-bookkeeping", || {
        let cases = validate_exponent_bookkeeping(d)?;
        let ok = r_d(4) == 4 && r_d(5) == 6;
        Ok(CheckRecord::new("exponents", "exponent-bookkeeping", Status::from_bool(ok))
            .measure("cases", cases as f64)
            .measure("r_d", r_d(d) as f64))
    })?;
    report.checks.push(rec);
    let dec = decomposition(&curve, cfg)?;
    let mut table = Table::new("lbj", &["index", "k", "evaluated", "skipped", "min_ratio", "max_ratio"]);
    for i in selected_leaves(cfg, &dec)? {
        let leaf = &dec.leaves[i];
        let name = format!("leaf-{i}.lbj");
        let mut row = None;
        let mut elim = None;
        let rec = guard(&name, "conditional-jacobian-lower-bound", || {
            let n = normalize_piece(leaf, &curve)?;
            let op = AveragingOperator::new(n.curve.clone(), n.interval, MuMeasure::new(n.k, d)?)?;
            let c = LbjCampaign { seed: derive_seed(seed, i as u64), ..campaign };
            let s = lbj_campaign(&op, &c)?;
            let ok = s.evaluated > 0 && s.min_ratio > 0.0 && s.min_ratio >= golden;
            // separations hold up to an unspecified constant; a shortfall is reported, not failed
            let sep = if s.elim_diff_failures == 0 { Status::Pass } else { Status::Warn };
            elim = Some(
                CheckRecord::new(format!("leaf-{i}.separations"), "tower-separations", sep)
                    .measure("failures", s.elim_diff_failures as f64)
                    .measure("configurations", s.configurations as f64),
            );
            row = Some(vec![i as f64, n.k as f64, s.evaluated as f64, s.skipped as f64, s.min_ratio, s.max_ratio]);
            let mut rec = CheckRecord::new(&name, "conditional-jacobian-lower-bound", Status::from_bool(ok))
                .measure("min_ratio", s.min_ratio)
                .measure("max_ratio", s.max_ratio)
                .measure("golden", golden)
                .measure("configurations", s.configurations as f64)
                .measure("evaluated", s.evaluated as f64)
                .measure("skipped", s.skipped as f64)
                .measure("alpha1", s.alpha1)
                .measure("beta1", s.beta1);
            for (m, count) in s.by_quasi_free.iter().enumerate() {
                rec = rec.measure(&format!("quasi_free_{m}"), *count as f64);
            }
            Ok(rec.witness("worst", fmt_list(&s.worst)))
        })?;
        report.checks.push(rec);
        report.checks.extend(elim);
        if let Some(r) = row {
            table.push(r);
        }
    }
    report.tables.push(table);
    Ok(())
}

fn format_bands(bs: &BandStructure) -> String {
    let parts: Vec<String> =
        bs.bands().iter().map(|b| b.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")).collect();
    parts.join("|")
}

fn format_classes(bs: &BandStructure) -> String {
    let parts: Vec<String> = bs.indices().iter().map(|&i| format!("{i}:{}", bs.class(i).name())).collect();
    parts.join(" ")
}

fn bands_build(cfg: &RunConfig, report: &mut VerificationReport) -> Result<()> {
    let d = match &cfg.curve {
        Some(_) => cfg.curve()?.dim(),
        None => cfg.param_usize("d", 3)?,
    };
    if d < 2 {
        return Err(Error::config("params.d", "dimension must be at least 2"));
    }
    let t = match cfg.param_list("points")? {
        Some(t) => t,
        None => {
            let size = cfg.param_usize("size", 2 * d - 1)?;
            random_configuration(size.max(1), &mut stream(cfg.seed()?, 0))
        }
    };
    let delta = cfg.param_positive("delta", 0.125)?;
    let eps = cfg.param_f64("eps", 0.0)?;
    let params = BandParams {
        delta,
        delta_prime: cfg.param_positive("delta_prime", delta / 128.0)?,
        alpha1: cfg.param_positive("alpha1", 1.0)?,
        beta1: cfg.param_positive("beta1", 1e-14)?,
        k: cfg.param_usize("k", 0)?,
        d,
    };
    let c0 = cfg.param_positive("c0", 0.5)?;
    let indices: Vec<usize> = (1..=t.len()).collect();
    let (bs, rounds, converged) = if eps > 0.0 {
        let r = refine_bands(&indices, &t, &params, eps).map_err(|e| Error::config("params", e.to_string()))?;
        (r.structure, r.rounds, r.converged)
    } else {
        let bs = build_bands_indexed(&indices, &t, &params).map_err(|e| Error::config("params.points", e.to_string()))?;
        (bs, 1, true)
    };
    let v = verify_band_conclusions(&bs, c0);
    let pairs = |p: &[(usize, usize)]| p.iter().map(|(a, b)| format!("{a}-{b}")).collect::<Vec<_>>().join(" ");
    report.checks.push(
        CheckRecord::new("clauses", "band-structure-clauses", Status::from_bool(v.passes() && converged))
            .measure("bands", bs.bands().len() as f64)
            .measure("free", bs.count(crate::bands::BandClass::Free) as f64)
            .measure("quasi_free", bs.quasi_free_count() as f64)
            .measure("bound", bs.count(crate::bands::BandClass::Bound) as f64)
            .measure("rounds", rounds as f64)
            .witness("points", fmt_list(&t))
            .witness("bands", format_bands(&bs))
            .witness("classes", format_classes(&bs))
            .witness("separation_violations", pairs(&v.separation))
            .witness("quasi_violations", pairs(&v.quasi))
            .witness("bound_violations", pairs(&v.bound)),
    );
    report.checks.push(
        CheckRecord::new("counting", "band-counting-condition", if bs.counting_condition() { Status::Pass } else { Status::Warn })
            .measure("lambda", bs.lambda().len() as f64)
            .measure("d", d as f64),
    );
    Ok(())
}

fn bands_verify(cfg: &RunConfig, report: &mut VerificationReport) -> Result<()> {
    let seed = cfg.seed()?;
    let configurations = cfg.param_usize("configurations", 1000)?;
    let dmin = cfg.param_usize("dmin", 2)?.max(2);
    let dmax = cfg.param_usize("dmax", 5)?;
    for d in dmin..=dmax {
        let name = format!("d{d}.invariants");
        let rec = guard(&name, "band-invariants", || {
            let r = check_band_invariants(configurations, d, derive_seed(seed, d as u64))?;
            let mut c = CheckRecord::new(&name, "band-invariants", Status::from_bool(r.passes()))
                .measure("configurations", r.configurations as f64)
                .measure("totality", r.totality as f64)
                .measure("monotonicity", r.monotonicity as f64)
                .measure("idempotence", r.idempotence as f64)
                .measure("unconverged", r.unconverged as f64)
                .measure("clauses", r.clauses as f64);
            if let Some(w) = r.witness {
                c = c.witness("points", fmt_list(&w));
            }
            Ok(c)
        })?;
        report.checks.push(rec);
        let name = format!("d{d}.two-stage");
        let rec = guard(&name, "two-stage-bands", || {
            let r = check_two_stage_synthetic(configurations, d, derive_seed(seed, 100 + d as u64))?;
            let mut c = CheckRecord::new(&name, "two-stage-bands", Status::from_bool(r.failures == 0))
                .measure("configurations", r.configurations as f64)
                .measure("failures", r.failures as f64);
            if let Some(w) = r.witness {
                c = c.witness("points", fmt_list(&w));
            }
            Ok(c)
        })?;
        report.checks.push(rec);
    }
    Ok(())
}

/// The operator of a run: a normalized leaf when `leaf` is given, otherwise
/// the configured interval (default `[0, 1]`) with weight exponent `k`.
fn operator_for(cfg: &RunConfig, curve: &PolyCurve) -> Result<AveragingOperator> {
    let d = curve.dim();
    if cfg.params.contains_key("leaf") {
        let dec = decomposition(curve, cfg)?;
        let i = selected_leaves(cfg, &dec)?[0];
        let n = normalize_piece(&dec.leaves[i], curve)?;
        return AveragingOperator::new(n.curve, n.interval, MuMeasure::new(n.k, d)?);
    }
    let iv = cfg.interval()?.unwrap_or(Interval::new(0.0, 1.0));
    let k = cfg.param_usize("k", 0)?;
    AveragingOperator::new(curve.clone(), iv, MuMeasure::new(k, d)?).map_err(|e| Error::config("interval", e.to_string()))
}

fn tower_build(cfg: &RunConfig, report: &mut VerificationReport) -> Result<()> {
    let curve = cfg.curve()?;
    let seed = cfg.seed()?;
    let op = operator_for(cfg, &curve)?;
    let variant = match cfg.param_str("variant", "mle")?.as_str() {
        "mle" => TowerVariant::MlE,
        "mlf" => TowerVariant::MlF,
        other => return Err(Error::config("params.variant", format!("expected mle or mlf, got {other:?}"))),
    };
    let c = cfg.param_positive("c", 0.125)?;
    let (e, f) = standard_tower_sets(&op)?;
    let fun = functionals(&op, &e, &f, cfg.samples_or(2000), derive_seed(seed, 1))?;
    let params = TowerParams {
        c,
        c_prime: top_radius_constant(c, op.mu().weight_exponent()),
        alpha1: fun.alpha,
        alpha2: fun.alpha,
        beta1: fun.beta,
        beta2: fun.beta,
        chains: cfg.param_usize("chains", 200)?,
        candidates: cfg.param_usize("candidates", 64)?,
        seed: derive_seed(seed, 2),
    };
    let sets = match variant {
        TowerVariant::MlE => TowerSets { first: &e, second: &e, third: &f },
        TowerVariant::MlF => TowerSets { first: &e, second: &f, third: &f },
    };
    let name = format!("tower.{}", variant.name());
    let mut levels = Table::new(format!("tower.{}", variant.name()), &["level", "demand", "floor", "survivors", "discarded", "min_mass"]);
    let rec = guard(&name, "tuple-tower", || {
        let tower = build_tuple_tower(&op, sets, variant, &params)?;
        for l in &tower.levels {
            levels.push(vec![l.level as f64, l.demand, l.floor, l.survivors as f64, l.discarded as f64, l.min_mass]);
        }
        let complete = tower.tuples().len();
        let mut rec = CheckRecord::new(&name, "tuple-tower", Status::from_bool(complete > 0))
            .measure("levels", tower.levels.len() as f64)
            .measure("complete", complete as f64)
            .measure("alpha1", params.alpha1)
            .measure("beta1", params.beta1)
            .witness("x0", fmt_list(&tower.x0));
        if let Some(t) = tower.tuples().first() {
            rec = rec.witness("tuple", fmt_list(t));
        }
        Ok(rec)
    })?;
    report.checks.push(rec);
    report.tables.push(levels);
    Ok(())
}

fn cube_set(center: &[f64], radius: f64) -> Result<GridSet> {
    Ok(GridSet::single(crate::operator::GridBox::cube(center, radius)?))
}

fn point_param(cfg: &RunConfig, key: &str, d: usize) -> Result<Option<Vec<f64>>> {
    match cfg.param_list(key)? {
        Some(v) if v.len() != d => Err(Error::config(format!("params.{key}"), format!("expected {d} coordinates"))),
        other => Ok(other),
    }
}

fn operator_ratio(cfg: &RunConfig, report: &mut VerificationReport) -> Result<()> {
    let curve = cfg.curve()?;
    let seed = cfg.seed()?;
    let op = operator_for(cfg, &curve)?;
    let d = op.dim();
    let (pd, qd) = endpoint_exponents(d);
    let p = cfg.param_f64("p", pd)?;
    let q = cfg.param_f64("q", qd)?;
    let (mut e, mut f) = standard_tower_sets(&op)?;
    if let Some(c) = point_param(cfg, "e_center", d)? {
        e = cube_set(&c, cfg.param_positive("e_radius", 0.5)?)?;
    }
    if let Some(c) = point_param(cfg, "f_center", d)? {
        f = cube_set(&c, cfg.param_positive("f_radius", 0.5)?)?;
    }
    let rec = guard("ratio", "restricted-weak-type", || {
        let r = rwt_ratio(&op, &e, &f, p, q, cfg.samples_or(4000), seed)?;
        let fun = &r.functionals;
        report.checks.push(
            CheckRecord::new("duality", "operator-duality", Status::from_bool(fun.duality_consistent()))
                .measure("primal", fun.t_value)
                .measure("dual", fun.dual_value)
                .measure("gap", fun.duality_gap())
                .measure("allowance", fun.error + fun.dual_error),
        );
        Ok(CheckRecord::new("ratio", "restricted-weak-type", Status::from_bool(r.ratio.is_finite()))
            .measure("ratio", r.ratio)
            .measure("error", r.error)
            .measure("p", p)
            .measure("q", q)
            .measure("t_value", fun.t_value)
            .measure("alpha", fun.alpha)
            .measure("beta", fun.beta)
            .measure("e_measure", e.measure())
            .measure("f_measure", f.measure()))
    })?;
    report.checks.push(rec);
    Ok(())
}

fn sweep_knapp(cfg: &RunConfig, report: &mut VerificationReport) -> Result<()> {
    let seed = cfg.seed()?;
    let samples = cfg.samples_or(2000);
    let kmin = cfg.param_usize("kmin", 1)? as u32;
    let kmax = cfg.param_usize("kmax", 10)? as u32;
    if kmin > kmax {
        return Err(Error::config("params.kmin", "kmin exceeds kmax"));
    }
    let limit = cfg.param_positive("max_over_min", 8.0)?;
    let deltas = dyadic_scales(kmin, kmax);
    let mut ops: Vec<(String, AveragingOperator)> = Vec::new();
    if cfg.params.contains_key("dmin") || cfg.params.contains_key("dmax") {
        let dmin = cfg.param_usize("dmin", 2)?;
        let dmax = cfg.param_usize("dmax", dmin)?;
        if dmin < 2 || dmin > dmax {
            return Err(Error::config("params.dmin", format!("need 2 <= dmin <= dmax, got {dmin}..{dmax}")));
        }
        for d in dmin..=dmax {
            let op = AveragingOperator::new(PolyCurve::moment(d)?, Interval::new(0.0, 1.0), MuMeasure::new(0, d)?)?;
            ops.push((format!("d{d}"), op));
        }
    } else {
        let curve = cfg.curve()?;
        ops.push((format!("d{}", curve.dim()), operator_for(cfg, &curve)?));
    }
    for (label, op) in &ops {
        let d = op.dim();
        let t0 = cfg.param_f64("t0", op.interval().lo)?;
        let (p, q) = endpoint_exponents(d);
        for (tag, pp, qq) in [("endpoint", p, q), ("q-plus", p, q + 0.1), ("p-minus", p - 0.1, q)] {
            let name = format!("knapp.{label}.{tag}");
            let mut table = Table::new(&name, &["delta", "ratio", "error"]);
            let rec = guard(&name, "knapp-scaling", || {
                let s = knapp_sweep(op, t0, &deltas, pp, qq, samples, seed)?;
                for r in &s.rows {
                    table.push(vec![r.delta, r.ratio, r.error]);
                }
                let spread = s.max_over_min();
                let trend = s.trend();
                let ok = if tag == "endpoint" { spread <= limit } else { trend != crate::operator::Trend::None };
                Ok(CheckRecord::new(&name, if tag == "endpoint" { "knapp-endpoint-flat" } else { "knapp-off-endpoint-trend" }, Status::from_bool(ok))
                    .measure("max_over_min", spread)
                    .measure("p", pp)
                    .measure("q", qq)
                    .measure("first_ratio", s.rows.first().map_or(f64::NAN, |r| r.ratio))
                    .measure("last_ratio", s.rows.last().map_or(f64::NAN, |r| r.ratio))
                    .witness("trend", trend.name()))
            })?;
            report.checks.push(rec);
            report.tables.push(table);
        }
    }
    Ok(())
}

fn default_cells(d: usize) -> usize {
    match d {
        2 => 24,
        3 => 12,
        4 => 8,
        _ => 6,
    }
}

fn check_mle_cmd(cfg: &RunConfig, report: &mut VerificationReport) -> Result<()> {
    let curve = cfg.curve()?;
    let seed = cfg.seed()?;
    let op = operator_for(cfg, &curve)?;
    let d = op.dim();
    let cells = cfg.param_usize("cells", default_cells(d))?;
    let iv = op.interval();
    let at = cfg.param_f64("f_at", iv.lo + 0.5 * (iv.hi - iv.lo))?;
    let e = GridSet::ball(&vec![0.0; d], cfg.param_positive("e_radius", 1.0)?, cells)?;
    let f = GridSet::ball(&op.point(at), cfg.param_positive("f_radius", 0.2)?, cells)?;
    let margin = cfg.param_positive("margin", 1.0)?;
    let rec = guard("mle", "e2-mass-lower-bound", || {
        let r = check_mle(&op, &e, &e, &f, margin, cfg.samples_or(2000), seed)?;
        Ok(CheckRecord::new("mle", "e2-mass-lower-bound", Status::from_bool(r.passes()))
            .measure("ratio", r.ratio)
            .measure("measure", r.measure)
            .measure("rhs", r.rhs)
            .measure("alpha1", r.alpha[0])
            .measure("alpha2", r.alpha[1])
            .measure("beta1", r.beta[0])
            .measure("beta2", r.beta[1])
            .measure("exponent", r.exponent)
            .measure("margin", r.margin))
    })?;
    report.checks.push(rec);
    Ok(())
}

fn check_mlf_cmd(cfg: &RunConfig, report: &mut VerificationReport) -> Result<()> {
    let curve = cfg.curve()?;
    let seed = cfg.seed()?;
    let op = operator_for(cfg, &curve)?;
    let d = op.dim();
    let cells = cfg.param_usize("cells", default_cells(d))?;
    let iv = op.interval();
    let at = cfg.param_f64("f_at", iv.lo + 0.5 * (iv.hi - iv.lo))?;
    let e = GridSet::ball(&vec![0.0; d], cfg.param_positive("e_radius", 0.2)?, cells)?;
    let f = GridSet::ball(&op.point(at), cfg.param_positive("f_radius", 1.0)?, cells)?;
    let eta = cfg.param_positive("eta", 1.0)?;
    let c = cfg.param_positive("c", 1.0)?;
    let margin = cfg.param_positive("margin", 1.0)?;
    let dd1 = (d * (d + 1)) as i64;
    let n = Rational::new(BigInt::from(dd1), BigInt::from(2 * op.mu().k as i64 + dd1));
    let quad = crate::bands::Quadruple::small_last_parameter(d, &n);
    let rec = guard("mlf", "f2-mass-lower-bound", || {
        let r = check_mlf(&op, &e, &f, &f, eta, &quad, c, margin, cfg.samples_or(2000), seed)?;
        let [r1, r2, s1, s2] = quad.exponents();
        Ok(CheckRecord::new("mlf", "f2-mass-lower-bound", Status::from_bool(r.passes()))
            .measure("ratio", r.ratio)
            .measure("measure", r.measure)
            .measure("rhs", r.rhs)
            .measure("alpha1", r.alpha[0])
            .measure("alpha2", r.alpha[1])
            .measure("beta1", r.beta[0])
            .measure("beta2", r.beta[1])
            .measure("eta", r.eta)
            .measure("margin", r.margin)
            .witness("quadruple", format!("{r1},{r2},{s1},{s2}")))
    })?;
    report.checks.push(rec);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::CurveSource;

    fn cfg(curve: &str) -> RunConfig {
        RunConfig { curve: Some(CurveSource::Corpus(curve.into())), seed: Some(7), ..RunConfig::default() }
    }

    #[test]
    fn names_roundtrip() {
        for c in Command::ALL {
            assert_eq!(Command::from_name(c.name()), Some(c));
        }
    }

    #[test]
    fn decompose_moment_curve_single_leaf() {
        let r = run(Command::Decompose, &cfg("moment-3")).unwrap();
        assert_eq!(r.status(), Status::Pass);
        assert_eq!(r.table("leaves").unwrap().rows.len(), 1);
        let leaf = r.check("leaf-0.comparability").unwrap();
        assert!(leaf.witnesses.iter().any(|(k, v)| k == "lineage" && !v.is_empty()));
    }

    #[test]
    fn unknown_param_is_config_error() {
        let mut c = cfg("moment-2");
        c.params.insert("bogus".into(), toml::Value::Integer(1));
        assert!(matches!(run(Command::Decompose, &c), Err(Error::Config { .. })));
    }

    #[test]
    fn seed_required_for_sampling() {
        let mut c = cfg("moment-2");
        c.seed = None;
        assert!(matches!(run(Command::VerifyGeometric, &c), Err(Error::Config { .. })));
    }

    #[test]
    fn repeated_runs_identical() {
        let mut c = cfg("cusp");
        c.samples = Some(500);
        let a = run(Command::VerifyGeometric, &c).unwrap();
        let b = run(Command::VerifyGeometric, &c).unwrap();
        assert_eq!(a.body().unwrap(), b.body().unwrap());
    }

    #[test]
    fn exact_moment_identities() {
        let mut c = cfg("moment-2");
        c.samples = Some(4);
        let r = run(Command::VerifyIdentity, &c).unwrap();
        assert_eq!(r.check("exact.torsion").unwrap().status, Status::Pass);
        assert_eq!(r.check("exact.jacobian").unwrap().status, Status::Pass);
        assert_eq!(r.status(), Status::Pass, "{}", r.summary());
    }
}
