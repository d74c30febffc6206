//! End-to-end acceptance suite: one PASS/FAIL line per criterion.

use std::time::Instant;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::Rng;

use curvelab::jacobian::{check_vandermonde_family, integrate};
use curvelab::operator::MuMeasure;
use curvelab::poly::{superfactorial, PolyCurve, Rational};
use curvelab::report::{corpus, run, Command, CurveSource, RunConfig, Status, VerificationReport};
use curvelab::rng::stream;

const SEED: u64 = 1;
const RANDOM_CURVE: &str = "random-1";

/// Minimum geometric ratio over all leaves, 1e5 samples per leaf, seed 1.
const GEOMETRIC_GOLDEN: [(&str, f64); 8] = [
    ("moment-2", 9.999999999999998e-1),
    ("moment-3", 4.9999999999999994e-1),
    ("moment-4", 8.333333333333333e-2),
    ("moment-5", 3.4722222222222194e-3),
    ("cusp", 9.999999999999996e-1),
    ("inflection", 1.000000005539529e0),
    ("quartic-twist", 5.000656741143786e-1),
    (RANDOM_CURVE, 4.9184014783902436e-1),
];
const GEOMETRIC_REL_TOL: f64 = 1e-9;

/// Lower bounds for the conditional Jacobian ratio: measured minima over
/// all leaves (seed 1, 1000 tower tuples per leaf) rounded down.
const LBJ_GOLDEN: [(&str, f64); 8] = [
    ("moment-2", 1.26e-1),
    ("moment-3", 7.34e-6),
    ("moment-4", 6.80e-9),
    ("moment-5", 1.13e-15),
    ("cusp", 1.25e-1),
    ("inflection", 1.25e-1),
    ("quartic-twist", 4.00e-6),
    (RANDOM_CURVE, 4.10e-7),
];

fn config(curve: Option<&str>, samples: Option<usize>, params: &[(&str, toml::Value)]) -> RunConfig {
    RunConfig {
        curve: curve.map(|c| CurveSource::Corpus(c.to_string())),
        seed: Some(SEED),
        samples,
        params: params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
        ..RunConfig::default()
    }
}

fn run_ok(cmd: Command, cfg: &RunConfig) -> VerificationReport {
    run(cmd, cfg).unwrap_or_else(|e| panic!("{} failed to run: {e}", cmd.name()))
}

fn corpus_names() -> Vec<String> {
    corpus::standard_names(SEED)
}

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn failing(r: &VerificationReport) -> String {
    r.failures().iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join(",")
}

fn exact_identities() -> Outcome {
    let start = Instant::now();
    let mut rng = stream(SEED, 1);
    let mut bad = Vec::new();
    for d in 2..=5usize {
        let curve = PolyCurve::moment(d).unwrap();
        let torsion = curve.torsion();
        let want = Rational::from_integer(superfactorial(d));
        if !(torsion.degree() == 0 && torsion.coeff(0) == want) {
            bad.push(format!("torsion d={d}"));
        }
        let dfact: BigInt = (1..=d as u64).map(BigInt::from).product();
        for _ in 0..100 {
            let t: Vec<Rational> = (0..d)
                .map(|_| Rational::new(BigInt::from(rng.random_range(-500i64..=500)), BigInt::from(rng.random_range(1i64..=97))))
                .collect();
            let mut v = Rational::from_integer(dfact.clone());
            for k in 0..d {
                for i in 0..k {
                    v *= &t[k] - &t[i];
                }
            }
            if curve.jacobian_exact(&t) != v {
                bad.push(format!("jacobian d={d}"));
                break;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(bad.is_empty() && secs < 5.0, format!("d=2..5, 100 tuples each, {secs:.2}s {}", bad.join(" ")))
}

fn mu_normalization() -> Outcome {
    // K up to 2N with N the largest corpus degree
    let max_k = 2 * corpus::RANDOM_DEGREE;
    let mut rng = stream(SEED, 2);
    let mut worst: f64 = 0.0;
    let mut quad_worst: f64 = 0.0;
    for d in 2..=5usize {
        for k in 0..=max_k {
            let mu = MuMeasure::new(k, d).unwrap();
            let n = mu.n();
            for _ in 0..100 {
                let r: f64 = 1.0 - rng.random::<f64>();
                let closed = mu.interval(0.0, r.powf(n)).unwrap();
                worst = worst.max((closed - n * r).abs());
                // independent route: integrate the density in u = s^{1/n}
                let q = integrate(|u| Ok(mu.density(u.powf(n)) * n * u.powf(n - 1.0)), 0.0, r, 1e-14, 0).unwrap();
                quad_worst = quad_worst.max((q.value - n * r).abs() / (n * r));
            }
        }
    }
    outcome(
        worst <= 1e-12 && quad_worst <= 1e-10,
        format!("d=2..5, K=0..={max_k}, max abs error {worst:e}, quadrature rel error {quad_worst:e}"),
    )
}

fn decomposition_soundness() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for name in corpus_names() {
        let r = run_ok(Command::VerifyGeometric, &config(Some(&name), Some(100_000), &[]));
        let spread = r.checks.iter().filter_map(|c| c.measured("spread")).fold(0.0, f64::max);
        let min_ratio = r.checks.iter().filter_map(|c| c.measured("min_ratio")).fold(f64::INFINITY, f64::min);
        let golden = GEOMETRIC_GOLDEN.iter().find(|(n, _)| *n == name).map(|g| g.1).unwrap();
        let mut ok = r.status() == Status::Pass && spread <= 1e4 && min_ratio > 0.0;
        ok &= ((min_ratio - golden) / golden).abs() <= GEOMETRIC_REL_TOL;
        if let Some(d) = name.strip_prefix("moment-").and_then(|d| d.parse::<usize>().ok()) {
            // constant ratio d! / prod_{j<=d} j!
            let dfact: f64 = (1..=d).map(|j| j as f64).product();
            let exact = dfact / superfactorial(d).to_f64().unwrap();
            ok &= ((min_ratio - exact) / exact).abs() <= 1e-12;
        }
        let secs = r.wall_time.unwrap();
        ok &= secs < 120.0;
        pass &= ok;
        notes.push(format!("{name}: spread {spread:.3e} min {min_ratio:.6e} {secs:.1}s{}", if ok { "" } else { " !" }));
    }
    outcome(pass, notes.join("; "))
}

fn jacobian_identity() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut pass = true;
    for name in corpus_names() {
        let curve = corpus::lookup(&name).unwrap();
        if curve.dim() > 4 {
            continue;
        }
        let r = run_ok(Command::VerifyIdentity, &config(Some(&name), Some(50), &[]));
        let worst = r.checks.iter().filter_map(|c| c.measured("max_rel_error")).fold(0.0, f64::max);
        let limit = if curve.dim() <= 3 { 1e-6 } else { 1e-4 };
        let ok = r.status() == Status::Pass && worst <= limit;
        pass &= ok;
        notes.push(format!("{name}: {worst:.2e} (limit {limit:e}){}", if ok { "" } else { " !" }));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(pass && secs < 300.0, format!("{} in {secs:.1}s", notes.join("; ")))
}

fn vandermonde() -> Outcome {
    let start = Instant::now();
    let s = check_vandermonde_family(4, 20);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        s.failures.is_empty() && s.lists > 0 && secs < 60.0,
        format!("{} exponent lists, {} failures, {secs:.2}s", s.lists, s.failures.len()),
    )
}

fn endpoint_sharpness() -> Outcome {
    let cfg = config(None, Some(2000), &[("dmin", 2.into()), ("dmax", 4.into())]);
    let r = run_ok(Command::OperatorSweepKnapp, &cfg);
    let mut notes = Vec::new();
    for d in 2..=4 {
        let flat = r.check(&format!("knapp.d{d}.endpoint")).and_then(|c| c.measured("max_over_min")).unwrap_or(f64::NAN);
        let trend = |tag: &str| {
            r.check(&format!("knapp.d{d}.{tag}"))
                .and_then(|c| c.witnesses.iter().find(|(k, _)| k == "trend").map(|(_, v)| v.clone()))
                .unwrap_or_default()
        };
        notes.push(format!("d={d}: max/min {flat:.3} q+ {} p- {}", trend("q-plus"), trend("p-minus")));
    }
    let rows = r.tables.iter().all(|t| t.rows.len() == 10);
    let secs = r.wall_time.unwrap();
    outcome(
        r.status() == Status::Pass && rows && secs < 600.0,
        format!("{}; {secs:.1}s {}", notes.join("; "), failing(&r)),
    )
}

fn band_invariants() -> Outcome {
    let r = run_ok(Command::BandsVerify, &config(None, None, &[("configurations", 1000.into())]));
    let secs = r.wall_time.unwrap();
    outcome(
        r.status() == Status::Pass && secs < 60.0,
        format!("{} checks over d=2..5, 1000 configurations each, {secs:.2}s {}", r.checks.len(), failing(&r)),
    )
}

fn lower_bound() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for name in corpus_names() {
        let golden = LBJ_GOLDEN.iter().find(|(n, _)| *n == name).map(|g| g.1).unwrap();
        let r = run_ok(Command::VerifyLbj, &config(Some(&name), None, &[("golden", golden.into())]));
        let lbj: Vec<_> = r.checks.iter().filter(|c| c.name.ends_with(".lbj")).collect();
        let min = lbj.iter().filter_map(|c| c.measured("min_ratio")).fold(f64::INFINITY, f64::min);
        let configs = lbj.iter().all(|c| c.measured("configurations") == Some(1000.0));
        let exps = r.check("exponents").is_some_and(|c| c.status == Status::Pass);
        let ok = lbj.iter().all(|c| c.status == Status::Pass) && configs && exps && !lbj.is_empty();
        pass &= ok;
        notes.push(format!("{name}: min {min:.3e} >= {golden:e}{}", if ok { "" } else { " !" }));
    }
    outcome(pass, notes.join("; "))
}

fn derivative_bound() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for name in corpus_names() {
        let r = run_ok(Command::VerifyDerivativeBounds, &config(Some(&name), None, &[]));
        let worst = r
            .checks
            .iter()
            .filter_map(|c| Some(c.measured("measured")? / c.measured("degree")?.max(1.0)))
            .fold(0.0, f64::max);
        let ok = r.status() == Status::Pass;
        pass &= ok;
        notes.push(format!("{name}: {} leaves, max measured/degree {worst:.3}{}", r.checks.len(), if ok { "" } else { " !" }));
    }
    outcome(pass, notes.join("; "))
}

fn determinism() -> Outcome {
    let cases = [
        (Command::VerifyGeometric, config(Some("quartic-twist"), Some(20_000), &[])),
        (Command::VerifyLbj, config(Some("moment-3"), None, &[("configurations", 300.into())])),
        (Command::OperatorSweepKnapp, config(None, Some(500), &[("dmin", 3.into())])),
        (Command::BandsVerify, config(None, None, &[("configurations", 300.into())])),
    ];
    let mut mismatches = Vec::new();
    for (cmd, cfg) in &cases {
        let bodies: Vec<String> = [1usize, 4, 4]
            .iter()
            .map(|&threads| {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
                pool.install(|| run_ok(*cmd, cfg).body().unwrap())
            })
            .collect();
        if bodies.windows(2).any(|w| w[0] != w[1]) {
            mismatches.push(cmd.name());
        }
    }
    outcome(
        mismatches.is_empty(),
        format!("{} commands under 1 and 4 threads, mismatches: [{}]", cases.len(), mismatches.join(",")),
    )
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("exact identities", exact_identities),
        ("measure normalization", mu_normalization),
        ("decomposition soundness", decomposition_soundness),
        ("jacobian identity", jacobian_identity),
        ("vandermonde factorization", vandermonde),
        ("endpoint sharpness", endpoint_sharpness),
        ("band invariants", band_invariants),
        ("conditional lower bound", lower_bound),
        ("derivative bound", derivative_bound),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {verdict} {name} ({:.1}s): {}", i + 1, start.elapsed().as_secs_f64(), o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
