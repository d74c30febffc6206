use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

use curvelab::bands::{build_bands, verify_band_conclusions, BandParams};
use curvelab::decomp::Interval;
use curvelab::jacobian::integrate;
use curvelab::operator::{functionals, AveragingOperator, GridBox, GridSet, MuMeasure};
use curvelab::report::{CheckRecord, Status, Table, VerificationReport};
use curvelab::PolyCurve;

fn config(cases: u32) -> Config {
    Config { cases, rng_seed: RngSeed::Fixed(0x5eed), failure_persistence: None, ..Config::default() }
}

fn op(d: usize, k: usize) -> AveragingOperator {
    AveragingOperator::new(PolyCurve::moment(d).unwrap(), Interval::new(0.0, 1.0), MuMeasure::new(k, d).unwrap()).unwrap()
}

fn boxed(lo: &[f64], width: &[f64]) -> GridSet {
    GridSet::single(GridBox::new(lo.to_vec(), lo.iter().zip(width).map(|(a, w)| a + w).collect()).unwrap())
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn mu_additive_and_invertible(d in 2usize..=5, k in 0usize..=12, a in 0.0f64..2.0, b in 0.0f64..2.0, c in 0.0f64..2.0) {
        let mu = MuMeasure::new(k, d).unwrap();
        let mut p = [a, b, c];
        p.sort_by(f64::total_cmp);
        let whole = mu.interval(p[0], p[2]).unwrap();
        let split = mu.interval(p[0], p[1]).unwrap() + mu.interval(p[1], p[2]).unwrap();
        prop_assert!((whole - split).abs() <= 1e-12 * whole.max(1.0));
        let s = mu.advance(p[0], whole);
        prop_assert!((s - p[2]).abs() <= 1e-9 * p[2].max(1.0));
    }

    #[test]
    fn mu_closed_form_matches_quadrature(d in 2usize..=5, k in 0usize..=12, b in 0.01f64..3.0) {
        let mu = MuMeasure::new(k, d).unwrap();
        let n = mu.n();
        // s = u^n removes the endpoint singularity of the density
        let q = integrate(|u| Ok(mu.density(u.powf(n)) * n * u.powf(n - 1.0)), 0.0, b.powf(1.0 / n), 1e-13, 0).unwrap();
        let closed = mu.interval(0.0, b).unwrap();
        prop_assert!((q.value - closed).abs() <= 1e-10 * closed);
    }

    #[test]
    fn averages_monotone_in_the_set(k in 0usize..=2, lo in prop::collection::vec(-1.5f64..0.5, 2), w in prop::collection::vec(0.05f64..1.0, 2), grow in prop::collection::vec(0.0f64..0.5, 4), y in prop::collection::vec(-1.0f64..2.0, 2)) {
        let op = op(2, k);
        let small = boxed(&lo, &w);
        let lo2: Vec<f64> = lo.iter().zip(&grow[..2]).map(|(a, g)| a - g).collect();
        let w2: Vec<f64> = w.iter().zip(&grow).map(|(x, g)| x + grow[2] + g).collect();
        let big = boxed(&lo2, &w2);
        prop_assert!(op.apply(&small, &y) <= op.apply(&big, &y) + 1e-12);
        prop_assert!(op.apply_adjoint(&small, &y) <= op.apply_adjoint(&big, &y) + 1e-12);
    }

    #[test]
    fn averages_translation_invariant(k in 0usize..=2, lo in prop::collection::vec(-1.0f64..0.5, 3), w in prop::collection::vec(0.1f64..1.0, 3), v in prop::collection::vec(-2.0f64..2.0, 3), y in prop::collection::vec(-1.0f64..2.0, 3)) {
        let op = op(3, k);
        let e = boxed(&lo, &w);
        let shifted: Vec<f64> = y.iter().zip(&v).map(|(a, b)| a + b).collect();
        let a = op.apply(&e, &y);
        let b = op.apply(&e.translate(&v), &shifted);
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-6), "{a} vs {b}");
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn duality_on_random_boxes(k in 0usize..=2, e_lo in prop::collection::vec(-0.5f64..0.2, 2), e_w in prop::collection::vec(0.2f64..0.8, 2), f_lo in prop::collection::vec(0.0f64..0.6, 2), f_w in prop::collection::vec(0.2f64..0.8, 2), seed in any::<u64>()) {
        let op = op(2, k);
        let e = boxed(&e_lo, &e_w);
        let f = boxed(&f_lo, &f_w);
        let r = functionals(&op, &e, &f, 4000, seed).unwrap();
        prop_assert!(r.duality_gap() <= r.error + r.dual_error + 1e-12, "{r:?}");
    }
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn bands_partition_and_separate(pts in prop::collection::btree_set(1u32..1_000_000, 2..9), k in 0usize..=3, d in 2usize..=5) {
        let t: Vec<f64> = pts.iter().map(|&p| p as f64 / 1e6).collect();
        let params = BandParams { delta: 0.05, delta_prime: 0.05 / 64.0, alpha1: 1.0, beta1: 1e-12, k, d };
        let bs = build_bands(&t, &params).unwrap();
        let mut all: Vec<usize> = bs.bands().iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (1..=t.len()).collect::<Vec<_>>());
        prop_assert!(verify_band_conclusions(&bs, 0.0).separation.is_empty());
        let coarse = build_bands(&t, &BandParams { delta: 0.1, ..params }).unwrap();
        for band in bs.bands() {
            prop_assert!(band.iter().all(|&i| coarse.band_of(i) == coarse.band_of(band[0])));
        }
    }

    #[test]
    fn report_roundtrip(values in prop::collection::vec(any::<f64>(), 1..12), names in prop::collection::vec("[a-z][a-z0-9_.-]{0,8}", 1..4), fail in any::<bool>()) {
        let mut r = VerificationReport::new("verify-geometric", vec![("seed".into(), "3".into())]);
        for (i, n) in names.iter().enumerate() {
            let mut c = CheckRecord::new(format!("{n}{i}"), "tag", if fail && i == 0 { Status::Fail } else { Status::Pass });
            for (j, v) in values.iter().enumerate() {
                c = c.measure(&format!("m{j}"), *v);
            }
            r.checks.push(c.witness("note", "a, b = c"));
        }
        let mut t = Table::new("sweep", &["x", "y"]);
        for v in values.chunks(2).filter(|c| c.len() == 2) {
            t.push(v.to_vec());
        }
        r.tables.push(t);
        let text = r.emit().unwrap();
        let back = VerificationReport::parse(&text).unwrap();
        prop_assert_eq!(back.emit().unwrap(), text);
    }
}
