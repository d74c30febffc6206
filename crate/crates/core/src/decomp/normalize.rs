use num_traits::ToPrimitive;

use super::verify::OffsetRange;
use super::{DecompInterval, Interval};
use crate::error::{Error, Result};
use crate::poly::{PolyCurve, Rational};

/// A leaf moved to `b = 0`, `interval ⊂ (0, inf)` of length one, `a ≈ 1`.
#[derive(Clone, Debug)]
pub struct NormalizedPiece {
    pub curve: PolyCurve,
    pub interval: Interval,
    pub k: usize,
    /// Power-law constant after rescaling (1 up to rounding of `lambda`).
    pub a: f64,
    /// The reparametrization is `s = center + sign * length * s'`.
    pub center: f64,
    pub sign: f64,
    pub length: f64,
    /// The new curve is `lambda * P(center + sign * length * s')`.
    pub lambda: f64,
    /// Set when an unbounded leaf was cut at the sampling truncation.
    pub truncated: bool,
}

impl NormalizedPiece {
    /// The normalized piece as a leaf, for the comparability check.
    pub fn as_leaf(&self) -> DecompInterval {
        DecompInterval {
            interval: self.interval,
            b: Some(0.0),
            k: self.k,
            a: self.a,
            c_lo: f64::NAN,
            c_hi: f64::NAN,
            lineage: Vec::new(),
        }
    }
}

/// Translates the center to 0, reflects the leaf into `(0, inf)`, rescales it
/// to unit length and multiplies `P` by a scalar so the power-law constant
/// becomes one. Unbounded leaves are first cut at the sampling truncation.
pub fn normalize_piece(piece: &DecompInterval, curve: &PolyCurve) -> Result<NormalizedPiece> {
    let d = curve.dim();
    let mut center = piece.sampling_center();
    let truncated = !piece.interval.is_bounded();
    let (sign, u_lo, u_hi) = match OffsetRange::of(&piece.interval, center) {
        OffsetRange::OneSided { sign, u_hi, .. } => {
            let raw_lo = if sign > 0.0 { piece.interval.lo - center } else { center - piece.interval.hi };
            (sign, raw_lo.max(0.0), u_hi)
        }
        OffsetRange::TwoSided { v_lo, v_hi } => {
            // no center: anchor at the left end of the truncated leaf
            center += v_lo;
            (1.0, 0.0, v_hi - v_lo)
        }
    };
    let length = u_hi - u_lo;
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::InvalidArgument(format!("cannot normalize leaf {}", piece.interval)));
    }
    let dd = (d * (d + 1) / 2 + piece.k) as f64;
    let direct = (piece.a * length.powf(dd)).powf(-1.0 / d as f64);
    let lambda_f = if direct.is_finite() && direct > 0.0 {
        direct
    } else {
        (-(piece.a.ln() + dd * length.ln()) / d as f64).exp()
    };
    let lambda_q = Rational::from_float(lambda_f)
        .ok_or_else(|| Error::InvalidArgument("normalizing scalar out of range".into()))?;
    let lambda = lambda_q.to_f64().unwrap_or(f64::NAN);
    let c_q = Rational::from_float(center).expect("finite center");
    let l_q = Rational::from_float(sign * length).expect("finite length");
    let new_curve = curve.reparametrize(&l_q, &c_q)?.scaled(&lambda_q)?;
    let a = (d as f64 * lambda.ln() + dd * length.ln() + piece.a.ln()).exp();
    let lo = u_lo / length;
    Ok(NormalizedPiece {
        curve: new_curve,
        interval: Interval::new(lo, u_hi / length),
        k: piece.k,
        a,
        center,
        sign,
        length,
        lambda,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::{dw_decompose, verify_torsion_comparability, DecompOptions};
    use crate::poly::Polynomial;

    fn cusp() -> PolyCurve {
        PolyCurve::new(vec![Polynomial::from_i64s(&[0, 0, 1]), Polynomial::from_i64s(&[0, 0, 0, 1])]).unwrap()
    }

    fn leaf(lo: f64, hi: f64, b: f64, k: usize, a: f64) -> DecompInterval {
        DecompInterval { interval: Interval::new(lo, hi), b: Some(b), k, a, c_lo: 1.0, c_hi: 1.0, lineage: vec![] }
    }

    #[test]
    fn unit_piece_is_fixed() {
        // (s, s^2 / 2) has torsion 1
        let c = PolyCurve::new(vec![
            Polynomial::from_i64s(&[0, 1]),
            Polynomial::from_coeffs(vec![Rational::from_float(0.0).unwrap(), Rational::from_float(0.0).unwrap(), Rational::from_float(0.5).unwrap()]),
        ])
        .unwrap();
        let n = normalize_piece(&leaf(0.0, 1.0, 0.0, 0, 1.0), &c).unwrap();
        assert_eq!(n.curve, c);
        assert_eq!(n.interval, Interval::new(0.0, 1.0));
        assert_eq!((n.center, n.sign, n.length, n.lambda), (0.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn reflection_preserves_torsion_magnitude() {
        let c = cusp();
        let n = normalize_piece(&leaf(-1.0, 0.0, 0.0, 2, 6.0), &c).unwrap();
        assert_eq!(n.sign, -1.0);
        let scale = n.lambda.powi(2);
        for k in 1..20 {
            let s = k as f64 / 20.0;
            let lhs = n.curve.torsion_f64(s).abs() / scale;
            assert!((lhs - c.torsion_f64(-s).abs()).abs() < 1e-9);
        }
    }

    #[test]
    fn comparability_is_scale_invariant() {
        let c = PolyCurve::new(vec![
            Polynomial::from_i64s(&[0, 1]),
            Polynomial::from_i64s(&[0, 0, 1]),
            Polynomial::from_i64s(&[0, 0, 0, 1, 1]),
        ])
        .unwrap();
        let dec = dw_decompose(&c, &DecompOptions::default()).unwrap();
        for piece in &dec.leaves {
            let before = verify_torsion_comparability(piece, &c, 32);
            let n = normalize_piece(piece, &c).unwrap();
            assert!(n.interval.lo >= 0.0 && (n.interval.width() - 1.0).abs() < 1e-12);
            assert!((n.a - 1.0).abs() < 1e-9, "{}", n.a);
            let after = verify_torsion_comparability(&n.as_leaf(), &n.curve, 32);
            assert!((after.0 / before.0 - 1.0).abs() < 1e-6, "{before:?} {after:?}");
            assert!((after.1 / before.1 - 1.0).abs() < 1e-6, "{before:?} {after:?}");
        }
    }
}
