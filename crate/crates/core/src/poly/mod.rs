//! Exact and double-precision polynomial algebra for curves.

mod bareiss;
mod curve;
mod float;
mod multivariate;
mod quotient;
mod univariate;

use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bareiss::{determinant, determinant_f64, ExactRing};
pub use curve::{abs_f64, superfactorial, DerivKind, DerivMatrix, PolyCurve, ShiftedVelocity};
pub use float::FloatPoly;
pub use multivariate::{alternant, divide_by_vandermonde, signed_permutations, MultiPoly};
pub use quotient::{subsets, JacobianQuotient};
pub use univariate::Polynomial;

use crate::error::{Error, Result};

/// Exact rational numbers.
pub type Rational = num_rational::BigRational;

/// Parses `"p/q"` or an integer. A zero denominator is rejected.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    if let Some((_, den)) = t.split_once('/') {
        if den.trim().trim_start_matches(['+', '-']).chars().all(|c| c == '0') {
            return Err(Error::InvalidArgument(format!("zero denominator in {s:?}")));
        }
    }
    let t: String = t.chars().filter(|c| !c.is_whitespace()).collect();
    Rational::from_str(&t).map_err(|e| Error::InvalidArgument(format!("bad rational {s:?}: {e}")))
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    univariate::rational_to_f64(q)
}

/// Canonical string form `"p/q"` (or `"p"` for integers).
pub fn format_rational(q: &Rational) -> String {
    q.to_string()
}

/// Serialized curve: `dim` plus one coefficient list per component,
/// lowest degree first, each coefficient a `"p/q"` string.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub dim: usize,
    pub coeffs: Vec<Vec<String>>,
}

impl CurveSpec {
    pub fn to_curve(&self) -> Result<PolyCurve> {
        if self.coeffs.len() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "curve has dim = {} but {} coefficient lists",
                self.dim,
                self.coeffs.len()
            )));
        }
        let comps = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, list)| {
                list.iter()
                    .enumerate()
                    .map(|(k, c)| {
                        parse_rational(c).map_err(|e| Error::InvalidArgument(format!("coeffs[{i}][{k}]: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(Polynomial::from_coeffs)
            })
            .collect::<Result<Vec<_>>>()?;
        PolyCurve::new(comps)
    }

    pub fn from_curve(curve: &PolyCurve) -> Self {
        CurveSpec {
            dim: curve.dim(),
            coeffs: curve
                .components()
                .iter()
                .map(|p| {
                    if p.is_zero() {
                        vec!["0".to_string()]
                    } else {
                        p.coeffs().iter().map(format_rational).collect()
                    }
                })
                .collect(),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::InvalidArgument(format!("curve spec: {e}")))
    }
}
