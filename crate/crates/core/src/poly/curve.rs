use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::bareiss::{determinant, determinant_f64};
use super::float::FloatPoly;
use super::univariate::rational_to_f64;
use super::{Polynomial, Rational};
use crate::error::{Error, Result};

/// Which of the two derivative-matrix shapes a [`DerivMatrix`] holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivKind {
    /// Columns `P'(s), P''(s), ..., P^(d)(s)` at a single point.
    Osculating,
    /// Columns `P'(t_1), ..., P'(t_d)` at `d` points.
    Tangent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DerivMatrix {
    /// Row-major, `entries[i][j]` is component `i` of column `j`.
    pub entries: Vec<Vec<f64>>,
    pub kind: DerivKind,
}

impl DerivMatrix {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn det(&self) -> f64 {
        determinant_f64(&self.entries)
    }
}

/// A polynomial map `R -> R^d` with exact coefficients.
///
/// The derivative table, the minor ladder `L_1, ..., L_d` and their float
/// images are computed once at construction; the type is immutable afterwards.
#[derive(Clone, Debug)]
pub struct PolyCurve {
    components: Vec<Polynomial>,
    /// `derivs[i][k]` is the `(k+1)`-th derivative of component `i`.
    derivs: Vec<Vec<Polynomial>>,
    minors: Vec<Polynomial>,
    nondegenerate: bool,
    velocity_f: Vec<FloatPoly>,
    derivs_f: Vec<Vec<FloatPoly>>,
    minors_f: Vec<FloatPoly>,
}

impl PartialEq for PolyCurve {
    fn eq(&self, other: &Self) -> bool {
        self.components == other.components
    }
}

impl PolyCurve {
    pub fn new(components: Vec<Polynomial>) -> Result<Self> {
        let d = components.len();
        if d < 2 {
            return Err(Error::InvalidArgument(format!("curve dimension must be at least 2, got {d}")));
        }
        let derivs = Self::derivative_table(&components);
        let minors: Vec<Polynomial> = (1..=d)
            .map(|j| {
                let rows: Vec<Vec<Polynomial>> = (0..j).map(|i| derivs[i][..j].to_vec()).collect();
                determinant(&rows)
            })
            .collect();
        Ok(Self::from_parts(components, derivs, minors))
    }

    fn derivative_table(components: &[Polynomial]) -> Vec<Vec<Polynomial>> {
        let d = components.len();
        components
            .iter()
            .map(|p| {
                let mut out = Vec::with_capacity(d);
                let mut q = p.derivative();
                for _ in 0..d {
                    let next = q.derivative();
                    out.push(q);
                    q = next;
                }
                out
            })
            .collect()
    }

    fn from_parts(components: Vec<Polynomial>, derivs: Vec<Vec<Polynomial>>, minors: Vec<Polynomial>) -> Self {
        let d = components.len();
        let nondegenerate = !minors[d - 1].is_zero();
        let velocity_f = derivs.iter().map(|row| row[0].to_float()).collect();
        let derivs_f = derivs.iter().map(|row| row.iter().map(Polynomial::to_float).collect()).collect();
        let minors_f = minors.iter().map(Polynomial::to_float).collect();
        PolyCurve { components, derivs, minors, nondegenerate, velocity_f, derivs_f, minors_f }
    }

    /// `(s, s^2, ..., s^d)`.
    pub fn moment(d: usize) -> Result<Self> {
        Self::new((1..=d).map(|j| Polynomial::monomial(Rational::one(), j)).collect())
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// Maximum component degree (0 for constant curves).
    pub fn degree(&self) -> usize {
        self.components.iter().map(|p| p.degree().max(0) as usize).max().unwrap_or(0)
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.nondegenerate
    }

    /// The torsion polynomial `L_P = det(P', ..., P^(d))`.
    pub fn torsion(&self) -> &Polynomial {
        &self.minors[self.dim() - 1]
    }

    /// `L_j` for `1 <= j <= d`.
    pub fn minor(&self, j: usize) -> Result<&Polynomial> {
        if j == 0 || j > self.dim() {
            return Err(Error::IndexOutOfRange { index: j as i64, lo: 1, hi: self.dim() as i64 });
        }
        Ok(&self.minors[j - 1])
    }

    /// `L_j` with the convention `L_j = 1` for `j <= 0`.
    pub fn minor_or_one(&self, j: isize) -> Polynomial {
        if j <= 0 {
            Polynomial::one()
        } else {
            self.minors[j as usize - 1].clone()
        }
    }

    pub fn minors(&self) -> &[Polynomial] {
        &self.minors
    }

    /// Float image of `L_j`, with `L_j = 1` for `j <= 0`.
    pub fn minor_f64(&self, j: isize, s: f64) -> f64 {
        if j <= 0 {
            1.0
        } else {
            self.minors_f[j as usize - 1].eval(s)
        }
    }

    pub fn minor_float(&self, j: usize) -> &FloatPoly {
        &self.minors_f[j - 1]
    }

    pub fn torsion_f64(&self, s: f64) -> f64 {
        self.minors_f[self.dim() - 1].eval(s)
    }

    pub fn eval_exact(&self, s: &Rational) -> Vec<Rational> {
        self.components.iter().map(|p| p.eval(s)).collect()
    }

    pub fn eval(&self, s: f64) -> Vec<f64> {
        self.components.iter().map(|p| p.eval_f64(s)).collect()
    }

    pub fn velocity(&self, s: f64) -> Vec<f64> {
        self.velocity_f.iter().map(|p| p.eval(s)).collect()
    }

    pub fn osculating_matrix(&self, s: f64) -> DerivMatrix {
        let entries = self.derivs_f.iter().map(|row| row.iter().map(|p| p.eval(s)).collect()).collect();
        DerivMatrix { entries, kind: DerivKind::Osculating }
    }

    pub fn tangent_matrix(&self, t: &[f64]) -> DerivMatrix {
        let entries = self
            .velocity_f
            .iter()
            .map(|p| t.iter().map(|&x| p.eval(x)).collect())
            .collect();
        DerivMatrix { entries, kind: DerivKind::Tangent }
    }

    /// `J_P(t) = det(P'(t_1), ..., P'(t_d))` in double precision.
    pub fn jacobian(&self, t: &[f64]) -> f64 {
        assert_eq!(t.len(), self.dim(), "jacobian needs d points");
        self.tangent_matrix(t).det()
    }

    /// `J_P(t)` in exact arithmetic.
    pub fn jacobian_exact(&self, t: &[Rational]) -> Rational {
        assert_eq!(t.len(), self.dim(), "jacobian needs d points");
        let rows: Vec<Vec<Rational>> =
            self.derivs.iter().map(|row| t.iter().map(|x| row[0].eval(x)).collect()).collect();
        determinant(&rows)
    }

    /// Affine arclength density `|L_P(s)|^{2/(d(d+1))}`.
    pub fn arclength_density(&self, s: f64) -> f64 {
        let d = self.dim() as f64;
        self.torsion_f64(s).abs().powf(2.0 / (d * (d + 1.0)))
    }

    /// `s -> M P(s) + shift`.
    pub fn affine_image(&self, m: &[Vec<Rational>], shift: &[Rational]) -> Result<Self> {
        let d = self.dim();
        if m.len() != d || m.iter().any(|r| r.len() != d) || shift.len() != d {
            return Err(Error::InvalidArgument("affine map has the wrong shape".into()));
        }
        let comps = (0..d)
            .map(|i| {
                let mut acc = Polynomial::constant(shift[i].clone());
                for (j, p) in self.components.iter().enumerate() {
                    acc = &acc + &p.scale(&m[i][j]);
                }
                acc
            })
            .collect();
        Self::new(comps)
    }

    /// `s -> P(a s + b)`. Minors transform as `L_j -> a^{j(j+1)/2} L_j(a s + b)`.
    pub fn reparametrize(&self, a: &Rational, b: &Rational) -> Result<Self> {
        let components: Vec<Polynomial> = self.components.iter().map(|p| p.compose_affine(a, b)).collect();
        let derivs = Self::derivative_table(&components);
        let mut factor = Rational::one();
        let minors = self
            .minors
            .iter()
            .enumerate()
            .map(|(i, l)| {
                for _ in 0..=i {
                    factor *= a;
                }
                l.compose_affine(a, b).scale(&factor)
            })
            .collect();
        Ok(Self::from_parts(components, derivs, minors))
    }

    /// `s -> c P(s)`. Minors transform as `L_j -> c^j L_j`.
    pub fn scaled(&self, c: &Rational) -> Result<Self> {
        let components: Vec<Polynomial> = self.components.iter().map(|p| p.scale(c)).collect();
        let derivs = Self::derivative_table(&components);
        let mut factor = Rational::one();
        let minors = self
            .minors
            .iter()
            .map(|l| {
                factor *= c;
                l.scale(&factor)
            })
            .collect();
        Ok(Self::from_parts(components, derivs, minors))
    }

    /// `s -> -P(s)`.
    pub fn reflected(&self) -> Result<Self> {
        self.scaled(&-Rational::one())
    }

    /// Velocity components expanded around `center`, for evaluating `J_P`
    /// through divided differences without cancellation between close points.
    pub fn shifted_velocity(&self, center: f64) -> ShiftedVelocity {
        let c = Rational::from_float(center).unwrap_or_else(Rational::zero);
        let comps = self
            .derivs
            .iter()
            .map(|row| {
                row[0].compose_affine(&Rational::one(), &c).coeffs().iter().map(rational_to_f64).collect()
            })
            .collect();
        ShiftedVelocity { center, comps }
    }

    /// `J_P(t) / prod_{l<k} (t_k - t_l)` for `t_k = center + v_k`, robust
    /// across scales.
    ///
    /// Tries the divided-difference determinant (accurate for clustered
    /// points), then the plain tangent determinant (accurate for separated
    /// points); a route is accepted when its determinant is at least `1e-6`
    /// of the Hadamard bound. Otherwise the value is computed exactly.
    pub fn jacobian_quotient(&self, sv: &ShiftedVelocity, v: &[f64]) -> f64 {
        const MIN_CONDITION: f64 = 1e-6;
        let (dd, cond) = sv.quotient_and_condition(v);
        if cond >= MIN_CONDITION {
            return dd;
        }
        let t: Vec<f64> = v.iter().map(|x| sv.center + x).collect();
        let m = self.tangent_matrix(&t);
        let det = m.det();
        if hadamard_ratio(&m.entries, det) >= MIN_CONDITION {
            let mut vdm = 1.0;
            for k in 0..v.len() {
                for l in 0..k {
                    vdm *= v[k] - v[l];
                }
            }
            return det / vdm;
        }
        let c = Rational::from_float(sv.center).unwrap_or_else(Rational::zero);
        let vq: Vec<Rational> = v.iter().map(|x| Rational::from_float(*x).unwrap_or_else(Rational::zero)).collect();
        let tq: Vec<Rational> = vq.iter().map(|x| &c + x).collect();
        let mut vdm = Rational::one();
        for k in 0..v.len() {
            for l in 0..k {
                vdm *= &vq[k] - &vq[l];
            }
        }
        if vdm.is_zero() {
            return f64::NAN;
        }
        rational_to_f64(&(self.jacobian_exact(&tq) / vdm))
    }

    /// Exponent of `|L_P|` in the affine arclength density.
    pub fn density_exponent(&self) -> f64 {
        let d = self.dim() as f64;
        2.0 / (d * (d + 1.0))
    }
}

/// Velocity polynomials in the variable `u = s - center`.
#[derive(Clone, Debug)]
pub struct ShiftedVelocity {
    center: f64,
    comps: Vec<Vec<f64>>,
}

impl ShiftedVelocity {
    pub fn center(&self) -> f64 {
        self.center
    }

    /// `J_P(t) / prod_{l<k} (t_k - t_l)`, computed as the determinant of the
    /// divided-difference columns `P'[t_1], P'[t_1,t_2], ..., P'[t_1..t_d]`.
    ///
    /// Each divided difference of a monomial is a complete homogeneous
    /// symmetric polynomial, which is free of subtraction when all `u_k`
    /// share a sign.
    pub fn vandermonde_quotient(&self, t: &[f64]) -> f64 {
        let v: Vec<f64> = t.iter().map(|x| x - self.center).collect();
        self.vandermonde_quotient_offsets(&v)
    }

    /// As [`Self::vandermonde_quotient`], with points given as offsets
    /// `v_k = t_k - center`, so no precision is lost near the center.
    pub fn vandermonde_quotient_offsets(&self, v: &[f64]) -> f64 {
        self.quotient_and_condition(v).0
    }

    /// The quotient together with `|det| / prod(column norms)`.
    fn quotient_and_condition(&self, v: &[f64]) -> (f64, f64) {
        let d = v.len();
        let max_deg = self.comps.iter().map(Vec::len).max().unwrap_or(0);
        // h[m] = h_m(u_1..u_k), updated in place as k grows
        let mut h = vec![0.0; max_deg + 1];
        h[0] = 1.0;
        let mut cols = vec![vec![0.0; d]; d];
        for k in 0..d {
            let u = v[k];
            for m in 1..=max_deg {
                h[m] += u * h[m - 1];
            }
            for (i, c) in self.comps.iter().enumerate() {
                // divided difference of order k of sum_m c_m u^m
                cols[i][k] = c.iter().enumerate().skip(k).map(|(m, cm)| cm * h[m - k]).sum();
            }
        }
        let det = determinant_f64(&cols);
        (det, hadamard_ratio(&cols, det))
    }
}

/// `|det| / prod_j |column_j|` after scaling every row to unit max-norm,
/// in `[0, 1]`; small values flag cancellation rather than mere row scale.
fn hadamard_ratio(rows: &[Vec<f64>], det: f64) -> f64 {
    let n = rows.len();
    let scales: Vec<f64> = rows.iter().map(|r| r.iter().fold(0.0f64, |m, x| m.max(x.abs()))).collect();
    if scales.iter().any(|&s| s == 0.0 || !s.is_finite()) {
        return 0.0;
    }
    let mut bound = 1.0;
    for j in 0..n {
        bound *= rows.iter().zip(&scales).map(|(r, s)| (r[j] / s).powi(2)).sum::<f64>().sqrt();
    }
    let scaled_det = scales.iter().fold(det.abs(), |acc, s| acc / s);
    if bound == 0.0 {
        return 0.0;
    }
    scaled_det / bound
}

/// `prod_{j=1}^d j!`, the torsion of the moment curve.
pub fn superfactorial(d: usize) -> BigInt {
    let mut acc = BigInt::one();
    let mut fact = BigInt::one();
    for j in 1..=d {
        fact *= BigInt::from(j);
        acc *= &fact;
    }
    acc
}

/// `|q|` as a float.
pub fn abs_f64(q: &Rational) -> f64 {
    rational_to_f64(&q.abs())
}
