//! Stable evaluation of `J_P(t) / prod_{l<k} (t_k - t_l)`.
//!
//! Writing `P'(center + u) = C (1, u, u^2, ...)^T`, the Cauchy-Binet formula
//! gives
//!
//! `J_P / V(u) = sum_S det(C[:, S]) s_S(u)`
//!
//! over `d`-subsets `S` of monomial degrees, where `s_S` is the Schur
//! polynomial `alternant(S) / V`. Schur polynomials have nonnegative integer
//! coefficients, so for offsets of one sign each `s_S(u)` is evaluated
//! without cancellation, however close or far apart the points are.

use num_traits::{ToPrimitive, Zero};

use super::bareiss::determinant;
use super::multivariate::{alternant, divide_by_vandermonde};
use super::{PolyCurve, Rational};
use crate::error::Result;

#[derive(Clone, Debug)]
struct SchurTerm {
    weight: f64,
    /// `(coefficient, exponent per variable)`
    monomials: Vec<(f64, Vec<u32>)>,
}

#[derive(Clone, Debug)]
pub struct JacobianQuotient {
    center: f64,
    d: usize,
    max_exp: u32,
    terms: Vec<SchurTerm>,
}

impl JacobianQuotient {
    pub fn new(curve: &PolyCurve, center: f64) -> Result<Self> {
        let d = curve.dim();
        let c = Rational::from_float(center).unwrap_or_else(Rational::zero);
        let one: Rational = num_traits::One::one();
        let coeffs: Vec<Vec<Rational>> = curve
            .components()
            .iter()
            .map(|p| p.derivative().compose_affine(&one, &c).coeffs().to_vec())
            .collect();
        let width = coeffs.iter().map(Vec::len).max().unwrap_or(0);
        let get = |i: usize, m: usize| coeffs[i].get(m).cloned().unwrap_or_else(Rational::zero);
        let mut terms = Vec::new();
        let mut max_exp = 0;
        for subset in subsets(width, d) {
            let minor: Vec<Vec<Rational>> = (0..d).map(|i| subset.iter().map(|&m| get(i, m)).collect()).collect();
            let w = determinant(&minor);
            if w.is_zero() {
                continue;
            }
            let alpha: Vec<u32> = subset.iter().map(|&m| m as u32).collect();
            let schur = divide_by_vandermonde(&alternant(&alpha))?;
            let monomials: Vec<(f64, Vec<u32>)> = schur
                .terms()
                .map(|(e, k)| {
                    max_exp = max_exp.max(e.iter().copied().max().unwrap_or(0));
                    (k.to_f64().unwrap_or(f64::NAN), e.clone())
                })
                .collect();
            terms.push(SchurTerm { weight: super::rational_to_f64(&w), monomials });
        }
        Ok(JacobianQuotient { center, d, max_exp, terms })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    /// The quotient at offsets `v_k = t_k - center`.
    pub fn eval_offsets(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.d);
        let n = self.max_exp as usize + 1;
        let mut powers = vec![1.0; self.d * n];
        for (k, &x) in v.iter().enumerate() {
            for e in 1..n {
                powers[k * n + e] = powers[k * n + e - 1] * x;
            }
        }
        let mut total = 0.0;
        for term in &self.terms {
            let mut s = 0.0;
            for (coef, exps) in &term.monomials {
                let mut m = *coef;
                for (k, &e) in exps.iter().enumerate() {
                    m *= powers[k * n + e as usize];
                }
                s += m;
            }
            total += term.weight * s;
        }
        total
    }

    /// Mixed partial of the quotient in the offsets listed in `vars`
    /// (distinct indices), evaluated at `v`.
    pub fn eval_partial_offsets(&self, v: &[f64], vars: &[usize]) -> f64 {
        debug_assert_eq!(v.len(), self.d);
        let n = self.max_exp as usize + 1;
        let mut powers = vec![1.0; self.d * n];
        for (k, &x) in v.iter().enumerate() {
            for e in 1..n {
                powers[k * n + e] = powers[k * n + e - 1] * x;
            }
        }
        let mut total = 0.0;
        for term in &self.terms {
            let mut s = 0.0;
            'monomial: for (coef, exps) in &term.monomials {
                let mut m = *coef;
                for (k, &e) in exps.iter().enumerate() {
                    if vars.contains(&k) {
                        if e == 0 {
                            continue 'monomial;
                        }
                        m *= e as f64 * powers[k * n + e as usize - 1];
                    } else {
                        m *= powers[k * n + e as usize];
                    }
                }
                s += m;
            }
            total += term.weight * s;
        }
        total
    }

    pub fn eval(&self, t: &[f64]) -> f64 {
        let v: Vec<f64> = t.iter().map(|x| x - self.center).collect();
        self.eval_offsets(&v)
    }
}

/// Increasing `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;

    #[test]
    fn subsets_count() {
        assert_eq!(subsets(6, 3).len(), 20);
        assert_eq!(subsets(3, 3), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn agrees_with_exact_jacobian() {
        let c = PolyCurve::new(vec![
            Polynomial::from_i64s(&[2, 0, 2, -5, 4, 1, 4]),
            Polynomial::from_i64s(&[5, 3, -4, 4, 3, 0, -2]),
            Polynomial::from_i64s(&[0, 1, 0, 0, -3, 0, 1]),
        ])
        .unwrap();
        let b = -15.554328156955918;
        let q = JacobianQuotient::new(&c, b).unwrap();
        for t in [
            [-20.0f64, -20.0 + 1e-9, -25.0],
            [-2e3, -3e3, -16.0],
            [-644034323803.3488, -1483334108.8103588, -664.2262704038404],
        ] {
            let tq: Vec<Rational> = t.iter().map(|x| Rational::from_float(*x).unwrap()).collect();
            let mut v = Rational::from_float(1.0).unwrap();
            for k in 0..3 {
                for l in 0..k {
                    v *= &tq[k] - &tq[l];
                }
            }
            let exact = super::super::rational_to_f64(&(c.jacobian_exact(&tq) / v));
            let got = q.eval(&t);
            assert!((got / exact - 1.0).abs() < 1e-9, "{t:?}: {got} vs {exact}");
        }
    }

    #[test]
    fn partials_match_differences() {
        let c = PolyCurve::new(vec![
            Polynomial::from_i64s(&[0, 1, 0, 2]),
            Polynomial::from_i64s(&[1, 0, 3, 0, 1]),
        ])
        .unwrap();
        let q = JacobianQuotient::new(&c, 0.5).unwrap();
        let v = [0.3, 1.7];
        let h = 1e-5;
        let fd = (q.eval_offsets(&[v[0], v[1] + h]) - q.eval_offsets(&[v[0], v[1] - h])) / (2.0 * h);
        assert!((q.eval_partial_offsets(&v, &[1]) - fd).abs() < 1e-6 * fd.abs());
        let fd2 = (q.eval_offsets(&[v[0] + h, v[1] + h]) - q.eval_offsets(&[v[0] + h, v[1] - h])
            - q.eval_offsets(&[v[0] - h, v[1] + h])
            + q.eval_offsets(&[v[0] - h, v[1] - h]))
            / (4.0 * h * h);
        assert!((q.eval_partial_offsets(&v, &[0, 1]) - fd2).abs() < 1e-4 * fd2.abs().max(1.0));
        assert_eq!(q.eval_partial_offsets(&v, &[]), q.eval_offsets(&v));
    }

    #[test]
    fn moment_curve_quotient_is_constant() {
        let q = JacobianQuotient::new(&PolyCurve::moment(4).unwrap(), 0.0).unwrap();
        assert_eq!(q.eval(&[-1.0, 0.5, 2.0, 7.0]), 24.0);
    }
}
