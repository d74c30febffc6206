//! Sparse multivariate polynomials with integer coefficients, used for
//! alternant (power) determinants and their Vandermonde quotients.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Default)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::monomial(nvars, vec![0; nvars], BigInt::one())
    }

    pub fn monomial(nvars: usize, exps: Vec<u32>, c: BigInt) -> Self {
        assert_eq!(exps.len(), nvars);
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    /// `x_i`
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(nvars, e, BigInt::one())
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn add_term(&mut self, e: Vec<u32>, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            let key: Vec<u32> = self.terms.iter().find(|(_, v)| v.is_zero()).map(|(k, _)| k.clone()).unwrap();
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut acc: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_insert_with(BigInt::zero) += ca * cb;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        MultiPoly { nvars: self.nvars, terms: acc }
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        MultiPoly { nvars: self.nvars, terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect() }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let c = num_traits::ToPrimitive::to_f64(c).unwrap_or(f64::NAN);
                e.iter().zip(x).fold(c, |acc, (&k, &xi)| acc * xi.powi(k as i32))
            })
            .sum()
    }

    /// Exact quotient by `x_a - x_b`; fails if the division leaves a remainder.
    pub fn div_by_difference(&self, a: usize, b: usize) -> Result<Self> {
        // group by the exponent of x_a; coefficients are polynomials with x_a^0
        let mut by_deg: BTreeMap<u32, MultiPoly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut rest = e.clone();
            let k = rest[a];
            rest[a] = 0;
            by_deg.entry(k).or_insert_with(|| MultiPoly::zero(self.nvars)).add_term(rest, c.clone());
        }
        let top = match by_deg.keys().next_back() {
            Some(&k) => k,
            None => return Ok(Self::zero(self.nvars)),
        };
        let xb = Self::var(self.nvars, b);
        let mut carry = Self::zero(self.nvars);
        let mut quotient = Self::zero(self.nvars);
        // synthetic division by (x_a - x_b) with coefficients in the other variables
        for k in (1..=top).rev() {
            let ck = by_deg.remove(&k).unwrap_or_else(|| Self::zero(self.nvars));
            carry = ck.add(&xb.mul(&carry));
            for (e, c) in &carry.terms {
                let mut e = e.clone();
                e[a] = k - 1;
                quotient.add_term(e, c.clone());
            }
        }
        let c0 = by_deg.remove(&0).unwrap_or_else(|| Self::zero(self.nvars));
        let rem = c0.add(&xb.mul(&carry));
        if !rem.is_zero() {
            return Err(Error::Invariant(format!("division by x{} - x{} left a remainder", a + 1, b + 1)));
        }
        Ok(quotient)
    }

    /// Invariance under every transposition of variables.
    pub fn is_symmetric(&self) -> bool {
        (0..self.nvars.saturating_sub(1)).all(|i| self.swap_vars(i, i + 1) == *self)
    }

    pub fn swap_vars(&self, i: usize, j: usize) -> Self {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e = e.clone();
                    e.swap(i, j);
                    (e, c.clone())
                })
                .collect(),
        }
    }

    pub fn has_nonnegative_coefficients(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    /// Total degree, `-1` for zero.
    pub fn total_degree(&self) -> i64 {
        self.terms.keys().map(|e| e.iter().map(|&k| k as i64).sum()).max().unwrap_or(-1)
    }
}

/// All permutations of `0..n` with their signs, in lexicographic order.
pub fn signed_permutations(n: usize) -> Vec<(Vec<usize>, i8)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<(Vec<usize>, i8)>) {
        let n = used.len();
        if prefix.len() == n {
            let mut inversions = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if prefix[i] > prefix[j] {
                        inversions += 1;
                    }
                }
            }
            out.push((prefix.clone(), if inversions % 2 == 0 { 1 } else { -1 }));
            return;
        }
        for k in 0..n {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                rec(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// The alternant `det[x_k^{alpha_j}]` (row `j`, column `k`) expanded over
/// permutations. For `alpha = (0, 1, ..., d-1)` this is `prod_{i<k} (x_k - x_i)`.
pub fn alternant(alpha: &[u32]) -> MultiPoly {
    let d = alpha.len();
    let mut p = MultiPoly::zero(d);
    for (perm, sign) in signed_permutations(d) {
        // column k carries row perm[k]
        let exps: Vec<u32> = perm.iter().map(|&j| alpha[j]).collect();
        p.add_term(exps, BigInt::from(sign));
    }
    p
}

/// Exact quotient by the Vandermonde product `prod_{i<k} (x_k - x_i)`.
pub fn divide_by_vandermonde(p: &MultiPoly) -> Result<MultiPoly> {
    let d = p.nvars();
    let mut q = p.clone();
    for k in 0..d {
        for i in 0..k {
            q = q.div_by_difference(k, i)?;
        }
    }
    Ok(q)
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*t{}", i + 1)?,
                    _ => write!(f, "*t{}^{}", i + 1, k)?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_division_by_difference() {
        // t2^2 - t1^2 = (t2 - t1)(t2 + t1)
        let p = MultiPoly::monomial(2, vec![0, 2], BigInt::one()).sub(&MultiPoly::monomial(2, vec![2, 0], BigInt::one()));
        let q = p.div_by_difference(1, 0).unwrap();
        assert_eq!(q, MultiPoly::var(2, 0).add(&MultiPoly::var(2, 1)));
        assert!(q.is_symmetric());
        assert!(MultiPoly::var(2, 0).div_by_difference(1, 0).is_err());
    }

    #[test]
    fn alternants() {
        let v = alternant(&[0, 1, 2]);
        assert_eq!(divide_by_vandermonde(&v).unwrap(), MultiPoly::one(3));
        let a = alternant(&[0, 2]);
        assert_eq!(divide_by_vandermonde(&a).unwrap(), MultiPoly::var(2, 0).add(&MultiPoly::var(2, 1)));
        assert_eq!(signed_permutations(3).iter().filter(|(_, s)| *s < 0).count(), 3);
    }

    #[test]
    fn mul_and_eval() {
        let x = MultiPoly::var(3, 0);
        let y = MultiPoly::var(3, 2);
        let p = x.add(&y).mul(&x.sub(&y));
        assert_eq!(p.eval(&[3.0, 100.0, 2.0]), 5.0);
        assert_eq!(p.total_degree(), 2);
        assert!(!p.is_symmetric());
    }
}
