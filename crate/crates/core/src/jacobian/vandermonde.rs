//! Alternating power sums `det[t_j^{alpha_i}]`, their Vandermonde factor,
//! and the integrate-then-multiply recursion that produces them.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::{
    alternant, determinant, determinant_f64, divide_by_vandermonde, signed_permutations, MultiPoly, Rational,
};

/// `C * det[t_j^{alpha_i}]` with `alpha` strictly increasing.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerDeterminant {
    exponents: Vec<u32>,
    coefficient: Rational,
}

impl PowerDeterminant {
    pub fn new(exponents: Vec<u32>, coefficient: Rational) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::InvalidArgument("empty exponent list".into()));
        }
        if exponents.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!("exponents must increase strictly: {exponents:?}")));
        }
        if coefficient.is_zero() {
            return Err(Error::InvalidArgument("zero coefficient".into()));
        }
        Ok(PowerDeterminant { exponents, coefficient })
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn coefficient(&self) -> &Rational {
        &self.coefficient
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    fn check_arity(&self, n: usize) -> Result<()> {
        if n != self.dim() {
            return Err(Error::InvalidArgument(format!("expected {} points, got {n}", self.dim())));
        }
        Ok(())
    }

    /// Direct determinant in floating point.
    pub fn value(&self, t: &[f64]) -> Result<f64> {
        self.check_arity(t.len())?;
        let rows: Vec<Vec<f64>> =
            t.iter().map(|&x| self.exponents.iter().map(|&a| x.powi(a as i32)).collect()).collect();
        Ok(crate::poly::rational_to_f64(&self.coefficient) * determinant_f64(&rows))
    }

    /// Direct determinant in exact arithmetic.
    pub fn value_exact(&self, t: &[Rational]) -> Result<Rational> {
        self.check_arity(t.len())?;
        let rows: Vec<Vec<Rational>> = t
            .iter()
            .map(|x| self.exponents.iter().map(|&a| num_traits::pow(x.clone(), a as usize)).collect())
            .collect();
        Ok(&self.coefficient * determinant(&rows))
    }

    /// The symmetric quotient `det[t_j^{alpha_i}] / prod_{i<j} (t_j - t_i)`,
    /// checked to be symmetric with nonnegative coefficients.
    pub fn factor(&self) -> Result<MultiPoly> {
        power_determinant_factor(&self.exponents)
    }
}

/// See [`PowerDeterminant::factor`].
pub fn power_determinant_factor(exponents: &[u32]) -> Result<MultiPoly> {
    if exponents.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!("exponents must increase strictly: {exponents:?}")));
    }
    let q = divide_by_vandermonde(&alternant(exponents))?;
    if q.is_zero() {
        return Err(Error::Invariant(format!("zero quotient for {exponents:?}")));
    }
    if !q.is_symmetric() {
        return Err(Error::Invariant(format!("quotient for {exponents:?} is not symmetric")));
    }
    if !q.has_nonnegative_coefficients() {
        return Err(Error::Invariant(format!("quotient for {exponents:?} has a negative coefficient")));
    }
    Ok(q)
}

pub fn power_determinant_value(exponents: &[u32], t: &[f64]) -> Result<f64> {
    PowerDeterminant::new(exponents.to_vec(), Rational::one())?.value(t)
}

/// Strictly increasing lists of length `1..=max_dim` with sum at most `max_sum`.
pub fn increasing_exponent_lists(max_dim: usize, max_sum: u32) -> Vec<Vec<u32>> {
    fn rec(start: u32, left: usize, budget: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        let mut a = start;
        // the remaining entries are at least a, a+1, ...
        while (left as u32) * a + (left as u32) * (left as u32 - 1) / 2 <= budget {
            cur.push(a);
            rec(a + 1, left - 1, budget - a, cur, out);
            cur.pop();
            a += 1;
        }
    }
    let mut out = Vec::new();
    for d in 1..=max_dim {
        rec(0, d, max_sum, &mut Vec::new(), &mut out);
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactorizationSummary {
    pub lists: usize,
    pub max_terms: usize,
    pub failures: Vec<(Vec<u32>, String)>,
}

/// Factors every list from [`increasing_exponent_lists`].
pub fn check_vandermonde_family(max_dim: usize, max_sum: u32) -> FactorizationSummary {
    let lists = increasing_exponent_lists(max_dim, max_sum);
    let mut summary = FactorizationSummary { lists: lists.len(), max_terms: 0, failures: Vec::new() };
    for alpha in lists {
        match power_determinant_factor(&alpha) {
            Ok(q) => summary.max_terms = summary.max_terms.max(q.num_terms()),
            Err(e) => summary.failures.push((alpha, e.to_string())),
        }
    }
    summary
}

/// `C * sum_rho sgn(rho) prod_j t_j^{k_rho(j)}` with integer (possibly
/// negative) exponents in the order they were produced.
#[derive(Clone, Debug, PartialEq)]
pub struct AlternatingPowerSum {
    pub exponents: Vec<i64>,
    pub coefficient: Rational,
}

type Terms = BTreeMap<Vec<i64>, Rational>;

impl AlternatingPowerSum {
    fn expand(&self) -> Terms {
        let mut terms = Terms::new();
        for (perm, sign) in signed_permutations(self.exponents.len()) {
            let e: Vec<i64> = perm.iter().map(|&j| self.exponents[j]).collect();
            let c = if sign > 0 { self.coefficient.clone() } else { -self.coefficient.clone() };
            add_term(&mut terms, e, c);
        }
        terms
    }

    /// Sorts the exponents increasingly, absorbing the permutation sign.
    pub fn normalized(&self) -> Self {
        let mut idx: Vec<usize> = (0..self.exponents.len()).collect();
        idx.sort_by_key(|&i| self.exponents[i]);
        let mut inversions = 0;
        for i in 0..idx.len() {
            for j in i + 1..idx.len() {
                if idx[i] > idx[j] {
                    inversions += 1;
                }
            }
        }
        let coefficient = if inversions % 2 == 0 { self.coefficient.clone() } else { -self.coefficient.clone() };
        AlternatingPowerSum { exponents: idx.iter().map(|&i| self.exponents[i]).collect(), coefficient }
    }

    pub fn to_power_determinant(&self) -> Result<PowerDeterminant> {
        let n = self.normalized();
        if n.exponents.iter().any(|&e| e < 0) {
            return Err(Error::Precondition(format!("negative exponent in {:?}", n.exponents)));
        }
        PowerDeterminant::new(n.exponents.iter().map(|&e| e as u32).collect(), n.coefficient)
    }
}

fn add_term(terms: &mut Terms, e: Vec<i64>, c: Rational) {
    let slot = terms.entry(e.clone()).or_insert_with(Rational::zero);
    *slot += c;
    if slot.is_zero() {
        terms.remove(&e);
    }
}

/// The index choices in `prod_{j} (t_j^{a_j} - t_{j+1}^{a_j})`: entry `j` of
/// each choice is `j` or `j + 1` (0-based), with the sign of the term.
pub fn difference_product_choices(factors: usize) -> Vec<(Vec<usize>, i8)> {
    let mut out = Vec::with_capacity(1 << factors);
    for mask in 0u32..(1 << factors) {
        let choice: Vec<usize> = (0..factors).map(|j| j + ((mask >> j) & 1) as usize).collect();
        let sign = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
        out.push((choice, sign));
    }
    out
}

/// Whether a choice from [`difference_product_choices`] picks some variable twice.
pub fn has_repeated_index(choice: &[usize]) -> bool {
    choice.windows(2).any(|w| w[0] == w[1])
}

/// One step `S_{r-1} -> S_r`: integrate over `[t_1, t_2] x ... x [t_{r-1}, t_r]`,
/// then multiply by `prod_s t_s^sigma`. The expansion is carried out term by
/// term and the result is checked to be the alternating sum with exponents
/// `(k_1 + 1 + sigma, ..., k_{r-1} + 1 + sigma, sigma)`.
pub fn integrate_alternating(prev: &AlternatingPowerSum, sigma: i64, level: usize) -> Result<AlternatingPowerSum> {
    let m = prev.exponents.len();
    if prev.exponents.contains(&-1) {
        return Err(Error::LogarithmicTerm { level });
    }
    let r = m + 1;
    let mut terms = Terms::new();
    for (perm, sign) in signed_permutations(m) {
        // integral of prod_j w_j^{k_rho(j)} over the box
        let powers: Vec<i64> = perm.iter().map(|&j| prev.exponents[j] + 1).collect();
        let mut scale = if sign > 0 { prev.coefficient.clone() } else { -prev.coefficient.clone() };
        for &p in &powers {
            scale /= Rational::from_integer(p.into());
        }
        // int_{t_j}^{t_{j+1}} w^{k} dw = (t_{j+1}^{k+1} - t_j^{k+1}) / (k+1)
        // = -(t_j^{k+1} - t_{j+1}^{k+1}) / (k+1)
        if m % 2 == 1 {
            scale = -scale;
        }
        for (choice, s) in difference_product_choices(m) {
            let mut e = vec![sigma; r];
            for (j, &var) in choice.iter().enumerate() {
                e[var] += powers[j];
            }
            add_term(&mut terms, e, if s > 0 { scale.clone() } else { -scale.clone() });
        }
    }
    let mut exponents: Vec<i64> = prev.exponents.iter().map(|k| k + 1 + sigma).collect();
    exponents.push(sigma);
    let identity = exponents.clone();
    let coefficient = terms.get(&identity).cloned().unwrap_or_else(Rational::zero);
    if coefficient.is_zero() {
        return Err(Error::Invariant(format!("level {level}: leading monomial cancelled")));
    }
    let candidate = AlternatingPowerSum { exponents, coefficient };
    if candidate.expand() != terms {
        return Err(Error::Invariant(format!("level {level}: repeated-index terms did not cancel")));
    }
    Ok(candidate)
}

/// Iterates [`integrate_alternating`] from `S_1 = t^base` with one `sigma`
/// per level `2, 3, ...`, and returns the final alternating determinant.
pub fn s_r_recursion(schedule: &[i64], base: i64) -> Result<PowerDeterminant> {
    let mut s = AlternatingPowerSum { exponents: vec![base], coefficient: Rational::one() };
    for (i, &sigma) in schedule.iter().enumerate() {
        s = integrate_alternating(&s, sigma, i + 2)?;
    }
    s.to_power_determinant()
}

/// Like [`s_r_recursion`] but keeps every level.
pub fn s_r_levels(schedule: &[i64], base: i64) -> Result<Vec<AlternatingPowerSum>> {
    let mut s = AlternatingPowerSum { exponents: vec![base], coefficient: Rational::one() };
    let mut out = vec![s.clone()];
    for (i, &sigma) in schedule.iter().enumerate() {
        s = integrate_alternating(&s, sigma, i + 2)?;
        out.push(s.clone());
    }
    Ok(out)
}
