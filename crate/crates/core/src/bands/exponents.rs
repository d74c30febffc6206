//! Exponent bookkeeping for the lower bounds on `|E_2|` and `|F_2|`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::operator::endpoint_exponents_exact;
use crate::poly::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TowerVariant {
    /// `2d` levels ending in `E_2`.
    MlE,
    /// `2d - 1` levels ending in `F_2`.
    MlF,
}

impl TowerVariant {
    pub fn levels(self, d: usize) -> usize {
        match self {
            TowerVariant::MlE => 2 * d,
            TowerVariant::MlF => 2 * d - 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TowerVariant::MlE => "mle",
            TowerVariant::MlF => "mlf",
        }
    }
}

/// `1 + 3 + ... + (d-1)` for even `d`, `2 + 4 + ... + (d-1)` for odd `d`.
pub fn r_d(d: usize) -> usize {
    (1..d).filter(|j| (d - j) % 2 == 1).sum()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentRecord {
    pub d: usize,
    pub r_d: usize,
    pub k: usize,
    pub quasi_free: usize,
    /// `floor(k/2)` for the `E_2` bound, `ceil(k/2)` for `F_2`.
    pub half_k: usize,
    /// Exponent of `beta1 / alpha1`: quasi-free count plus `half_k`.
    pub beta_exponent: usize,
}

pub fn exponent_bookkeeping(d: usize, k: usize, quasi_free: usize, variant: TowerVariant) -> Result<ExponentRecord> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("dimension must be at least 2, got {d}")));
    }
    if !(d..variant.levels(d) + usize::from(variant == TowerVariant::MlF)).contains(&k) {
        return Err(Error::InvalidArgument(format!("band length k = {k} outside [d, 2d) for d = {d}")));
    }
    let r = r_d(d);
    if r < d - 1 {
        return Err(named("r_d >= d - 1", format!("r_{d} = {r}")));
    }
    let half_k = match variant {
        TowerVariant::MlE => k / 2,
        TowerVariant::MlF => k.div_ceil(2),
    };
    let beta_exponent = quasi_free + half_k;
    if beta_exponent > d - 1 {
        return Err(named(
            "M + half(k) <= d - 1",
            format!("M = {quasi_free}, k = {k}: {beta_exponent} > {}", d - 1),
        ));
    }
    Ok(ExponentRecord { d, r_d: r, k, quasi_free, half_k, beta_exponent })
}

/// Quasi-free counts `M` over all partitions of the indices
/// `top - k + 1..=top` whose classification meets the counting condition
/// (exactly `d` free or quasi-free, every even index free, and `top` free
/// when `top_free` is set, as for the `F_2` towers).
pub fn admissible_quasi_free_counts(d: usize, k: usize, top: usize, top_free: bool) -> Vec<usize> {
    let indices: Vec<usize> = (top + 1 - k..=top).collect();
    let mut found = std::collections::BTreeSet::new();
    let mut labels = vec![0usize; k];
    fn walk(
        pos: usize,
        blocks: usize,
        labels: &mut [usize],
        indices: &[usize],
        d: usize,
        top_free: bool,
        found: &mut std::collections::BTreeSet<usize>,
    ) {
        if pos == labels.len() {
            let mut sizes = vec![0usize; blocks];
            let mut head = vec![usize::MAX; blocks];
            for (j, &b) in labels.iter().enumerate() {
                sizes[b] += 1;
                head[b] = head[b].min(indices[j]);
            }
            let quasi = sizes.iter().filter(|&&s| s == 2).count();
            let evens_free = indices.iter().zip(labels.iter()).all(|(&i, &b)| i % 2 == 1 || head[b] == i);
            let last = labels.len() - 1;
            let top_ok = !top_free || head[labels[last]] == indices[last];
            if blocks + quasi == d && evens_free && top_ok {
                found.insert(quasi);
            }
            return;
        }
        for b in 0..=blocks {
            labels[pos] = b;
            walk(pos + 1, blocks.max(b + 1), labels, indices, d, top_free, found);
        }
    }
    walk(0, 0, &mut labels, &indices, d, top_free, &mut found);
    found.into_iter().collect()
}

/// Runs [`exponent_bookkeeping`] on every admissible `(k, M)` of both
/// variants; returns the number of cases checked.
pub fn validate_exponent_bookkeeping(d: usize) -> Result<usize> {
    let mut cases = 0;
    for variant in [TowerVariant::MlE, TowerVariant::MlF] {
        let top = variant.levels(d);
        for k in d..=top.min(2 * d - 1) {
            for m in admissible_quasi_free_counts(d, k, top, variant == TowerVariant::MlF) {
                exponent_bookkeeping(d, k, m, variant)?;
                cases += 1;
            }
        }
    }
    Ok(cases)
}

/// Exponents `(r1, r2, s1, s2)` of `alpha1, alpha2, beta1, beta2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quadruple {
    pub r1: Rational,
    pub r2: Rational,
    pub s1: Rational,
    pub s2: Rational,
}

impl Quadruple {
    pub fn exponents(&self) -> [Rational; 4] {
        [self.r1.clone(), self.r2.clone(), self.s1.clone(), self.s2.clone()]
    }

    /// Normal form of `alpha1^{d(d+1)/2} (beta1/alpha1)^d (beta2/beta1)^2 (alpha2/alpha1)^e`
    /// with `e = max(0, (1-n)(d-1)/2 - 1)`, the bound for a small last parameter.
    pub fn small_last_parameter(d: usize, n: &Rational) -> Self {
        let d_r = Rational::from_integer(BigInt::from(d));
        let half = Rational::new(BigInt::one(), BigInt::from(2));
        let raw = (Rational::one() - n) * (&d_r - Rational::one()) * &half - Rational::one();
        let e = if raw.is_positive() { raw } else { Rational::zero() };
        let total = Rational::from_integer(BigInt::from(d * (d - 1) / 2));
        Quadruple {
            r1: total - &e,
            r2: e,
            s1: &d_r - Rational::from_integer(BigInt::from(2)),
            s2: Rational::from_integer(BigInt::from(2)),
        }
    }
}

/// `r1 + r2 = d(d-1)/2`, `s1 + s2 = d`, `s2/q' - r2/q - 1 > 0` at `q = q_d`.
pub fn validate_quadruple(d: usize, q: &Quadruple) -> Result<()> {
    let total = Rational::from_integer(BigInt::from(d * (d - 1) / 2));
    if &q.r1 + &q.r2 != total {
        return Err(named("r1 + r2 = d(d-1)/2", format!("{} + {} != {}", q.r1, q.r2, total)));
    }
    if &q.s1 + &q.s2 != Rational::from_integer(BigInt::from(d)) {
        return Err(named("s1 + s2 = d", format!("{} + {} != {d}", q.s1, q.s2)));
    }
    let (_, qd) = endpoint_exponents_exact(d);
    let inv_q = qd.recip();
    let inv_q_dual = Rational::one() - &inv_q;
    let slack = &q.s2 * inv_q_dual - &q.r2 * inv_q - Rational::one();
    if !slack.is_positive() {
        return Err(named("s2/q' - r2/q - 1 > 0", format!("value {slack}")));
    }
    Ok(())
}

fn named(name: &str, detail: String) -> Error {
    Error::Hypothesis { name: name.to_string(), detail }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(p: i64, q: i64) -> Rational {
        Rational::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn r_values() {
        assert_eq!(r_d(2), 1);
        assert_eq!(r_d(3), 2);
        assert_eq!(r_d(4), 4);
        assert_eq!(r_d(5), 6);
        for d in 2..12 {
            assert!(r_d(d) >= d - 1);
        }
    }

    #[test]
    fn bookkeeping_over_all_partitions() {
        // d = 2, suffix {3, 4}: only the two-singleton split is admissible
        assert_eq!(admissible_quasi_free_counts(2, 2, 4, false), vec![0]);
        // {2, 3} as one band has M = 1 but leaves the top index quasi-free
        assert_eq!(admissible_quasi_free_counts(2, 2, 3, false), vec![0, 1]);
        assert_eq!(admissible_quasi_free_counts(2, 2, 3, true), vec![0]);
        for d in 2..=5 {
            assert!(validate_exponent_bookkeeping(d).unwrap() > 0, "d = {d}");
        }
    }

    #[test]
    fn free_index_count() {
        assert!(exponent_bookkeeping(3, 3, 0, TowerVariant::MlE).is_ok());
        // k = 5: floor 2, M = 0 -> 2 <= 2
        assert_eq!(exponent_bookkeeping(3, 5, 0, TowerVariant::MlE).unwrap().beta_exponent, 2);
        assert!(exponent_bookkeeping(3, 5, 1, TowerVariant::MlE).is_err());
        assert!(exponent_bookkeeping(3, 5, 0, TowerVariant::MlF).is_err());
        assert!(exponent_bookkeeping(3, 6, 0, TowerVariant::MlE).is_err());
    }

    #[test]
    fn small_last_parameter_quadruples_validate() {
        for d in 2..=6 {
            for k in 0..=12 {
                let n = rat((d * (d + 1)) as i64, (2 * k + d * (d + 1)) as i64);
                let q = Quadruple::small_last_parameter(d, &n);
                validate_quadruple(d, &q).unwrap();
            }
        }
        let q = Quadruple::small_last_parameter(5, &rat(1, 3));
        // (1 - 1/3) * 4 / 2 - 1 = 1/3
        assert_eq!(q.r2, rat(1, 3));
    }

    #[test]
    fn bad_quadruples_named() {
        let mut q = Quadruple::small_last_parameter(3, &rat(1, 1));
        q.s1 = rat(2, 1);
        assert!(matches!(validate_quadruple(3, &q), Err(Error::Hypothesis { name, .. }) if name == "s1 + s2 = d"));
        let q = Quadruple { r1: rat(0, 1), r2: rat(3, 1), s1: rat(1, 1), s2: rat(2, 1) };
        assert!(matches!(validate_quadruple(3, &q), Err(Error::Hypothesis { name, .. }) if name.starts_with("s2/q'")));
    }
}
