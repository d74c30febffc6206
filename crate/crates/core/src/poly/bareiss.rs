//! Fraction-free (Bareiss) determinants over exact integral domains.

use num_traits::{One, Zero};

use super::{Polynomial, Rational};

/// The operations Bareiss elimination needs. `div_exact` is only ever called
/// on quotients known to be exact.
pub trait ExactRing: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn mul(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn div_exact(&self, rhs: &Self) -> Self;
}

impl ExactRing for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div_exact(&self, rhs: &Self) -> Self {
        self / rhs
    }
}

impl ExactRing for Polynomial {
    fn zero() -> Self {
        Polynomial::zero()
    }
    fn one() -> Self {
        Polynomial::one()
    }
    fn is_zero(&self) -> bool {
        Polynomial::is_zero(self)
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div_exact(&self, rhs: &Self) -> Self {
        Polynomial::div_exact(self, rhs).expect("Bareiss quotient is exact")
    }
}

/// Determinant of a square matrix given as rows.
///
/// Panics if the matrix is not square.
pub fn determinant<T: ExactRing>(rows: &[Vec<T>]) -> T {
    let n = rows.len();
    assert!(rows.iter().all(|r| r.len() == n), "determinant of a non-square matrix");
    if n == 0 {
        return T::one();
    }
    let mut m: Vec<Vec<T>> = rows.to_vec();
    let mut sign_flip = false;
    let mut prev = T::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign_flip = !sign_flip;
                }
                None => return T::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = m[i][j].mul(&m[k][k]).sub(&m[i][k].mul(&m[k][j]));
                m[i][j] = num.div_exact(&prev);
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign_flip {
        det.neg()
    } else {
        det
    }
}

/// Double-precision determinant by LU with partial pivoting.
pub fn determinant_f64(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    m.determinant()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_rational;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn cofactor(rows: &[Vec<Rational>]) -> Rational {
        let n = rows.len();
        if n == 1 {
            return rows[0][0].clone();
        }
        let mut acc: Rational = Zero::zero();
        for j in 0..n {
            let minor: Vec<Vec<Rational>> = rows[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| v.clone()).collect())
                .collect();
            let term = &rows[0][j] * cofactor(&minor);
            if j % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    #[test]
    fn matches_cofactor_expansion() {
        let rows = vec![
            vec![q("0"), q("2/3"), q("1")],
            vec![q("5"), q("-1"), q("1/2")],
            vec![q("3"), q("7/5"), q("0")],
        ];
        assert_eq!(determinant(&rows), cofactor(&rows));
        let singular = vec![vec![q("1"), q("2")], vec![q("2"), q("4")]];
        assert!(Zero::is_zero(&determinant(&singular)));
    }

    #[test]
    fn polynomial_entries() {
        // det((2s, 3s^2), (2, 6s)) = 6 s^2
        let rows = vec![
            vec![Polynomial::from_i64s(&[0, 2]), Polynomial::from_i64s(&[0, 0, 3])],
            vec![Polynomial::from_i64s(&[2]), Polynomial::from_i64s(&[0, 6])],
        ];
        assert_eq!(determinant(&rows), Polynomial::from_i64s(&[0, 0, 6]));
    }

    #[test]
    fn float_lu() {
        let rows = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        assert!((determinant_f64(&rows) + 2.0).abs() < 1e-14);
    }
}
