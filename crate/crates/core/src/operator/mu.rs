//! The weighted measure `d mu = scale * s^w ds` on `(0, inf)`, `w = 2K / (d(d+1))`.

use rand::Rng;

use crate::decomp::Interval;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MuMeasure {
    pub k: usize,
    pub d: usize,
    /// Constant factor in front of the density (1 unless an affine change
    /// of variables rescaled the torsion).
    pub scale: f64,
}

impl MuMeasure {
    pub fn new(k: usize, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!("dimension must be at least 2, got {d}")));
        }
        Ok(MuMeasure { k, d, scale: 1.0 })
    }

    pub fn with_scale(self, scale: f64) -> Self {
        MuMeasure { scale, ..self }
    }

    fn dd1(&self) -> f64 {
        (self.d * (self.d + 1)) as f64
    }

    /// Density exponent `w = 2K / (d(d+1))`.
    pub fn weight_exponent(&self) -> f64 {
        2.0 * self.k as f64 / self.dd1()
    }

    /// `n = d(d+1) / (2K + d(d+1))`.
    pub fn n(&self) -> f64 {
        self.dd1() / (2.0 * self.k as f64 + self.dd1())
    }

    pub fn density(&self, s: f64) -> f64 {
        self.scale * s.powf(self.weight_exponent())
    }

    /// Antiderivative `n s^{1/n}` (times `scale`).
    pub fn cumulative(&self, s: f64) -> f64 {
        if self.k == 0 {
            return self.scale * s;
        }
        let n = self.n();
        self.scale * n * s.powf(1.0 / n)
    }

    /// `mu([a, b])` in closed form.
    pub fn interval(&self, a: f64, b: f64) -> Result<f64> {
        if !(a >= 0.0) || !(b >= a) {
            return Err(Error::InvalidArgument(format!("mu needs 0 <= a <= b, got [{a}, {b}]")));
        }
        if self.k == 0 {
            return Ok(self.scale * (b - a));
        }
        Ok(self.cumulative(b) - self.cumulative(a))
    }

    /// Total mass of a union of disjoint intervals inside `[0, inf)`.
    pub fn union(&self, pieces: &[Interval]) -> Result<f64> {
        pieces.iter().map(|p| self.interval(p.lo, p.hi)).sum()
    }

    /// The point `s >= a` with `mu([a, s]) = m`.
    pub fn advance(&self, a: f64, m: f64) -> f64 {
        if self.k == 0 {
            return a + m / self.scale;
        }
        let n = self.n();
        (a.powf(1.0 / n) + m / (self.scale * n)).powf(n)
    }

    /// Draws a point of `pieces` with probability proportional to `mu`.
    pub fn sample_union(&self, pieces: &[Interval], rng: &mut impl Rng) -> Option<f64> {
        let masses: Vec<f64> = pieces.iter().map(|p| self.interval(p.lo, p.hi).unwrap_or(0.0)).collect();
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) {
            return None;
        }
        let mut u = rng.random::<f64>() * total;
        for (p, &m) in pieces.iter().zip(&masses) {
            if u < m || std::ptr::eq(p, pieces.last().unwrap()) {
                return Some(self.advance(p.lo, u.min(m)).clamp(p.lo, p.hi));
            }
            u -= m;
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobian::integrate;

    #[test]
    fn flat_density_is_length() {
        let m = MuMeasure::new(0, 3).unwrap();
        assert_eq!(m.n(), 1.0);
        assert_eq!(m.interval(0.25, 0.75).unwrap(), 0.5);
    }

    #[test]
    fn normalization_identity() {
        let m = MuMeasure::new(3, 3).unwrap();
        assert!((m.n() - 2.0 / 3.0).abs() < 1e-15);
        let r: f64 = 0.25;
        assert!((m.interval(0.0, r.powf(m.n())).unwrap() - m.n() * r).abs() < 1e-15);
        assert!((m.interval(0.0, 1.0).unwrap() - m.n()).abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let m = MuMeasure::new(5, 4).unwrap();
        let q = integrate(|s| Ok(m.density(s)), 0.2, 0.9, 1e-13, 0).unwrap().value;
        assert!((m.interval(0.2, 0.9).unwrap() - q).abs() < 1e-13);
    }

    #[test]
    fn advance_inverts_mass() {
        let m = MuMeasure::new(2, 2).unwrap();
        let s = m.advance(0.3, 0.1);
        assert!((m.interval(0.3, s).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn negative_endpoint_rejected() {
        assert!(MuMeasure::new(1, 2).unwrap().interval(-0.1, 0.5).is_err());
    }
}
