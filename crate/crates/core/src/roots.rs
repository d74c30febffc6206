//! Complex roots of exact polynomials with certified radii.
//!
//! Multiplicities come from an exact square-free decomposition. Each
//! square-free factor is solved through the eigenvalues of its (rescaled)
//! companion matrix, polished by Newton steps and certified by the
//! inclusion disk `|z - root| <= m |f(z) / f'(z)|` for a degree-`m` factor.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::{rational_to_f64, Polynomial};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
}

impl Root {
    pub fn is_real(&self) -> bool {
        self.value.im == 0.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RootSet {
    pub roots: Vec<Root>,
    /// Requested tolerance; every reported root lies within
    /// `tolerance * max(1, |root|)` of a true root.
    pub tolerance: f64,
    /// Largest inclusion radius actually certified.
    pub certified_radius: f64,
}

impl RootSet {
    pub fn empty(tolerance: f64) -> Self {
        RootSet { roots: Vec::new(), tolerance, certified_radius: 0.0 }
    }

    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    /// Distinct real roots, ascending.
    pub fn real_roots(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.roots.iter().filter(|r| r.is_real()).map(|r| r.value.re).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.roots.iter().map(|r| r.value).collect()
    }
}

const MAX_NEWTON: usize = 60;

/// All complex roots of `p` with multiplicity.
pub fn find_roots(p: &Polynomial, tol: f64) -> Result<RootSet> {
    if p.is_zero() {
        return Err(Error::InvalidArgument("roots of the zero polynomial".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("root tolerance must be positive, got {tol}")));
    }
    let mut raw: Vec<(Complex64, usize)> = Vec::new();
    let mut certified: f64 = 0.0;
    for (factor, mult) in p.squarefree_decomposition() {
        for (z, r) in squarefree_roots(&factor, tol)? {
            raw.push((z, mult));
            certified = certified.max(r);
        }
    }
    let roots = merge_clusters(raw, tol);
    Ok(RootSet { roots, tolerance: tol, certified_radius: certified })
}

fn horner(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// Roots of a monic square-free polynomial with their certified radii.
fn squarefree_roots(f: &Polynomial, tol: f64) -> Result<Vec<(Complex64, f64)>> {
    let m = f.degree() as usize;
    let c: Vec<f64> = f.coeffs().iter().map(rational_to_f64).collect();
    if m == 1 {
        return Ok(vec![(Complex64::new(-c[0] / c[1], 0.0), 0.0)]);
    }
    // rescale s = rho w so the companion matrix is well balanced
    let rho = (0..m)
        .filter(|&k| c[k] != 0.0)
        .map(|k| c[k].abs().powf(1.0 / (m - k) as f64))
        .fold(0.0f64, f64::max);
    let rho = if rho > 0.0 { 2f64.powi(rho.log2().round() as i32) } else { 1.0 };
    let scaled: Vec<f64> = (0..m).map(|k| c[k] / rho.powi((m - k) as i32)).collect();
    let comp = DMatrix::from_fn(m, m, |i, j| {
        if j == m - 1 {
            -scaled[i]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let schur = nalgebra::linalg::Schur::try_new(comp, f64::EPSILON, 10_000)
        .ok_or(Error::RootNonconvergence { degree: m, residual: f64::NAN })?;
    let eig = schur.complex_eigenvalues();
    let mut out = Vec::with_capacity(m);
    for w in eig.iter() {
        let mut z = w * rho;
        let mut radius = f64::INFINITY;
        for _ in 0..MAX_NEWTON {
            let (v, dv) = horner(&c, z);
            if v == Complex64::new(0.0, 0.0) {
                radius = 0.0;
                break;
            }
            if dv.norm() == 0.0 {
                break;
            }
            let step = v / dv;
            let r = m as f64 * step.norm();
            if r < radius {
                radius = r;
            }
            z -= step;
            if step.norm() <= 4.0 * f64::EPSILON * z.norm().max(f64::MIN_POSITIVE) {
                break;
            }
        }
        let (v, dv) = horner(&c, z);
        let final_r = if v.norm() == 0.0 { 0.0 } else { m as f64 * (v / dv).norm() };
        let radius = final_r.min(radius);
        if !(radius <= tol * z.norm().max(1.0)) {
            return Err(Error::RootNonconvergence { degree: m, residual: v.norm() });
        }
        out.push((z, radius));
    }
    symmetrize(&mut out, tol);
    Ok(out)
}

/// Snaps near-real roots onto the axis and pairs the rest into exact
/// conjugates (real coefficients).
fn symmetrize(roots: &mut [(Complex64, f64)], tol: f64) {
    for (z, r) in roots.iter_mut() {
        if z.im.abs() <= (tol * z.norm().max(1.0)).max(*r) {
            z.im = 0.0;
        }
    }
    let mut used = vec![false; roots.len()];
    for i in 0..roots.len() {
        if roots[i].0.im <= 0.0 || used[i] {
            continue;
        }
        let target = roots[i].0.conj();
        let partner = (0..roots.len())
            .filter(|&j| !used[j] && j != i && roots[j].0.im < 0.0)
            .min_by(|&a, &b| (roots[a].0 - target).norm().total_cmp(&(roots[b].0 - target).norm()));
        if let Some(j) = partner {
            used[i] = true;
            used[j] = true;
            let z = Complex64::new(
                0.5 * (roots[i].0.re + roots[j].0.re),
                0.5 * (roots[i].0.im - roots[j].0.im),
            );
            roots[i].0 = z;
            roots[j].0 = z.conj();
        }
    }
}

/// Roots closer than `8 tol` (relative to magnitude) form one cluster with
/// summed multiplicity, located at the multiplicity-weighted mean.
fn merge_clusters(raw: Vec<(Complex64, usize)>, tol: f64) -> Vec<Root> {
    let n = raw.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let scale = raw[i].0.norm().max(raw[j].0.norm()).max(1.0);
            if (raw[i].0 - raw[j].0).norm() <= 8.0 * tol * scale {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut out: Vec<Root> = Vec::new();
    for root in 0..n {
        if find(&mut parent, root) != root {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&i| find(&mut parent, i) == root).collect();
        let mult: usize = members.iter().map(|&i| raw[i].1).sum();
        let mut z = members.iter().map(|&i| raw[i].0 * raw[i].1 as f64).sum::<Complex64>() / mult as f64;
        if members.iter().all(|&i| raw[i].0.im == 0.0) {
            z.im = 0.0;
        }
        out.push(Root { value: z, multiplicity: mult });
    }
    out.sort_by(|a, b| a.value.re.total_cmp(&b.value.re).then(a.value.im.total_cmp(&b.value.im)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_real_roots() {
        let rs = find_roots(&Polynomial::from_i64s(&[-1, 0, 1]), 1e-10).unwrap();
        assert_eq!(rs.roots.len(), 2);
        assert_eq!(rs.real_roots(), vec![-1.0, 1.0]);
        assert_eq!(rs.total_multiplicity(), 2);
    }

    #[test]
    fn repeated_root() {
        let rs = find_roots(&Polynomial::from_i64s(&[0, 0, 1]), 1e-10).unwrap();
        assert_eq!(rs.roots, vec![Root { value: Complex64::new(0.0, 0.0), multiplicity: 2 }]);
    }

    #[test]
    fn radicals() {
        let rs = find_roots(&Polynomial::from_i64s(&[0, -2, 0, 1]), 1e-10).unwrap();
        let r = rs.real_roots();
        let s2 = 2f64.sqrt();
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([-s2, 0.0, s2]) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn conjugate_pairs() {
        // (s^2 + 1)^2 (s - 3)
        let p = Polynomial::from_i64s(&[1, 0, 1]);
        let p = &(&p * &p) * &Polynomial::from_i64s(&[-3, 1]);
        let rs = find_roots(&p, 1e-10).unwrap();
        assert_eq!(rs.total_multiplicity(), 5);
        let complex: Vec<_> = rs.roots.iter().filter(|r| !r.is_real()).collect();
        assert_eq!(complex.len(), 2);
        assert_eq!(complex[0].value, complex[1].value.conj());
        assert!(complex.iter().all(|r| r.multiplicity == 2));
        assert!(find_roots(&Polynomial::zero(), 1e-10).is_err());
        assert!(find_roots(&Polynomial::one(), 1e-10).unwrap().roots.is_empty());
    }
}
