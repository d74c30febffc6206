//! Two-stage band structures on `{1, ..., 2d-1}`: a coarse split at scale
//! `delta * alpha1`, then the band holding the last index re-split at
//! `rho * gamma2`.

use crate::error::{Error, Result};

use super::structure::{build_bands, build_bands_indexed, BandParams, BandStructure};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoStageParams {
    pub delta: f64,
    pub delta_prime: f64,
    pub rho: f64,
    pub rho_prime: f64,
    pub alpha1: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub gamma2: f64,
    /// Lower-bound constant for quasi-bound pairs.
    pub c_n: f64,
    pub eps: f64,
    pub k: usize,
    pub d: usize,
}

impl TwoStageParams {
    fn check_chain(&self) -> Result<()> {
        let e = self.eps;
        let mut bad = Vec::new();
        if !(self.rho_prime < e * self.rho) {
            bad.push("rho' < eps rho");
        }
        if !(self.rho < self.delta_prime) {
            bad.push("rho < delta'");
        }
        if !(self.delta_prime < e * self.delta) {
            bad.push("delta' < eps delta");
        }
        if !(self.rho_prime > 0.0) {
            bad.push("rho' > 0");
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("parameter chain violated: {}", bad.join(", "))))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoStageBands {
    pub first: BandStructure,
    /// Bands of the first-stage band containing the last index.
    pub second: BandStructure,
    pub params: TwoStageParams,
}

/// Violations of the six two-stage clauses.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TwoStageVerification {
    pub first_separation: Vec<(usize, usize)>,
    pub first_quasi: Vec<(usize, usize)>,
    pub first_bound: Vec<(usize, usize)>,
    pub second_separation: Vec<(usize, usize)>,
    pub second_quasi: Vec<(usize, usize)>,
    pub second_bound: Vec<(usize, usize)>,
}

impl TwoStageVerification {
    pub fn passes(&self) -> bool {
        [
            &self.first_separation,
            &self.first_quasi,
            &self.first_bound,
            &self.second_separation,
            &self.second_quasi,
            &self.second_bound,
        ]
        .iter()
        .all(|v| v.is_empty())
    }
}

pub fn build_two_stage_bands(t: &[f64], params: &TwoStageParams) -> Result<TwoStageBands> {
    params.check_chain()?;
    if t.len() != 2 * params.d - 1 {
        return Err(Error::InvalidArgument(format!("two-stage bands need {} points, got {}", 2 * params.d - 1, t.len())));
    }
    let first_params = BandParams {
        delta: params.delta,
        delta_prime: params.delta_prime,
        alpha1: params.alpha1,
        beta1: params.beta1,
        k: params.k,
        d: params.d,
    };
    let first = build_bands(t, &first_params)?;
    let last = t.len();
    let band = first.bands()[first.band_of(last)].clone();
    let values: Vec<f64> = band.iter().map(|&i| t[i - 1]).collect();
    let second_params = BandParams {
        delta: params.rho,
        delta_prime: params.rho_prime,
        alpha1: params.gamma2,
        beta1: params.beta1,
        k: params.k,
        d: params.d,
    };
    let second = build_bands_indexed(&band, &values, &second_params)?;
    Ok(TwoStageBands { first, second, params: *params })
}

impl TwoStageBands {
    pub fn verify(&self) -> TwoStageVerification {
        let p = &self.params;
        let metric = self.first.params().metric();
        let m = |s: &BandStructure, i: usize, j: usize| metric.eval(s.value(i), s.value(j));
        let last = self.first.indices().len();
        let mut out = TwoStageVerification::default();
        let a = p.delta * p.alpha1;
        let idx = self.first.indices();
        for (n, &i) in idx.iter().enumerate() {
            for &j in &idx[n + 1..] {
                if self.first.band_of(i) != self.first.band_of(j) && !(m(&self.first, i, j) >= a) {
                    out.first_separation.push((i, j));
                }
            }
        }
        for (&i, &j) in self.first.quasi_bind() {
            let v = m(&self.first, i, j);
            if !(p.c_n * p.beta1 <= v && v < a) {
                out.first_quasi.push((i, j));
            }
        }
        for (&i, &j) in self.first.bind() {
            if !(m(&self.first, i, j) < p.delta_prime * p.alpha1) {
                out.first_bound.push((i, j));
            }
        }
        let g = p.rho * p.gamma2;
        let idx = self.second.indices();
        for (n, &i) in idx.iter().enumerate() {
            for &j in &idx[n + 1..] {
                if self.second.band_of(i) != self.second.band_of(j) && !(m(&self.second, i, j) >= g) {
                    out.second_separation.push((i, j));
                }
            }
        }
        for (&i, &j) in self.second.quasi_bind() {
            let v = m(&self.second, i, j);
            let ok = if i == last { p.c_n * p.beta2 < v && v < g } else { p.c_n * p.beta1 <= v && v < g };
            if !ok {
                out.second_quasi.push((i, j));
            }
        }
        for (&i, &j) in self.second.bind() {
            if !(m(&self.second, i, j) <= p.rho_prime * p.gamma2) {
                out.second_bound.push((i, j));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(d: usize) -> TwoStageParams {
        let eps = 1.0 / 64.0;
        let delta = 0.1;
        let delta_prime = 0.5 * eps * delta;
        let rho = 0.5 * delta_prime;
        TwoStageParams {
            delta,
            delta_prime,
            rho,
            rho_prime: 0.5 * eps * rho,
            alpha1: 1.0,
            beta1: 1e-9,
            beta2: 1e-8,
            gamma2: 1e-2,
            c_n: 0.5,
            eps,
            k: 0,
            d,
        }
    }

    #[test]
    fn two_scale_cluster() {
        // d = 3: points 1..5, cluster {3, 5} near 0.5 plus far points
        let t = [0.1, 0.3, 0.5, 0.9, 0.5 + 1e-3];
        let tb = build_two_stage_bands(&t, &params(3)).unwrap();
        assert!(tb.first.bands().contains(&vec![3, 5]));
        assert_eq!(tb.second.bands().len(), 2);
        assert!(tb.verify().passes(), "{:?}", tb.verify());
    }

    #[test]
    fn singleton_second_stage() {
        let t = [0.1, 0.3, 0.5, 0.9, 0.7];
        let tb = build_two_stage_bands(&t, &params(3)).unwrap();
        assert_eq!(tb.second.indices(), &[5]);
        assert!(tb.verify().passes());
    }

    #[test]
    fn last_index_uses_beta2() {
        // gap between c_n beta1 and c_n beta2: fine for an ordinary pair, flagged for index 2d-1
        let p = params(2);
        let gap = 2e-9;
        assert!(p.c_n * p.beta1 < gap && gap < p.c_n * p.beta2);
        let tb = build_two_stage_bands(&[0.5, 0.9, 0.5 + gap], &p).unwrap();
        assert_eq!(tb.second.quasi_bind().get(&3), Some(&1));
        assert_eq!(tb.verify().second_quasi, vec![(3, 1)]);
    }

    #[test]
    fn chain_violation_rejected() {
        let mut p = params(2);
        p.rho = p.delta_prime * 2.0;
        assert!(build_two_stage_bands(&[0.1, 0.2, 0.3], &p).is_err());
    }
}
