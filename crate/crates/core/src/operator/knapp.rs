//! Knapp-type sharpness family: anisotropic boxes around short arcs.

use crate::error::{Error, Result};

use super::averaging::AveragingOperator;
use super::functionals::rwt_ratio;
use super::gridset::{GridBox, GridSet};

/// `E_delta`: the coordinate box hull of `P([t0, t0 + delta]) - P(t0)`, each
/// axis `j` (1-based) widened symmetrically to at least `delta^j`.
/// `F_delta = E_{2 delta} + P(t0)`.
pub fn knapp_family(op: &AveragingOperator, delta: f64, t0: f64) -> Result<(GridSet, GridSet)> {
    let iv = op.interval();
    if !(delta > 0.0) || t0 < iv.lo || t0 + 2.0 * delta > iv.hi {
        return Err(Error::InvalidArgument(format!(
            "knapp scale {delta} at {t0} does not fit in [{}, {}]",
            iv.lo, iv.hi
        )));
    }
    let base = op.point(t0);
    let hull = |len: f64| -> Result<GridBox> {
        let mut lo = Vec::with_capacity(op.dim());
        let mut hi = Vec::with_capacity(op.dim());
        for i in 0..op.dim() {
            let (a, b) = op.component_range(i, t0, t0 + len);
            let (a, b) = (a - base[i], b - base[i]);
            let min_width = len.powi(i as i32 + 1);
            let pad = 0.5 * (min_width - (b - a)).max(0.0);
            lo.push(a - pad);
            hi.push(b + pad);
        }
        GridBox::new(lo, hi)
    };
    let e = GridSet::single(hull(delta)?);
    let f = GridSet::single(hull(2.0 * delta)?).translate(&base);
    Ok((e, f))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub delta: f64,
    pub ratio: f64,
    pub error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trend {
    /// Strictly increasing as `delta` decreases.
    IncreasingToZero,
    /// Strictly decreasing as `delta` decreases.
    DecreasingToZero,
    None,
}

impl Trend {
    pub fn name(self) -> &'static str {
        match self {
            Trend::IncreasingToZero => "increasing",
            Trend::DecreasingToZero => "decreasing",
            Trend::None => "none",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KnappSweep {
    pub p: f64,
    pub q: f64,
    /// Rows ordered by decreasing `delta`.
    pub rows: Vec<SweepRow>,
}

impl KnappSweep {
    pub fn max_over_min(&self) -> f64 {
        let max = self.rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
        let min = self.rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        max / min
    }

    pub fn trend(&self) -> Trend {
        let w: Vec<f64> = self.rows.iter().map(|r| r.ratio).collect();
        if w.len() < 2 {
            return Trend::None;
        }
        if w.windows(2).all(|p| p[1] > p[0]) {
            Trend::IncreasingToZero
        } else if w.windows(2).all(|p| p[1] < p[0]) {
            Trend::DecreasingToZero
        } else {
            Trend::None
        }
    }
}

/// Ratios on the Knapp family for each `delta`. Every scale reuses the same
/// sample streams, so scale-invariant configurations give exactly matching
/// relative sample positions.
pub fn knapp_sweep(
    op: &AveragingOperator,
    t0: f64,
    deltas: &[f64],
    p: f64,
    q: f64,
    samples: usize,
    seed: u64,
) -> Result<KnappSweep> {
    let mut sorted = deltas.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut rows = Vec::with_capacity(sorted.len());
    for delta in sorted {
        let (e, f) = knapp_family(op, delta, t0)?;
        let r = rwt_ratio(op, &e, &f, p, q, samples, seed)?;
        rows.push(SweepRow { delta, ratio: r.ratio, error: r.error });
    }
    Ok(KnappSweep { p, q, rows })
}

pub fn dyadic_scales(kmin: u32, kmax: u32) -> Vec<f64> {
    (kmin..=kmax).map(|k| 0.5f64.powi(k as i32)).collect()
}
