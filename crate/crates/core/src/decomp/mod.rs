//! Interval decomposition of the real line adapted to a polynomial curve.
//!
//! [`d1_decompose`] partitions by nearest root with power comparability,
//! [`d2_decompose`] splits around a center into gaps and dyadic shells, and
//! [`dw_decompose`] iterates them over the minor ladder `L_1, ..., L_d`.
//! The `verify_*` functions measure the resulting comparability constants.

mod d1;
mod d2;
mod normalize;
mod pipeline;
mod verify;

use std::fmt;

pub use d1::{d1_decompose, D1Piece, RootFactor};
pub use d2::{d2_decompose, GapDyadicPiece, PieceKind};
pub use normalize::{normalize_piece, NormalizedPiece};
pub use pipeline::{dw_decompose, piece_bound, DecompOptions, Decomposition};
pub use verify::{
    comparability_grid, fit_power_law, preimage_collision_probe, sample_offsets, OffsetRange, verify_geometric_inequality,
    verify_torsion_comparability, CollisionReport, GeometricReport, ShiftedTorsion, TRUNCATION,
};

/// Open interval `(lo, hi)`; endpoints may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };

    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi)
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, s: f64) -> bool {
        self.lo < s && s < self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.max(other.lo), hi: self.hi.min(other.hi) }
    }

    /// A finite interior point.
    pub fn representative(&self) -> f64 {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => 0.5 * (self.lo + self.hi),
            (true, false) => self.lo + self.lo.abs().max(1.0),
            (false, true) => self.hi - self.hi.abs().max(1.0),
            (false, false) => 0.0,
        }
    }

    /// Splits at the given points (those strictly inside), dropping
    /// pieces that collapse in floating point.
    pub fn split_at(&self, points: &[f64]) -> Vec<Interval> {
        let mut cuts: Vec<f64> = points.iter().copied().filter(|&p| self.contains(p)).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut out = Vec::with_capacity(cuts.len() + 1);
        let mut lo = self.lo;
        for c in cuts {
            out.push(Interval::new(lo, c));
            lo = c;
        }
        out.push(Interval::new(lo, self.hi));
        out.retain(|i| !i.is_empty());
        out
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", fmt_endpoint(self.lo), fmt_endpoint(self.hi))
    }
}

fn fmt_endpoint(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:e}")
    }
}

/// How a lineage step produced its piece.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepCase {
    /// Split at real roots of every minor.
    Initial,
    /// Nearest-root partition with respect to the torsion roots.
    Nearest,
    /// Gap piece of a center split; the center is kept.
    Gap,
    /// Dyadic piece of a center split, re-centered by a nearest-root partition.
    Dyadic,
    /// No center was available, so the step re-partitions by nearest root.
    Uncentered,
    /// Split at ancestor centers.
    Final,
}

impl StepCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            StepCase::Initial => "initial",
            StepCase::Nearest => "nearest",
            StepCase::Gap => "gap",
            StepCase::Dyadic => "dyadic",
            StepCase::Uncentered => "uncentered",
            StepCase::Final => "final",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineageStep {
    pub step: usize,
    pub case: StepCase,
    pub center: Option<f64>,
}

/// A leaf of the decomposition with its fitted power law
/// `|L_P(s)| ~ a |s - b|^k` and measured constants `c_lo <= ratio <= c_hi`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompInterval {
    pub interval: Interval,
    pub b: Option<f64>,
    pub k: usize,
    pub a: f64,
    pub c_lo: f64,
    pub c_hi: f64,
    pub lineage: Vec<LineageStep>,
}

impl DecompInterval {
    pub fn spread(&self) -> f64 {
        self.c_hi / self.c_lo
    }

    /// Center used for sampling: `b`, or the nearest finite endpoint when
    /// the leaf has no center (constant torsion).
    pub fn sampling_center(&self) -> f64 {
        match self.b {
            Some(b) => b,
            None if self.interval.lo.is_finite() => self.interval.lo,
            None if self.interval.hi.is_finite() => self.interval.hi,
            None => 0.0,
        }
    }
}
