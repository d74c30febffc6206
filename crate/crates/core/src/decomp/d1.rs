use num_complex::Complex64;

use super::Interval;

/// Comparability of one root factor on a piece:
/// `|s - root| ~ a |s - b|^delta`, within a factor 2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootFactor {
    pub root: Complex64,
    pub delta: u8,
    pub a: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct D1Piece {
    pub interval: Interval,
    /// `None` when there were no roots to center on.
    pub center: Option<f64>,
    pub factors: Vec<RootFactor>,
}

/// Nearest-root decomposition of `j` with respect to `etas`.
///
/// Centers are the distinct real parts of the roots. Each Voronoi cell of a
/// center `b` is cut at `b` and at `b +- |eta_k - b|` for every root, giving
/// pieces on which `|s - b| <= |s - eta_k|` and
/// `|eta_k - b| / 2 <= |s - eta_k| <= 2 |eta_k - b|` where `|s - b| <= |eta_k - b|`,
/// `|s - b| <= |s - eta_k| <= 2 |s - b|` where `|s - b| >= |eta_k - b|`.
pub fn d1_decompose(j: Interval, etas: &[Complex64]) -> Vec<D1Piece> {
    if j.is_empty() {
        return Vec::new();
    }
    if etas.is_empty() {
        return vec![D1Piece { interval: j, center: None, factors: Vec::new() }];
    }
    let mut centers: Vec<f64> = etas.iter().map(|z| z.re).collect();
    centers.sort_by(f64::total_cmp);
    centers.dedup();
    let mut out = Vec::new();
    for (i, &b) in centers.iter().enumerate() {
        let lo = if i == 0 { f64::NEG_INFINITY } else { 0.5 * (centers[i - 1] + b) };
        let hi = if i + 1 == centers.len() { f64::INFINITY } else { 0.5 * (b + centers[i + 1]) };
        let cell = Interval::new(lo, hi).intersect(&j);
        if cell.is_empty() {
            continue;
        }
        let mut cuts = vec![b];
        for eta in etas {
            let w = (eta - b).norm();
            if w > 0.0 {
                cuts.push(b - w);
                cuts.push(b + w);
            }
        }
        for piece in cell.split_at(&cuts) {
            let u = if piece.is_bounded() { (piece.representative() - b).abs() } else { f64::INFINITY };
            let factors = etas
                .iter()
                .map(|&eta| {
                    let w = (eta - b).norm();
                    if u >= w {
                        RootFactor { root: eta, delta: 1, a: 1.0 }
                    } else {
                        RootFactor { root: eta, delta: 0, a: w }
                    }
                })
                .collect();
            out.push(D1Piece { interval: piece, center: Some(b), factors });
        }
    }
    out
}
