use num_complex::Complex64;

use super::Interval;

#[derive(Clone, Debug, PartialEq)]
pub enum PieceKind {
    /// `eps[k] = 0` where `|s - b - beta_k| ~ |beta_k|`, `1` where it is `~ |s - b|`.
    Gap { eps: Vec<u8> },
    /// `|s - b|` stays within `[level, 2 level]`.
    Dyadic { level: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapDyadicPiece {
    pub interval: Interval,
    pub kind: PieceKind,
}

impl GapDyadicPiece {
    pub fn is_gap(&self) -> bool {
        matches!(self.kind, PieceKind::Gap { .. })
    }
}

/// Splits `j` around the center `b` into gaps and dyadic pieces with respect
/// to the offsets `betas` (roots measured from `b`).
///
/// In the variable `u = |s - b|` the shells `[|beta_k| / 2, 2 |beta_k|]` are
/// merged and cut into pieces `[D, 2D]`; their complements are gaps, where
/// `|s - b - beta_k| >= |s - b| / 2` for every `k`. The input order of
/// `betas` is irrelevant; `eps` follows it.
pub fn d2_decompose(j: Interval, b: f64, betas: &[Complex64]) -> Vec<GapDyadicPiece> {
    if j.is_empty() {
        return Vec::new();
    }
    let radii: Vec<f64> = betas.iter().map(|z| z.norm()).collect();
    let mut shells: Vec<(f64, f64)> = radii.iter().filter(|&&r| r > 0.0).map(|&r| (0.5 * r, 2.0 * r)).collect();
    shells.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in shells {
        match merged.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    let mut u_cuts = Vec::new();
    for &(lo, hi) in &merged {
        let mut x = lo;
        while x < hi {
            u_cuts.push(x);
            x *= 2.0;
        }
        u_cuts.push(hi);
    }
    let mut s_cuts = vec![b];
    for &u in &u_cuts {
        s_cuts.push(b + u);
        s_cuts.push(b - u);
    }
    j.split_at(&s_cuts)
        .into_iter()
        .map(|piece| {
            let u_rep = if piece.is_bounded() { (piece.representative() - b).abs() } else { f64::INFINITY };
            let u_near = if piece.lo >= b { piece.lo - b } else { b - piece.hi };
            let shell = merged.iter().find(|&&(lo, hi)| lo <= u_rep && u_rep <= hi);
            let kind = match shell {
                Some(_) => PieceKind::Dyadic { level: u_near },
                None => PieceKind::Gap {
                    eps: radii.iter().map(|&r| if u_rep <= 0.5 * r { 0 } else { 1 }).collect(),
                },
            };
            GapDyadicPiece { interval: piece, kind }
        })
        .collect()
}
