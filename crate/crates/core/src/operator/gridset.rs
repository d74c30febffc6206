//! Finite unions of disjoint axis-aligned boxes.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct GridBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl GridBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidArgument("box corners must have equal positive length".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
            return Err(Error::InvalidArgument(format!("degenerate box {lo:?} .. {hi:?}")));
        }
        Ok(GridBox { lo, hi })
    }

    /// Cube of side `2 * radius` around `center`.
    pub fn cube(center: &[f64], radius: f64) -> Result<Self> {
        GridBox::new(center.iter().map(|c| c - radius).collect(), center.iter().map(|c| c + radius).collect())
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    /// Closed-box membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    /// Interiors intersect.
    pub fn overlaps(&self, other: &GridBox) -> bool {
        (0..self.dim()).all(|i| self.lo[i] < other.hi[i] && other.lo[i] < self.hi[i])
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| a + (b - a) * rng.random::<f64>()).collect()
    }

    /// Image under `x -> diag(scale) x + shift`.
    pub fn map_diagonal(&self, scale: &[f64], shift: &[f64]) -> Result<Self> {
        let mut lo = Vec::with_capacity(self.dim());
        let mut hi = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let a = scale[i] * self.lo[i] + shift[i];
            let b = scale[i] * self.hi[i] + shift[i];
            lo.push(a.min(b));
            hi.push(a.max(b));
        }
        GridBox::new(lo, hi)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSet {
    boxes: Vec<GridBox>,
    measure: f64,
}

impl GridSet {
    pub fn new(boxes: Vec<GridBox>) -> Result<Self> {
        let Some(first) = boxes.first() else {
            return Err(Error::InvalidArgument("a grid set needs at least one box".into()));
        };
        let d = first.dim();
        if boxes.iter().any(|b| b.dim() != d) {
            return Err(Error::InvalidArgument("boxes of mixed dimension".into()));
        }
        for i in 0..boxes.len() {
            for j in i + 1..boxes.len() {
                if boxes[i].overlaps(&boxes[j]) {
                    return Err(Error::InvalidArgument(format!("boxes {i} and {j} overlap")));
                }
            }
        }
        let measure = boxes.iter().map(GridBox::volume).sum();
        Ok(GridSet { boxes, measure })
    }

    pub fn single(b: GridBox) -> Self {
        let measure = b.volume();
        GridSet { boxes: vec![b], measure }
    }

    /// Voxelized ball: the cells of a `cells^d` grid over the bounding cube
    /// whose centers lie within `radius` of `center`.
    pub fn ball(center: &[f64], radius: f64, cells: usize) -> Result<Self> {
        if !(radius > 0.0) || cells == 0 {
            return Err(Error::InvalidArgument("ball needs positive radius and cell count".into()));
        }
        let d = center.len();
        let h = 2.0 * radius / cells as f64;
        let mut boxes = Vec::new();
        let mut idx = vec![0usize; d];
        loop {
            let lo: Vec<f64> = (0..d).map(|i| center[i] - radius + h * idx[i] as f64).collect();
            let r2: f64 = (0..d).map(|i| (lo[i] + 0.5 * h - center[i]).powi(2)).sum();
            if r2 <= radius * radius {
                let hi = lo.iter().map(|a| a + h).collect();
                boxes.push(GridBox { lo, hi });
            }
            let mut i = 0;
            loop {
                if i == d {
                    let measure = boxes.len() as f64 * h.powi(d as i32);
                    if boxes.is_empty() {
                        return Err(Error::InvalidArgument("ball resolution too coarse".into()));
                    }
                    return Ok(GridSet { boxes, measure });
                }
                idx[i] += 1;
                if idx[i] < cells {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
        }
    }

    pub fn boxes(&self) -> &[GridBox] {
        &self.boxes
    }

    pub fn dim(&self) -> usize {
        self.boxes[0].dim()
    }

    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.boxes.iter().any(|b| b.contains(x))
    }

    pub fn translate(&self, v: &[f64]) -> Self {
        let boxes = self
            .boxes
            .iter()
            .map(|b| GridBox {
                lo: b.lo.iter().zip(v).map(|(a, s)| a + s).collect(),
                hi: b.hi.iter().zip(v).map(|(a, s)| a + s).collect(),
            })
            .collect();
        GridSet { boxes, measure: self.measure }
    }

    pub fn map_diagonal(&self, scale: &[f64], shift: &[f64]) -> Result<Self> {
        let boxes = self.boxes.iter().map(|b| b.map_diagonal(scale, shift)).collect::<Result<Vec<_>>>()?;
        GridSet::new(boxes)
    }

    pub fn bounding_box(&self) -> GridBox {
        let d = self.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for b in &self.boxes {
            for i in 0..d {
                lo[i] = lo[i].min(b.lo[i]);
                hi[i] = hi[i].max(b.hi[i]);
            }
        }
        GridBox { lo, hi }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlapping_boxes_rejected() {
        let a = GridBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let b = GridBox::new(vec![0.5, 0.5], vec![2.0, 2.0]).unwrap();
        let c = GridBox::new(vec![1.0, 0.0], vec![2.0, 1.0]).unwrap();
        assert!(GridSet::new(vec![a.clone(), b]).is_err());
        let s = GridSet::new(vec![a, c]).unwrap();
        assert_eq!(s.measure(), 2.0);
    }

    #[test]
    fn ball_volume_converges() {
        let s = GridSet::ball(&[0.0, 0.0], 1.0, 64).unwrap();
        assert!((s.measure() - std::f64::consts::PI).abs() < 0.05);
        assert!(s.contains(&[0.1, -0.2]));
        assert!(!s.contains(&[0.9, 0.9]));
    }

    #[test]
    fn diagonal_map_scales_measure() {
        let s = GridSet::single(GridBox::new(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap());
        let t = s.map_diagonal(&[-2.0, 0.5], &[1.0, 1.0]).unwrap();
        assert!((t.measure() - 2.0).abs() < 1e-15);
        assert!(t.contains(&[0.0, 1.5]));
    }
}
