/// Double-precision polynomial used by the sampling campaigns.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct FloatPoly {
    coeffs: Vec<f64>,
}

impl FloatPoly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == 0.0) {
            coeffs.pop();
        }
        FloatPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Value and first derivative in one Horner pass.
    #[inline]
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        for &c in self.coeffs.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        FloatPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_and_derivative() {
        let p = FloatPoly::new(vec![1.0, -3.0, 0.0, 2.0, 0.0]);
        assert_eq!(p.degree(), 3);
        assert_eq!(p.eval(2.0), 1.0 - 6.0 + 16.0);
        let (v, dv) = p.eval_with_derivative(2.0);
        assert_eq!(v, 11.0);
        assert_eq!(dv, p.derivative().eval(2.0));
        assert_eq!(dv, -3.0 + 24.0);
    }
}
