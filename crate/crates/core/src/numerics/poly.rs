use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Dense univariate polynomial with complex coefficients, constant term first.
///
/// Trailing exact zeros are trimmed on construction; the zero polynomial is
/// the single coefficient `[0]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComplexPoly {
    #[serde(with = "crate::serde_ext::complex_vec")]
    coeffs: Vec<C64>,
}

impl ComplexPoly {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == C64::new(0.0, 0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(C64::new(0.0, 0.0));
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self::new(vec![])
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![c])
    }

    /// The polynomial `z`.
    pub fn identity() -> Self {
        Self::new(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)])
    }

    /// `c * z^k`.
    pub fn monomial(c: C64, k: usize) -> Self {
        let mut v = vec![C64::new(0.0, 0.0); k + 1];
        v[k] = c;
        Self::new(v)
    }

    /// Monic polynomial with the given roots (and multiplicities).
    pub fn from_roots(roots: &[(C64, usize)]) -> Self {
        let mut p = Self::constant(C64::new(1.0, 0.0));
        for &(r, m) in roots {
            let lin = Self::new(vec![-r, C64::new(1.0, 0.0)]);
            for _ in 0..m {
                p = &p * &lin;
            }
        }
        p
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == C64::new(0.0, 0.0)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() == 1
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Horner evaluation.
    #[inline]
    pub fn eval(&self, z: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Power-sum evaluation, kept as an independent check on [`Self::eval`].
    pub fn eval_naive(&self, z: C64) -> C64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| c * z.powu(k as u32))
            .sum()
    }

    /// Value and first derivative in one Horner pass.
    #[inline]
    pub fn eval_with_derivative(&self, z: C64) -> (C64, C64) {
        let mut p = C64::new(0.0, 0.0);
        let mut dp = C64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `sum |c_k| |z|^k`, the natural scale for residuals at `z`.
    pub fn eval_scale(&self, z: C64) -> f64 {
        let r = z.norm();
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * r + c.norm();
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Coefficients of `w -> p(z0 + w)` (Taylor coefficients at `z0`).
    pub fn taylor_shift(&self, z0: C64) -> Vec<C64> {
        let mut b = self.coeffs.clone();
        let n = b.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                let t = b[j + 1] * z0;
                b[j] += t;
            }
        }
        b
    }

    /// Order of vanishing of `p - p(z0)` at `z0`, or `None` when `p` is
    /// constant. A Taylor coefficient counts as zero when it is below
    /// `rel_tol` times the largest one.
    pub fn order_at(&self, z0: C64, rel_tol: f64) -> Option<usize> {
        let b = self.taylor_shift(z0);
        let scale = b.iter().map(|c| c.norm()).fold(0.0, f64::max);
        (1..b.len()).find(|&j| b[j].norm() > rel_tol * scale)
    }

    /// Order of vanishing of `p` itself at `z0` (0 when `p(z0) != 0`).
    pub fn zero_order_at(&self, z0: C64, rel_tol: f64) -> Option<usize> {
        let b = self.taylor_shift(z0);
        let scale = b.iter().map(|c| c.norm()).fold(0.0, f64::max);
        (0..b.len()).find(|&j| b[j].norm() > rel_tol * scale)
    }

    /// Composition `self(inner(z))`.
    pub fn compose(&self, inner: &ComplexPoly) -> Self {
        let mut acc = Self::zero();
        for &c in self.coeffs.iter().rev() {
            acc = &(&acc * inner) + &Self::constant(c);
        }
        acc
    }

    /// `p(s * z)`.
    pub fn rescale_arg(&self, s: C64) -> Self {
        let mut f = C64::new(1.0, 0.0);
        let mut out = Vec::with_capacity(self.coeffs.len());
        for &c in &self.coeffs {
            out.push(c * f);
            f *= s;
        }
        Self::new(out)
    }

    /// Drops leading coefficients below `rel_tol` times the largest one.
    pub fn trimmed(&self, rel_tol: f64) -> Self {
        let scale = self.max_abs_coeff();
        let mut v = self.coeffs.clone();
        while v.len() > 1 && v.last().unwrap().norm() <= rel_tol * scale {
            v.pop();
        }
        Self::new(v)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(C64::new(1.0, 0.0));
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }
}

impl Add for &ComplexPoly {
    type Output = ComplexPoly;
    fn add(self, rhs: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPoly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &ComplexPoly {
    type Output = ComplexPoly;
    fn sub(self, rhs: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPoly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &ComplexPoly {
    type Output = ComplexPoly;
    fn mul(self, rhs: &ComplexPoly) -> ComplexPoly {
        if self.is_zero() || rhs.is_zero() {
            return ComplexPoly::zero();
        }
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ComplexPoly::new(out)
    }
}

impl Neg for &ComplexPoly {
    type Output = ComplexPoly;
    fn neg(self) -> ComplexPoly {
        ComplexPoly::new(self.coeffs.iter().map(|&c| -c).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn zero_polynomial_is_single_coefficient() {
        let p = ComplexPoly::new(vec![c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(p.coeffs().len(), 1);
        assert!(p.is_zero());
        assert_eq!(p.degree(), 0);
    }

    #[test]
    fn taylor_shift_of_square() {
        // (z - 0.5)^2 at 0.5 is w^2
        let p = ComplexPoly::from_roots(&[(c(0.5, 0.0), 2)]);
        let b = p.taylor_shift(c(0.5, 0.0));
        assert_abs_diff_eq!(b[0].norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b[1].norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b[2].re, 1.0, epsilon = 1e-15);
        assert_eq!(p.zero_order_at(c(0.5, 0.0), 1e-12), Some(2));
    }

    #[test]
    fn compose_matches_pointwise() {
        let outer = ComplexPoly::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let inner = ComplexPoly::new(vec![c(1.0, 0.0), c(0.0, 2.0)]);
        let comp = outer.compose(&inner);
        let z = c(0.3, -0.2);
        assert_abs_diff_eq!((comp.eval(z) - outer.eval(inner.eval(z))).norm(), 0.0, epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn horner_matches_power_sum(
            coeffs in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..14),
            zr in -1.2f64..1.2, zi in -1.2f64..1.2,
        ) {
            let p = ComplexPoly::new(coeffs.iter().map(|&(a, b)| c(a, b)).collect());
            let z = c(zr, zi);
            let d = (p.eval(z) - p.eval_naive(z)).norm();
            prop_assert!(d <= 1e-12 * (1.0 + p.eval_scale(z)));
        }

        #[test]
        fn derivative_matches_finite_difference(
            coeffs in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 2..10),
            zr in -1.0f64..1.0, zi in -1.0f64..1.0,
        ) {
            let p = ComplexPoly::new(coeffs.iter().map(|&(a, b)| c(a, b)).collect());
            let z = c(zr, zi);
            let h = 1e-6;
            let fd = (p.eval(z + h) - p.eval(z - h)) / (2.0 * h);
            let (_, dp) = p.eval_with_derivative(z);
            prop_assert!((fd - dp).norm() <= 1e-6 * (1.0 + dp.norm()));
            prop_assert!((p.derivative().eval(z) - dp).norm() <= 1e-12 * (1.0 + dp.norm()));
        }
    }
}
