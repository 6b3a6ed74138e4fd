use num_complex::Complex;

use crate::model::SpherePoint;
use crate::{Error, Result, Scalar};

/// Complex polynomial with coefficients in ascending powers.
///
/// Constructed through [`Polynomial::new`], which trims trailing zeros; maps
/// used inside a [`System`](crate::System) are additionally checked to have
/// degree at least two.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<T> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn new(mut coeffs: Vec<Complex<T>>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.norm() == T::zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex::new(T::zero(), T::zero()));
        }
        Polynomial { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex::new(T::lit(c), T::zero())).collect())
    }

    /// `z` as a polynomial.
    pub fn identity() -> Self {
        Self::from_real(&[0.0, 1.0])
    }

    /// `a z + b`.
    pub fn affine(a: Complex<T>, b: Complex<T>) -> Self {
        Self::new(vec![b, a])
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> Complex<T> {
        *self.coeffs.last().expect("non-empty")
    }

    /// Rejects degree below two.
    pub fn require_degree_two(&self) -> Result<()> {
        if self.degree() < 2 {
            return Err(Error::Degree { degree: self.degree() });
        }
        Ok(())
    }

    /// Horner evaluation that snaps to infinity once an intermediate modulus
    /// passes [`Scalar::overflow_limit`].
    pub fn eval(&self, z: Complex<T>) -> SpherePoint<T> {
        let limit = T::overflow_limit();
        if !(z.norm() <= limit) {
            return SpherePoint::Infinity;
        }
        let mut acc = self.leading();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc * z + c;
            if !(acc.norm() <= limit) {
                return SpherePoint::Infinity;
            }
        }
        SpherePoint::Finite(acc)
    }

    pub fn eval_sphere(&self, z: SpherePoint<T>) -> SpherePoint<T> {
        match z {
            SpherePoint::Finite(z) => self.eval(z),
            SpherePoint::Infinity => SpherePoint::Infinity,
        }
    }

    /// Plain complex evaluation of `(p(z), p'(z))` without overflow snapping.
    pub fn eval_with_derivative(&self, z: Complex<T>) -> (Complex<T>, Complex<T>) {
        let mut p = self.leading();
        let mut dp = Complex::new(T::zero(), T::zero());
        for c in self.coeffs.iter().rev().skip(1) {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        if self.degree() == 0 {
            return Self::from_real(&[0.0]);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * T::lit(k as f64))
            .collect();
        Self::new(coeffs)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = Complex::new(T::zero(), T::zero());
        let coeffs = (0..n)
            .map(|k| {
                self.coeffs.get(k).copied().unwrap_or(zero) + other.coeffs.get(k).copied().unwrap_or(zero)
            })
            .collect();
        Self::new(coeffs)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut coeffs = vec![Complex::new(T::zero(), T::zero()); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j] + a * b;
            }
        }
        Self::new(coeffs)
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// `self ∘ inner`, i.e. `z ↦ self(inner(z))`.
    pub fn compose(&self, inner: &Self) -> Self {
        let mut acc = Self::new(vec![self.leading()]);
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc.mul(inner).add(&Self::new(vec![*c]));
        }
        acc
    }

    /// Polynomial `self(z) - rhs`.
    pub fn minus_constant(&self, rhs: Complex<T>) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] = coeffs[0] - rhs;
        Self::new(coeffs)
    }

    /// Coefficient-wise equality within `tol`, same degree required.
    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.degree() == other.degree()
            && self.coeffs.iter().zip(&other.coeffs).all(|(a, b)| (a - b).norm() <= tol)
    }

    /// Largest coefficient modulus.
    pub fn scale_factor(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.norm()))
    }

    /// Radius `R ≥ 1` with `|p(z)| ≥ 2|z|` whenever `|z| ≥ R`:
    /// `max(1, (2 + Σ_{k<d} |a_k|) / |a_d|)`.
    pub fn doubling_radius(&self) -> T {
        let lower: T = self.coeffs[..self.degree()].iter().fold(T::zero(), |s, c| s + c.norm());
        T::one().max((T::lit(2.0) + lower) / self.leading().norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn trailing_zeros_are_trimmed() {
        let p = Polynomial::<f64>::from_real(&[1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), 1);
    }

    #[test]
    fn degree_below_two_is_rejected() {
        assert!(Polynomial::<f64>::from_real(&[1.0, 2.0]).require_degree_two().is_err());
        assert!(Polynomial::<f64>::from_real(&[0.0, 0.0, 1.0]).require_degree_two().is_ok());
    }

    #[test]
    fn infinity_is_fixed() {
        let p = Polynomial::<f64>::from_real(&[-1.0, 0.0, 1.0]);
        assert!(p.eval_sphere(SpherePoint::Infinity).is_infinite());
    }

    #[test]
    fn overflow_snaps_to_infinity() {
        let p = Polynomial::<f64>::from_real(&[0.0, 0.0, 1.0]);
        assert!(p.eval(c(1e80, 0.0)).is_infinite());
        assert!(!p.eval(c(1e70, 0.0)).is_infinite());
    }

    #[test]
    fn nested_square_composition_expands() {
        // (z^2 - 1)^2 - 1 = z^4 - 2 z^2
        let g = Polynomial::<f64>::from_real(&[-1.0, 0.0, 1.0]);
        let f = g.compose(&g);
        assert_eq!(f, Polynomial::from_real(&[0.0, 0.0, -2.0, 0.0, 1.0]));
        // (z^2/4)^2/4 = z^4/64
        let g = Polynomial::<f64>::from_real(&[0.0, 0.0, 0.25]);
        assert_eq!(g.compose(&g), Polynomial::from_real(&[0.0, 0.0, 0.0, 0.0, 1.0 / 64.0]));
    }

    #[test]
    fn doubling_radius_matches_hand_values() {
        assert_eq!(Polynomial::<f64>::from_real(&[0.0, 0.0, 1.0]).doubling_radius(), 2.0);
        assert_eq!(Polynomial::<f64>::from_real(&[-1.0, 0.0, 1.0]).doubling_radius(), 3.0);
        assert_eq!(Polynomial::<f32>::from_real(&[-1.0, 0.0, 1.0]).doubling_radius(), 3.0);
    }

    #[test]
    fn derivative_of_quartic() {
        let p = Polynomial::<f64>::from_real(&[0.0, 0.0, -2.0, 0.0, 1.0]);
        assert_eq!(p.derivative(), Polynomial::from_real(&[0.0, -4.0, 0.0, 4.0]));
        let (v, d) = p.eval_with_derivative(c(2.0, 0.0));
        assert_eq!(v, c(8.0, 0.0));
        assert_eq!(d, c(24.0, 0.0));
    }

    fn coeff() -> impl Strategy<Value = Complex<f64>> {
        (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| Complex::new(a, b))
    }

    fn poly(min_deg: usize, max_deg: usize) -> impl Strategy<Value = Polynomial<f64>> {
        (prop::collection::vec(coeff(), min_deg..=max_deg), coeff()).prop_map(|(mut cs, lead)| {
            let lead = if lead.norm() < 0.1 { Complex::new(1.0, 0.0) } else { lead };
            cs.push(lead);
            Polynomial::new(cs)
        })
    }

    proptest! {
        #[test]
        fn composition_agrees_with_nested_evaluation(f in poly(1, 3), g in poly(1, 3), z in coeff()) {
            let h = f.compose(&g);
            prop_assert_eq!(h.degree(), f.degree() * g.degree());
            let inner = g.eval(z).finite().unwrap();
            let expect = f.eval(inner).finite().unwrap();
            let got = h.eval(z).finite().unwrap();
            prop_assert!((got - expect).norm() <= 1e-9 * (1.0 + expect.norm()));
        }

        #[test]
        fn doubling_radius_certifies_doubling(f in poly(2, 4), theta in 0.0f64..std::f64::consts::TAU) {
            let r = f.doubling_radius();
            let z = Complex::from_polar(r, theta);
            let w = f.eval(z).modulus();
            prop_assert!(w >= 2.0 * r * (1.0 - 1e-12));
        }
    }
}
