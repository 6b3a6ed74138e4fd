//! Simultaneous all-roots solver (Aberth iteration).

use num_complex::Complex;

use crate::{Error, Polynomial, Result, Scalar};

pub const MAX_ITERATIONS: usize = 200;

/// Roots of a polynomial with multiplicity, plus whether every root met the
/// residual test. Non-converged output holds the last iterates.
#[derive(Clone, Debug, PartialEq)]
pub struct Roots<T> {
    pub roots: Vec<Complex<T>>,
    pub converged: bool,
    pub iterations: usize,
}

impl<T: Scalar> Roots<T> {
    pub fn into_result(self) -> Result<Vec<Complex<T>>> {
        if self.converged {
            Ok(self.roots)
        } else {
            Err(Error::NoConvergence(format!("roots after {} iterations", self.iterations)))
        }
    }
}

/// Upper bound on root moduli: the smaller of the Cauchy bound
/// `1 + max |a_k / a_d|` and the Fujiwara bound `2 max |a_k / a_d|^(1/(d-k))`.
pub fn root_radius<T: Scalar>(coeffs: &[Complex<T>]) -> T {
    let d = coeffs.len() - 1;
    let lead = coeffs[d].norm();
    let (mut cauchy, mut fujiwara) = (T::zero(), T::zero());
    for (k, c) in coeffs[..d].iter().enumerate() {
        let ratio = c.norm() / lead;
        cauchy = cauchy.max(ratio);
        fujiwara = fujiwara.max(ratio.powf(T::one() / T::lit((d - k) as f64)));
    }
    (T::one() + cauchy).min(T::lit(2.0) * fujiwara).max(T::lit(1e-3))
}

/// All `d` roots of `p(w) = rhs`.
///
/// A root is accepted when `|p(w) - rhs| ≤ 1e-9 · max_k |a_k|`, or when the
/// residual is within a small multiple of the evaluation round-off bound.
pub fn roots<T: Scalar>(p: &Polynomial<T>, rhs: Complex<T>) -> Roots<T> {
    let q = p.minus_constant(rhs);
    let d = q.degree();
    if d == 0 {
        return Roots { roots: Vec::new(), converged: true, iterations: 0 };
    }
    if d == 1 {
        let c = q.coeffs();
        return Roots { roots: vec![-c[0] / c[1]], converged: true, iterations: 0 };
    }
    let scale = q.scale_factor();
    let coeffs = q.coeffs();
    let eval = |z: Complex<T>| q.eval_with_derivative(z);
    let roundoff = |z: Complex<T>| {
        let r = z.norm();
        let mut acc = T::zero();
        for c in coeffs.iter().rev() {
            acc = acc * r + c.norm();
        }
        acc * T::epsilon() * T::lit(8.0 * d as f64)
    };
    let accept = |z: Complex<T>, value: Complex<T>| value.norm() <= (T::lit(1e-9) * scale).max(roundoff(z));
    aberth(d, eval, root_radius(coeffs), accept, MAX_ITERATIONS)
}

/// Aberth iteration for a degree-`d` function given by `eval(z) = (p(z), p'(z))`,
/// started from a rotated circle of the given radius.
pub fn aberth<T: Scalar>(
    d: usize,
    eval: impl Fn(Complex<T>) -> (Complex<T>, Complex<T>),
    radius: T,
    accept: impl Fn(Complex<T>, Complex<T>) -> bool,
    max_iter: usize,
) -> Roots<T> {
    let zero = Complex::new(T::zero(), T::zero());
    let tau = T::lit(std::f64::consts::TAU);
    let mut z: Vec<Complex<T>> = (0..d)
        .map(|k| Complex::from_polar(radius, tau * T::lit(k as f64) / T::lit(d as f64) + T::lit(0.4)))
        .collect();
    let mut done = vec![false; d];
    let tiny = T::epsilon() * T::lit(4.0);
    let mut iterations = 0;
    while iterations < max_iter && done.iter().any(|x| !x) {
        iterations += 1;
        for k in 0..d {
            if done[k] {
                continue;
            }
            let (p, dp) = eval(z[k]);
            if p == zero {
                done[k] = true;
                continue;
            }
            let newton = p / dp;
            let repulsion = (0..d).filter(|&j| j != k).fold(zero, |acc, j| {
                let diff = z[k] - z[j];
                if diff == zero {
                    acc
                } else {
                    acc + diff.inv()
                }
            });
            let step = newton / (Complex::new(T::one(), T::zero()) - newton * repulsion);
            let step = if step.re.is_finite() && step.im.is_finite() { step } else { newton };
            if !(step.re.is_finite() && step.im.is_finite()) {
                continue;
            }
            z[k] = z[k] - step;
            if step.norm() <= tiny * z[k].norm().max(T::min_positive_value().sqrt()) {
                done[k] = true;
            }
        }
    }
    let converged = z.iter().all(|&w| {
        let (p, _) = eval(w);
        w.re.is_finite() && w.im.is_finite() && accept(w, p)
    });
    Roots { roots: z, converged, iterations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex<f64>>) -> Vec<Complex<f64>> {
        v.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        v
    }

    fn close(a: &[Complex<f64>], b: &[Complex<f64>], tol: f64) -> bool {
        sorted(a.to_vec()).iter().zip(sorted(b.to_vec()).iter()).all(|(x, y)| (x - y).norm() <= tol)
    }

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn quadratics() {
        let p = Polynomial::<f64>::from_real(&[-1.0, 0.0, 1.0]);
        let r = roots(&p, c(0.0, 0.0)).into_result().unwrap();
        assert!(close(&r, &[c(-1.0, 0.0), c(1.0, 0.0)], 1e-12));
        let sq = Polynomial::<f64>::from_real(&[0.0, 0.0, 1.0]);
        let r = roots(&sq, c(4.0, 0.0)).into_result().unwrap();
        assert!(close(&r, &[c(-2.0, 0.0), c(2.0, 0.0)], 1e-12));
    }

    #[test]
    fn quartic_with_double_root() {
        // (w^2 - 1)^2 - 1 = w^2 (w^2 - 2)
        let p = Polynomial::<f64>::from_real(&[0.0, 0.0, -2.0, 0.0, 1.0]);
        let r = roots(&p, c(0.0, 0.0));
        assert!(r.converged);
        let s2 = 2f64.sqrt();
        assert!(close(&r.roots, &[c(-s2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s2, 0.0)], 1e-6));
        for w in &r.roots {
            assert!(p.eval(*w).finite().unwrap().norm() <= 1e-9 * 2.0);
        }
    }

    #[test]
    fn monic_product_reconstructs_polynomial() {
        let p = Polynomial::<f64>::new(vec![
            c(0.3, -1.0),
            c(2.0, 0.5),
            c(-1.5, 0.0),
            c(0.0, 0.7),
            c(1.0, 1.0),
            c(-0.2, 0.1),
            c(0.9, 0.0),
            c(0.4, -0.3),
            c(1.0, 0.0),
        ]);
        let r = roots(&p, c(0.0, 0.0)).into_result().unwrap();
        let mut prod = Polynomial::<f64>::from_real(&[1.0]);
        for w in &r {
            prod = prod.mul(&Polynomial::affine(c(1.0, 0.0), -w));
        }
        assert!(prod.approx_eq(&p, 1e-6 * p.scale_factor()));
    }

    #[test]
    fn single_precision() {
        let p = Polynomial::<f32>::from_real(&[0.0, 0.0, -2.0, 0.0, 1.0]);
        let r = roots(&p, Complex::new(1.0, 0.5));
        assert!(r.converged);
        for w in r.roots {
            let v = p.eval(w).finite().unwrap();
            assert!((v - Complex::new(1.0, 0.5)).norm() < 1e-4);
        }
    }

    #[test]
    fn radius_bounds_all_roots() {
        let p = Polynomial::<f64>::from_real(&[-30.0, 2.0, 0.0, 7.0, 0.5]);
        let r = roots(&p, c(0.0, 0.0)).into_result().unwrap();
        let radius = root_radius(p.coeffs());
        assert!(r.iter().all(|w| w.norm() <= radius));
    }
}
