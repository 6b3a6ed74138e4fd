use num_complex::Complex;

use crate::Scalar;

/// A point of the Riemann sphere: a finite complex number or infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpherePoint<T> {
    Finite(Complex<T>),
    Infinity,
}

impl<T: Scalar> SpherePoint<T> {
    pub fn new(re: T, im: T) -> Self {
        SpherePoint::Finite(Complex::new(re, im))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    pub fn finite(&self) -> Option<Complex<T>> {
        match *self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }

    /// Euclidean modulus, `+inf` at infinity.
    pub fn modulus(&self) -> T {
        match self {
            SpherePoint::Finite(z) => z.norm(),
            SpherePoint::Infinity => T::infinity(),
        }
    }

    /// Chordal distance `2|z-w| / sqrt((1+|z|^2)(1+|w|^2))`, valued in `[0, 2]`.
    pub fn chordal(&self, other: &Self) -> T {
        let two = T::lit(2.0);
        match (self, other) {
            (SpherePoint::Infinity, SpherePoint::Infinity) => T::zero(),
            (SpherePoint::Finite(z), SpherePoint::Infinity)
            | (SpherePoint::Infinity, SpherePoint::Finite(z)) => two / T::one().hypot(z.norm()),
            (SpherePoint::Finite(z), SpherePoint::Finite(w)) => {
                let d = two * (z - w).norm() / (T::one().hypot(z.norm()) * T::one().hypot(w.norm()));
                d.min(two)
            }
        }
    }
}

impl<T> From<Complex<T>> for SpherePoint<T> {
    fn from(z: Complex<T>) -> Self {
        SpherePoint::Finite(z)
    }
}

/// Distance on sphere x vertices: vertices are disjoint copies of the sphere
/// placed at distance 4 from each other.
pub fn product_distance<T: Scalar>(a: (&SpherePoint<T>, usize), b: (&SpherePoint<T>, usize)) -> T {
    if a.1 != b.1 {
        T::lit(4.0)
    } else {
        a.0.chordal(b.0)
    }
}
