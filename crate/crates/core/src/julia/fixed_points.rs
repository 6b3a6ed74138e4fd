//! Repelling fixed points of compositions along loop words.

use num_complex::Complex;
use rand::seq::SliceRandom;

use crate::julia::roots::{aberth, root_radius, MAX_ITERATIONS};
use crate::model::{Choice, System};
use crate::rng;
use crate::sampler::Step;
use crate::{Polynomial, Result, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct RepellingPoint<T> {
    pub location: Complex<T>,
    /// `|h'(location)|`.
    pub multiplier_modulus: T,
    /// Maps applied first to last.
    pub word: Vec<Step>,
}

/// Every loop word at `vertex` of length `1..=max_len`, in lexicographic
/// order of choice indices.
pub fn loop_words<T: Scalar>(s: &System<T>, vertex: usize, max_len: usize) -> Vec<Vec<Choice<T>>> {
    let mut out = Vec::new();
    let mut stack: Vec<Vec<Choice<T>>> = vec![Vec::new()];
    while let Some(word) = stack.pop() {
        let at = word.last().map_or(vertex, |c| c.to);
        if !word.is_empty() && at == vertex {
            out.push(word.clone());
        }
        if word.len() < max_len {
            for c in s.outgoing(at).iter().rev() {
                let mut w = word.clone();
                w.push(*c);
                stack.push(w);
            }
        }
    }
    out
}

/// `(h(z), h'(z))` for the composition along `word`, chain rule included.
fn eval_word<T: Scalar>(s: &System<T>, word: &[Choice<T>], z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let mut w = z;
    let mut dw = Complex::new(T::one(), T::zero());
    for c in word {
        let (v, dv) = s.map(c).eval_with_derivative(w);
        w = v;
        dw = dw * dv;
    }
    (w, dw)
}

/// Fixed points `h(z) = z` of the composition along one word, each with its
/// multiplier modulus, and whether the solver converged.
pub fn word_fixed_points<T: Scalar>(s: &System<T>, word: &[Choice<T>]) -> (Vec<(Complex<T>, T)>, bool) {
    let h = word.iter().fold(Polynomial::identity(), |acc, c| s.map(c).compose(&acc));
    let q = h.add(&Polynomial::from_real(&[0.0, -1.0]));
    let d = q.degree();
    let one = Complex::new(T::one(), T::zero());
    let tol = |z: Complex<T>| T::lit(1e-8) * (T::one() + z.norm());
    let result = aberth(
        d,
        |z| {
            let (v, dv) = eval_word(s, word, z);
            (v - z, dv - one)
        },
        root_radius(q.coeffs()),
        |z, value| value.norm() <= tol(z),
        MAX_ITERATIONS,
    );
    let points = result.roots.iter().map(|&z| (z, eval_word(s, word, z).1.norm())).collect();
    (points, result.converged)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointSearch<T> {
    pub points: Vec<RepellingPoint<T>>,
    pub words: usize,
    /// Words whose fixed-point solve missed the residual target; their
    /// fixed points are left out.
    pub unconverged_words: usize,
}

/// Repelling fixed points (`|h'| > 1 + 1e-9`) of loop words at `vertex` of
/// length at most `max_word_len`. When there are more than `n_words` loops a
/// seeded random subset of that size is used.
pub fn repelling_fixed_points<T: Scalar>(
    s: &System<T>,
    vertex: usize,
    max_word_len: usize,
    n_words: usize,
    seed: u64,
) -> Result<FixedPointSearch<T>> {
    let mut words = loop_words(s, vertex, max_word_len);
    if words.len() > n_words {
        let mut rng = rng::stream(seed, 0);
        words.shuffle(&mut rng);
        words.truncate(n_words);
    }
    let threshold = T::one() + T::lit(1e-9);
    let solved: Vec<_> = {
        use rayon::prelude::*;
        words.par_iter().map(|w| word_fixed_points(s, w)).collect()
    };
    let mut search = FixedPointSearch { points: Vec::new(), words: words.len(), unconverged_words: 0 };
    for (word, (points, converged)) in words.iter().zip(solved) {
        if !converged {
            search.unconverged_words += 1;
            continue;
        }
        let steps: Vec<Step> = word.iter().map(|c| Step { edge: c.edge, atom: c.atom }).collect();
        for (z, mult) in points {
            if mult > threshold {
                search.points.push(RepellingPoint { location: z, multiplier_modulus: mult, word: steps.clone() });
            }
        }
    }
    Ok(search)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;

    fn single(coeffs: &[f64]) -> System<f64> {
        examples::single_map(Polynomial::from_real(coeffs))
    }

    #[test]
    fn square_has_one_repelling_fixed_point() {
        let s = single(&[0.0, 0.0, 1.0]);
        let found = repelling_fixed_points(&s, 0, 1, 10, 0).unwrap();
        assert_eq!(found.points.len(), 1);
        let p = &found.points[0];
        assert!((p.location - Complex::new(1.0, 0.0)).norm() < 1e-12);
        assert!((p.multiplier_modulus - 2.0).abs() < 1e-12);
    }

    #[test]
    fn basilica_fixed_points_are_both_repelling() {
        let s = single(&[-1.0, 0.0, 1.0]);
        let found = repelling_fixed_points(&s, 0, 1, 10, 0).unwrap();
        let mut xs: Vec<f64> = found.points.iter().map(|p| p.location.re).collect();
        xs.sort_by(f64::total_cmp);
        let r5 = 5f64.sqrt();
        assert_eq!(xs.len(), 2);
        assert!((xs[0] - (1.0 - r5) / 2.0).abs() < 1e-12);
        assert!((xs[1] - (1.0 + r5) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn loop_words_of_two_vertex_system() {
        let s = examples::two_vertex::<f64>();
        // loops at vertex 1: 1, 11, 12·1, 111, 11·2·1 (as 1→1→2→1), 12·11
        let lens: Vec<usize> = loop_words(&s, 0, 3).iter().map(Vec::len).collect();
        assert_eq!(lens.iter().filter(|&&l| l == 1).count(), 1);
        assert_eq!(lens.iter().filter(|&&l| l == 2).count(), 2);
        assert_eq!(lens.iter().filter(|&&l| l == 3).count(), 3);
        assert!(loop_words(&s, 1, 1).is_empty());
    }

    #[test]
    fn fixed_points_satisfy_the_word_equation() {
        let s = examples::two_vertex::<f64>();
        let found = repelling_fixed_points(&s, 0, 3, 100, 0).unwrap();
        assert_eq!(found.unconverged_words, 0);
        assert!(!found.points.is_empty());
        for p in &found.points {
            let word: Vec<Choice<f64>> = p
                .word
                .iter()
                .map(|st| *s.outgoing(s.edges()[st.edge].from).iter().find(|c| c.edge == st.edge).unwrap())
                .collect();
            let (h, dh) = eval_word(&s, &word, p.location);
            assert!((h - p.location).norm() <= 1e-8 * (1.0 + p.location.norm()));
            assert!(dh.norm() > 1.0);
        }
    }
}
