//! Admissible words, forward random orbits and random filled-in Julia sets.

use rayon::prelude::*;

use crate::model::{Choice, SpherePoint, System};
use crate::rng::{self, StreamRng};
use crate::{Error, FieldVertex, GridField, Raster, Result, Scalar};

/// One step of a word: an edge index and an atom index on that edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Step {
    pub edge: usize,
    pub atom: usize,
}

/// A sampled admissible word together with its RNG provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordSample {
    pub start_vertex: usize,
    pub steps: Vec<Step>,
    pub seed: u64,
    pub stream_id: u64,
}

impl WordSample {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Consecutive edges chain head to tail, starting at `start_vertex`.
    pub fn is_admissible<T: Scalar>(&self, s: &System<T>) -> bool {
        let mut at = self.start_vertex;
        for step in &self.steps {
            let Some(e) = s.edges().get(step.edge) else { return false };
            if e.from != at || step.atom >= e.atoms.len() {
                return false;
            }
            at = e.to;
        }
        true
    }
}

/// Draws the next `(edge, atom)` out of `vertex` with probability equal to
/// the atom weight. Choosing the edge `(i, j)` with probability `p_ij` and then
/// the atom with probability `weight / p_ij` gives the same law.
pub fn draw_choice<T: Scalar>(s: &System<T>, vertex: usize, rng: &mut StreamRng) -> Result<Choice<T>> {
    let choices = s.outgoing(vertex);
    let last = *choices.last().ok_or(Error::DeadEnd { vertex: vertex + 1 })?;
    let u = rng::unit(rng);
    let mut acc = 0.0;
    for c in choices {
        acc += c.weight.as_f64();
        if u < acc {
            return Ok(*c);
        }
    }
    // u within round-off of the row total
    Ok(last)
}

pub fn sample_word<T: Scalar>(
    s: &System<T>,
    start_vertex: usize,
    length: usize,
    seed: u64,
    stream_id: u64,
) -> Result<WordSample> {
    let mut rng = rng::stream(seed, stream_id);
    let mut at = start_vertex;
    let mut steps = Vec::with_capacity(length);
    for _ in 0..length {
        let c = draw_choice(s, at, &mut rng)?;
        steps.push(Step { edge: c.edge, atom: c.atom });
        at = c.to;
    }
    Ok(WordSample { start_vertex, steps, seed, stream_id })
}

/// `|z| ≥ R` or infinite.
#[inline]
pub fn is_escaped<T: Scalar>(z: &SpherePoint<T>, radius: T) -> bool {
    match z {
        SpherePoint::Infinity => true,
        SpherePoint::Finite(w) => w.norm() >= radius,
    }
}

/// Forward orbit `z, f1(z), f2(f1(z)), …` along a word.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitTrace<T> {
    pub points: Vec<SpherePoint<T>>,
    pub vertices: Vec<usize>,
    pub escaped_at: Option<usize>,
}

/// Follows `word` from `z` for at most `max_steps` maps, stopping at the
/// first point past the escape radius.
pub fn run_orbit<T: Scalar>(s: &System<T>, z: SpherePoint<T>, word: &WordSample, max_steps: usize) -> OrbitTrace<T> {
    let radius = s.escape_radius();
    let mut points = vec![z];
    let mut vertices = vec![word.start_vertex];
    let mut current = z;
    if is_escaped(&current, radius) {
        return OrbitTrace { points, vertices, escaped_at: Some(0) };
    }
    for (n, step) in word.steps.iter().take(max_steps).enumerate() {
        let edge = &s.edges()[step.edge];
        current = edge.atoms[step.atom].map.eval_sphere(current);
        points.push(current);
        vertices.push(edge.to);
        if is_escaped(&current, radius) {
            return OrbitTrace { points, vertices, escaped_at: Some(n + 1) };
        }
    }
    OrbitTrace { points, vertices, escaped_at: None }
}

/// Depth-limited raster of the random filled-in set `K_ξ` for one word: a
/// pixel is 0 when the orbit of its center escapes within `max_steps` and 1
/// otherwise. With `supersample = k > 1` each pixel averages a `k × k` grid of
/// sub-pixel samples instead.
pub fn render_random_filled_set<T: Scalar>(
    s: &System<T>,
    word: &WordSample,
    raster: Raster<T>,
    max_steps: usize,
    supersample: usize,
) -> GridField<T> {
    let k = supersample.max(1);
    let (dx, dy) = (raster.dx(), raster.dy());
    let values = (0..raster.len())
        .into_par_iter()
        .map(|idx| {
            let center = raster.center_of(idx);
            let mut stays = 0usize;
            for a in 0..k {
                for b in 0..k {
                    let z = if k == 1 {
                        center
                    } else {
                        let ox = T::lit((a as f64 + 0.5) / k as f64 - 0.5) * dx;
                        let oy = T::lit((b as f64 + 0.5) / k as f64 - 0.5) * dy;
                        center + num_complex::Complex::new(ox, oy)
                    };
                    if run_orbit(s, z.into(), word, max_steps).escaped_at.is_none() {
                        stays += 1;
                    }
                }
            }
            T::lit(stays as f64 / (k * k) as f64)
        })
        .collect();
    GridField { raster, vertex: FieldVertex::Vertex(word.start_vertex), values }
}

/// Pixels counted as inside (value ≥ 1/2) with at least one 8-neighbour
/// counted as outside; this approximates `J_ξ = ∂K_ξ`.
pub fn boundary_band<T: Scalar>(field: &GridField<T>) -> GridField<T> {
    let (nx, ny) = (field.raster.nx, field.raster.ny);
    let half = T::lit(0.5);
    let inside = |c: usize, r: usize| field.get(c, r) >= half;
    let values = (0..nx * ny)
        .into_par_iter()
        .map(|idx| {
            let (c, r) = (idx % nx, idx / nx);
            if !inside(c, r) {
                return T::zero();
            }
            for rr in r.saturating_sub(1)..=(r + 1).min(ny - 1) {
                for cc in c.saturating_sub(1)..=(c + 1).min(nx - 1) {
                    if !inside(cc, rr) {
                        return T::one();
                    }
                }
            }
            T::zero()
        })
        .collect();
    GridField { raster: field.raster, vertex: field.vertex, values }
}

/// Fraction of marked pixels in a binary field.
pub fn marked_fraction<T: Scalar>(mask: &GridField<T>) -> f64 {
    let half = T::lit(0.5);
    mask.values.iter().filter(|&&v| v >= half).count() as f64 / mask.values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::{Polynomial, Window};
    use num_complex::Complex;
    use proptest::prelude::*;

    #[test]
    fn single_atom_word_is_constant() {
        let s = examples::square::<f64>();
        for seed in 0..5 {
            let w = sample_word(&s, 0, 10, seed, 1).unwrap();
            assert!(w.steps.iter().all(|st| *st == Step { edge: 0, atom: 0 }));
        }
    }

    #[test]
    fn vertex_two_always_returns_with_second_map() {
        let s = examples::two_vertex::<f64>();
        for stream in 0..50 {
            let w = sample_word(&s, 1, 1, 3, stream).unwrap();
            assert_eq!(w.steps[0], Step { edge: 2, atom: 0 });
            let long = sample_word(&s, 0, 40, 3, stream).unwrap();
            assert!(long.is_admissible(&s));
            // edge 2 is the only edge out of vertex 2, and edge 1 leads there
            for pair in long.steps.windows(2) {
                if pair[0].edge == 1 {
                    assert_eq!(pair[1].edge, 2);
                }
            }
        }
    }

    #[test]
    fn edge_frequencies_from_vertex_one() {
        // binomial(n, 1/2): mean n/2, sd sqrt(n)/2
        let s = examples::two_vertex::<f64>();
        let n = 100_000u64;
        let stay = (0..n).filter(|&k| sample_word(&s, 0, 1, 11, k).unwrap().steps[0].edge == 0).count() as f64;
        let sd = (n as f64).sqrt() / 2.0;
        assert!((stay - n as f64 / 2.0).abs() <= 3.0 * sd, "stay count {stay}");
    }

    #[test]
    fn orbit_from_infinity_escapes_immediately() {
        let s = examples::two_vertex::<f64>();
        let w = sample_word(&s, 0, 5, 0, 0).unwrap();
        assert_eq!(run_orbit(&s, SpherePoint::Infinity, &w, 5).escaped_at, Some(0));
    }

    #[test]
    fn common_fixed_point_never_escapes() {
        let s = examples::two_vertex::<f64>();
        for stream in 0..10 {
            let w = sample_word(&s, 0, 30, 5, stream).unwrap();
            let t = run_orbit(&s, SpherePoint::new(0.0, 0.0), &w, 30);
            assert_eq!(t.escaped_at, None);
            assert!(t.points.iter().all(|p| *p == SpherePoint::new(0.0, 0.0)));
            assert_eq!(t.points.len(), 31);
        }
    }

    #[test]
    fn hand_iteration_of_basilica_map() {
        // 3 -> 8 -> 63 with R = 3: already escaped at step 0
        let s = examples::single_map(Polynomial::<f64>::from_real(&[-1.0, 0.0, 1.0]));
        let w = sample_word(&s, 0, 5, 0, 0).unwrap();
        let t = run_orbit(&s, SpherePoint::new(3.0, 0.0), &w, 5);
        assert!(t.escaped_at.unwrap() <= 2);
        let t = run_orbit(&s, SpherePoint::new(2.5, 0.0), &w, 5);
        assert_eq!(t.points[1], SpherePoint::new(5.25, 0.0));
        assert_eq!(t.escaped_at, Some(1));
    }

    #[test]
    fn escape_doubles_afterwards() {
        let s = examples::two_vertex::<f64>();
        let r = s.escape_radius();
        for stream in 0..20 {
            let w = sample_word(&s, 0, 60, 9, stream).unwrap();
            let t = run_orbit(&s, SpherePoint::new(1.9, 0.3), &w, 40);
            if let Some(n) = t.escaped_at {
                assert!(t.points[n].modulus() >= r);
                let mut z = t.points[n];
                for step in &w.steps[n..n + 10] {
                    let next = s.edges()[step.edge].atoms[step.atom].map.eval_sphere(z);
                    assert!(next.modulus() >= 2.0 * z.modulus());
                    z = next;
                }
            }
        }
    }

    #[test]
    fn square_filled_set_is_unit_disk() {
        let s = examples::square::<f64>();
        let w = sample_word(&s, 0, 200, 0, 0).unwrap();
        let raster = Raster::new(Window::square(2.0), 128, 128);
        let f = render_random_filled_set(&s, &w, raster, 200, 1);
        let pitch = raster.pitch();
        for idx in 0..raster.len() {
            let r = raster.center_of(idx).norm();
            if r < 1.0 - pitch {
                assert_eq!(f.values[idx], 1.0);
            } else if r > 1.0 + pitch {
                assert_eq!(f.values[idx], 0.0);
            }
            if r >= s.escape_radius() {
                assert_eq!(f.values[idx], 0.0);
            }
        }
        let band = boundary_band(&f);
        assert!(marked_fraction(&band) > 0.0 && marked_fraction(&band) < 0.05);
    }

    proptest! {
        #[test]
        fn sampled_words_are_admissible_and_reproducible(seed in any::<u64>(), stream in any::<u64>(), start in 0usize..4) {
            let s = examples::four_vertex::<f64>();
            let w = sample_word(&s, start, 25, seed, stream).unwrap();
            prop_assert!(w.is_admissible(&s));
            prop_assert_eq!(&w, &sample_word(&s, start, 25, seed, stream).unwrap());
        }

        #[test]
        fn orbit_points_follow_the_word(re in -2.0f64..2.0, im in -2.0f64..2.0, stream in 0u64..1000) {
            let s = examples::two_vertex::<f64>();
            let w = sample_word(&s, 0, 12, 1, stream).unwrap();
            let t = run_orbit(&s, Complex::new(re, im).into(), &w, 12);
            for n in 0..t.points.len() - 1 {
                let st = w.steps[n];
                let e = &s.edges()[st.edge];
                prop_assert_eq!(t.points[n + 1], e.atoms[st.atom].map.eval_sphere(t.points[n]));
                prop_assert_eq!(t.vertices[n + 1], e.to);
            }
        }
    }
}
