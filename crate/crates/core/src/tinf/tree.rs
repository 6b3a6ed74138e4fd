use indexmap::IndexMap;
use num_complex::Complex;

use crate::model::{SpherePoint, System};
use crate::sampler::is_escaped;
use crate::Scalar;

pub const DEFAULT_DEPTH: usize = 24;
pub const DEFAULT_NODE_BUDGET: usize = 10_000_000;

/// Certified enclosure of the escape probability from a finite-depth branch tree.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbBounds<T> {
    /// Mass of branches that passed the escape radius.
    pub lower: T,
    /// `lower` plus the mass of branches still unresolved at the cutoff.
    pub upper: T,
    /// Depth actually reached.
    pub depth: usize,
    /// `1 - (upper - lower)`.
    pub resolved_mass: T,
    /// Set when the node budget ran out before `max_depth`.
    pub truncated: bool,
    pub nodes: usize,
}

impl<T: Scalar> ProbBounds<T> {
    pub fn width(&self) -> T {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> T {
        (self.lower + self.upper) * T::lit(0.5)
    }

    fn certain(value: T) -> Self {
        ProbBounds { lower: value, upper: value, depth: 0, resolved_mass: T::one(), truncated: false, nodes: 0 }
    }
}

type StateKey = (u64, u64, usize);

fn key<T: Scalar>(z: Complex<T>, vertex: usize) -> StateKey {
    // +0.0 and -0.0 are the same point
    let canon = |x: T| if x == T::zero() { 0u64 } else { x.as_f64().to_bits() };
    (canon(z.re), canon(z.im), vertex)
}

/// Enumerates the weighted branch tree of admissible words from `(z, vertex)`.
///
/// A branch whose orbit reaches the escape radius adds its product weight to
/// both bounds; a branch still inside at `max_depth` adds only to `upper`.
/// Branches that reach the same `(value, vertex)` state at the same depth are
/// merged. Iteration order is insertion order, so results are reproducible.
pub fn tree_bounds<T: Scalar>(s: &System<T>, z: SpherePoint<T>, vertex: usize, max_depth: usize) -> ProbBounds<T> {
    tree_bounds_with_budget(s, z, vertex, max_depth, DEFAULT_NODE_BUDGET)
}

pub fn tree_bounds_with_budget<T: Scalar>(
    s: &System<T>,
    z: SpherePoint<T>,
    vertex: usize,
    max_depth: usize,
    node_budget: usize,
) -> ProbBounds<T> {
    let radius = s.escape_radius();
    let z = match z {
        SpherePoint::Finite(w) if w.norm() < radius => w,
        _ => return ProbBounds::certain(T::one()),
    };
    let mut frontier: IndexMap<StateKey, (Complex<T>, usize, T)> = IndexMap::new();
    frontier.insert(key(z, vertex), (z, vertex, T::one()));
    let mut lower = T::zero();
    let mut nodes = 0usize;
    let mut depth = 0usize;
    let mut truncated = false;
    let mut leftover = T::zero();

    while depth < max_depth && !frontier.is_empty() {
        let mut next: IndexMap<StateKey, (Complex<T>, usize, T)> = IndexMap::with_capacity(frontier.len() * 2);
        let mut states = frontier.into_values();
        for (w, v, mass) in states.by_ref() {
            nodes += 1;
            for c in s.outgoing(v) {
                let child_mass = mass * c.weight;
                let image = s.map(c).eval(w);
                if is_escaped(&image, radius) {
                    lower = lower + child_mass;
                } else if let SpherePoint::Finite(u) = image {
                    next.entry(key(u, c.to)).and_modify(|e| e.2 = e.2 + child_mass).or_insert((u, c.to, child_mass));
                }
            }
            if nodes >= node_budget {
                truncated = true;
                break;
            }
        }
        if truncated {
            // unexpanded states at this depth stay unresolved
            leftover = states.fold(T::zero(), |acc, (_, _, m)| acc + m);
            frontier = next;
            break;
        }
        frontier = next;
        depth += 1;
    }

    let unresolved = frontier.values().fold(leftover, |acc, e| acc + e.2);
    let lower = lower.min(T::one());
    let upper = (lower + unresolved).min(T::one());
    ProbBounds { lower, upper, depth, resolved_mass: T::one() - (upper - lower), truncated, nodes }
}

/// True iff some admissible branch of length at most `max_depth` escapes,
/// i.e. `tree_bounds(..).lower > 0`. Depth-first with early exit.
pub fn some_branch_escapes<T: Scalar>(
    s: &System<T>,
    z: SpherePoint<T>,
    vertex: usize,
    max_depth: usize,
    node_budget: usize,
) -> (bool, bool) {
    let radius = s.escape_radius();
    let z = match z {
        SpherePoint::Finite(w) if w.norm() < radius => w,
        _ => return (true, false),
    };
    let mut seen: std::collections::HashSet<(StateKey, usize)> = std::collections::HashSet::new();
    let mut stack = vec![(z, vertex, 0usize)];
    let mut nodes = 0usize;
    while let Some((w, v, d)) = stack.pop() {
        if d == max_depth || !seen.insert((key(w, v), d)) {
            continue;
        }
        nodes += 1;
        if nodes > node_budget {
            return (false, true);
        }
        for c in s.outgoing(v) {
            match s.map(c).eval(w) {
                img if is_escaped(&img, radius) => return (true, false),
                SpherePoint::Finite(u) => stack.push((u, c.to, d + 1)),
                SpherePoint::Infinity => unreachable!("infinity counts as escaped"),
            }
        }
    }
    (false, false)
}
