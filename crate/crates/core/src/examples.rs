//! Shipped example systems and the negative controls used by the checks.

use crate::model::{Atom, EdgeMeasure, Polynomial, System};
use crate::{parse_system, Scalar};

pub const TWO_VERTEX_TOML: &str = include_str!("../configs/two_vertex.toml");
pub const FOUR_VERTEX_TOML: &str = include_str!("../configs/four_vertex.toml");
pub const SQUARE_TOML: &str = include_str!("../configs/square.toml");

/// Two vertices, `f1 = g1∘g1`, `f2 = g2∘g2` with `g1 = z² - 1`, `g2 = z²/4`,
/// `P = [[1/2, 1/2], [1, 0]]`, and every edge leaving `i` carrying `f_i`.
pub fn two_vertex<T: Scalar>() -> System<T> {
    parse_system(TWO_VERTEX_TOML).expect("shipped config is valid")
}

/// Four vertices built from translated copies of `g1∘g1` and `g2∘g2`.
pub fn four_vertex<T: Scalar>() -> System<T> {
    parse_system(FOUR_VERTEX_TOML).expect("shipped config is valid")
}

/// One vertex, one loop, `z²`.
pub fn square<T: Scalar>() -> System<T> {
    parse_system(SQUARE_TOML).expect("shipped config is valid")
}

/// One vertex with `map` on a single loop.
pub fn single_map<T: Scalar>(map: Polynomial<T>) -> System<T> {
    System::new(1, vec![EdgeMeasure { from: 0, to: 0, atoms: vec![Atom { map, weight: T::one() }] }])
        .expect("single loop is valid")
}

/// One vertex with two parallel loop edges that both carry `z²`.
pub fn parallel_squares<T: Scalar>() -> System<T> {
    let sq = Polynomial::from_real(&[0.0, 0.0, 1.0]);
    let edge = || EdgeMeasure { from: 0, to: 0, atoms: vec![Atom { map: sq.clone(), weight: T::lit(0.5) }] };
    System::new(1, vec![edge(), edge()]).expect("valid").with_name(Some("parallel squares".into()))
}

/// Two vertices where vertex 1 leads to vertex 2 and vertex 2 only loops.
pub fn one_way<T: Scalar>() -> System<T> {
    let sq = Polynomial::from_real(&[0.0, 0.0, 1.0]);
    System::dirac(vec![sq.clone(), sq], &[vec![0.0, 1.0], vec![0.0, 1.0]])
        .expect("valid")
        .with_name(Some("one-way".into()))
}
