//! Text format for systems.
//!
//! ```toml
//! name = "optional label"
//! vertices = 2
//! window = [-3.0, 3.0, -3.0, 3.0]   # optional default view x0, x1, y0, y1
//!
//! [[edge]]
//! from = 1
//! to = 2
//! [[edge.atom]]
//! weight = 0.5
//! coeffs = [[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]   # [re, im], ascending powers
//! ```

use std::fmt::Write as _;

use num_complex::Complex;
use serde::Deserialize;

use crate::model::{Atom, EdgeMeasure, Polynomial, System, Window};
use crate::{Error, Result, Scalar};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    name: Option<String>,
    vertices: usize,
    window: Option<[f64; 4]>,
    #[serde(default)]
    edge: Vec<RawEdge>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    from: usize,
    to: usize,
    #[serde(default)]
    atom: Vec<RawAtom>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAtom {
    weight: f64,
    coeffs: Vec<[f64; 2]>,
}

/// Parses and validates a system config.
pub fn parse_system<T: Scalar>(text: &str) -> Result<System<T>> {
    let raw: RawSystem = toml::from_str(text).map_err(|e| Error::Schema(e.message().to_string()))?;
    let mut edges = Vec::with_capacity(raw.edge.len());
    for (k, e) in raw.edge.into_iter().enumerate() {
        if e.from == 0 || e.to == 0 || e.from > raw.vertices || e.to > raw.vertices {
            return Err(Error::Schema(format!(
                "edge {}: vertex ids must lie in 1..={}",
                k + 1,
                raw.vertices
            )));
        }
        let mut atoms = Vec::with_capacity(e.atom.len());
        for (a, atom) in e.atom.into_iter().enumerate() {
            if !(atom.weight > 0.0) || !atom.weight.is_finite() {
                return Err(Error::Weight { edge: k + 1, atom: a + 1, weight: atom.weight });
            }
            if atom.coeffs.iter().flatten().any(|c| !c.is_finite()) {
                return Err(Error::Schema(format!("edge {} atom {}: non-finite coefficient", k + 1, a + 1)));
            }
            let map = Polynomial::new(
                atom.coeffs.iter().map(|&[re, im]| Complex::new(T::lit(re), T::lit(im))).collect(),
            );
            map.require_degree_two()?;
            atoms.push(Atom { map, weight: T::lit(atom.weight) });
        }
        edges.push(EdgeMeasure { from: e.from - 1, to: e.to - 1, atoms });
    }
    let window = match raw.window {
        Some([x0, x1, y0, y1]) => Some(Window::new(T::lit(x0), T::lit(x1), T::lit(y0), T::lit(y1))?),
        None => None,
    };
    Ok(System::new(raw.vertices, edges)?.with_window(window).with_name(raw.name))
}

/// Writes a number with 17 significant digits, which round-trips any `f64`.
pub fn format_decimal(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serializes a system into the config format.
pub fn serialize_system<T: Scalar>(s: &System<T>) -> String {
    let mut out = String::new();
    if let Some(name) = s.name() {
        writeln!(out, "name = {name:?}").unwrap();
    }
    writeln!(out, "vertices = {}", s.vertex_count()).unwrap();
    if let Some(w) = s.default_window() {
        let [x0, x1, y0, y1] = w.bounds().map(|v| format_decimal(v.as_f64()));
        writeln!(out, "window = [{x0}, {x1}, {y0}, {y1}]").unwrap();
    }
    for e in s.edges() {
        writeln!(out, "\n[[edge]]\nfrom = {}\nto = {}", e.from + 1, e.to + 1).unwrap();
        for a in &e.atoms {
            let coeffs: Vec<String> = a
                .map
                .coeffs()
                .iter()
                .map(|c| format!("[{}, {}]", format_decimal(c.re.as_f64()), format_decimal(c.im.as_f64())))
                .collect();
            writeln!(
                out,
                "[[edge.atom]]\nweight = {}\ncoeffs = [{}]",
                format_decimal(a.weight.as_f64()),
                coeffs.join(", ")
            )
            .unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SQUARE: &str = r#"
vertices = 1
[[edge]]
from = 1
to = 1
[[edge.atom]]
weight = 1.0
coeffs = [[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]
"#;

    #[test]
    fn minimal_system() {
        let s = parse_system::<f64>(SQUARE).unwrap();
        assert_eq!(s.vertex_count(), 1);
        assert_eq!(s.edges().len(), 1);
        assert_eq!((s.edges()[0].from, s.edges()[0].to), (0, 0));
    }

    #[test]
    fn malformed_text_is_a_schema_error() {
        assert!(matches!(parse_system::<f64>("vertices = ["), Err(Error::Schema(_))));
        assert!(matches!(parse_system::<f64>("vertices = 1\nbogus = 2"), Err(Error::Schema(_))));
        let bad_vertex = SQUARE.replace("to = 1", "to = 3");
        assert!(matches!(parse_system::<f64>(&bad_vertex), Err(Error::Schema(_))));
    }

    #[test]
    fn zero_weight_is_rejected() {
        let text = SQUARE.replace("weight = 1.0", "weight = 0.0");
        assert!(matches!(parse_system::<f64>(&text), Err(Error::Weight { .. })));
    }

    #[test]
    fn low_degree_is_rejected() {
        let text = SQUARE.replace("[[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]", "[[0.0, 0.0], [1.0, 0.0]]");
        assert!(matches!(parse_system::<f64>(&text), Err(Error::Degree { degree: 1 })));
    }

    #[test]
    fn row_sums_are_checked() {
        let text = r#"
vertices = 2
[[edge]]
from = 1
to = 2
[[edge.atom]]
weight = 0.9
coeffs = [[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]
[[edge]]
from = 2
to = 1
[[edge.atom]]
weight = 1.0
coeffs = [[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]
"#;
        assert!(matches!(parse_system::<f64>(text), Err(Error::Stochasticity { vertex: 1, .. })));
    }

    proptest! {
        #[test]
        fn serialize_round_trip_is_exact(
            w in 0.01f64..0.99,
            c in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..6),
        ) {
            let coeffs: Vec<String> = c.iter().map(|(a, b)| format!("[{a:?}, {b:?}]")).collect();
            let text = format!(
                "vertices = 1\n[[edge]]\nfrom = 1\nto = 1\n[[edge.atom]]\nweight = {w:?}\ncoeffs = [{}]\n\
                 [[edge.atom]]\nweight = {:?}\ncoeffs = [[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]\n",
                coeffs.join(", "),
                1.0 - w,
            );
            let s = parse_system::<f64>(&text).unwrap();
            let again = serialize_system(&s);
            let s2 = parse_system::<f64>(&again).unwrap();
            prop_assert_eq!(s.edges(), s2.edges());
            prop_assert_eq!(serialize_system(&s2), again);
        }
    }
}
