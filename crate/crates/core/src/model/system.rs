use num_complex::Complex;

use crate::model::graph;
use crate::model::{Polynomial, Window};
use crate::{Error, Result, Scalar};

/// One map of an edge distribution together with its probability.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom<T> {
    pub map: Polynomial<T>,
    pub weight: T,
}

/// Finitely supported measure carried by a directed edge `from -> to`.
///
/// Vertex ids are zero-based inside the library; the config format and the
/// CLI use one-based ids.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeMeasure<T> {
    pub from: usize,
    pub to: usize,
    pub atoms: Vec<Atom<T>>,
}

impl<T: Scalar> EdgeMeasure<T> {
    pub fn total_weight(&self) -> T {
        self.atoms.iter().fold(T::zero(), |s, a| s + a.weight)
    }
}

/// A single `(edge, atom)` choice available at a vertex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Choice<T> {
    pub edge: usize,
    pub atom: usize,
    pub from: usize,
    pub to: usize,
    pub weight: T,
}

/// Graph-directed system induced by a family of edge measures.
///
/// Holds the vertex count, the weighted edges, the row-stochastic matrix
/// `P = (p_ij)` and the derived per-vertex choice tables.
#[derive(Clone, Debug)]
pub struct System<T> {
    vertices: usize,
    edges: Vec<EdgeMeasure<T>>,
    transition: Vec<Vec<T>>,
    outgoing: Vec<Vec<Choice<T>>>,
    incoming: Vec<Vec<Choice<T>>>,
    escape_radius: T,
    window: Option<Window<T>>,
    name: Option<String>,
}

impl<T: Scalar> System<T> {
    /// Validates and builds a system. Edges are kept in the given order;
    /// parallel edges between the same pair of vertices are allowed.
    pub fn new(vertices: usize, edges: Vec<EdgeMeasure<T>>) -> Result<Self> {
        if vertices == 0 {
            return Err(Error::Schema("vertex count must be positive".into()));
        }
        let mut transition = vec![vec![T::zero(); vertices]; vertices];
        for (k, e) in edges.iter().enumerate() {
            if e.from >= vertices || e.to >= vertices {
                return Err(Error::Schema(format!(
                    "edge {} references vertex outside 1..={vertices}",
                    k + 1
                )));
            }
            if e.atoms.is_empty() {
                return Err(Error::Schema(format!("edge {} has no atoms", k + 1)));
            }
            for (a, atom) in e.atoms.iter().enumerate() {
                if !(atom.weight > T::zero()) || !atom.weight.is_finite() {
                    return Err(Error::Weight { edge: k + 1, atom: a + 1, weight: atom.weight.as_f64() });
                }
                if atom.map.degree() < 2 {
                    return Err(Error::Degree { degree: atom.map.degree() });
                }
            }
            transition[e.from][e.to] = transition[e.from][e.to] + e.total_weight();
        }
        for (i, row) in transition.iter().enumerate() {
            let sum = row.iter().fold(T::zero(), |s, &p| s + p);
            if (sum - T::one()).abs() > T::stochastic_tol() {
                return Err(Error::Stochasticity { vertex: i + 1, sum: sum.as_f64() });
            }
        }

        let mut outgoing = vec![Vec::new(); vertices];
        let mut incoming = vec![Vec::new(); vertices];
        for (k, e) in edges.iter().enumerate() {
            for (a, atom) in e.atoms.iter().enumerate() {
                let c = Choice { edge: k, atom: a, from: e.from, to: e.to, weight: atom.weight };
                outgoing[e.from].push(c);
                incoming[e.to].push(c);
            }
        }
        let escape_radius = edges
            .iter()
            .flat_map(|e| e.atoms.iter())
            .fold(T::one(), |r, a| r.max(a.map.doubling_radius()));

        Ok(System { vertices, edges, transition, outgoing, incoming, escape_radius, window: None, name: None })
    }

    /// Convenience constructor for `tau_ij = p_ij δ_{f_i}`: every edge leaving
    /// vertex `i` carries the single map `maps[i]`.
    pub fn dirac(maps: Vec<Polynomial<T>>, p: &[Vec<f64>]) -> Result<Self> {
        let mut edges = Vec::new();
        for (i, row) in p.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                if w > 0.0 {
                    edges.push(EdgeMeasure {
                        from: i,
                        to: j,
                        atoms: vec![Atom { map: maps[i].clone(), weight: T::lit(w) }],
                    });
                }
            }
        }
        Self::new(maps.len(), edges)
    }

    pub fn with_window(mut self, window: Option<Window<T>>) -> Self {
        self.window = window;
        self
    }

    pub fn with_name(mut self, name: Option<String>) -> Self {
        self.name = name;
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[EdgeMeasure<T>] {
        &self.edges
    }

    pub fn transition(&self) -> &[Vec<T>] {
        &self.transition
    }

    /// `(edge, atom)` choices leaving vertex `i`, in edge order.
    pub fn outgoing(&self, i: usize) -> &[Choice<T>] {
        &self.outgoing[i]
    }

    /// `(edge, atom)` choices arriving at vertex `j`, in edge order.
    pub fn incoming(&self, j: usize) -> &[Choice<T>] {
        &self.incoming[j]
    }

    pub fn map(&self, c: &Choice<T>) -> &Polynomial<T> {
        &self.edges[c.edge].atoms[c.atom].map
    }

    pub fn default_window(&self) -> Option<Window<T>> {
        self.window
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Certified escape radius: every map at least doubles the modulus outside it.
    pub fn escape_radius(&self) -> T {
        self.escape_radius
    }

    /// True iff the edge graph is strongly connected.
    pub fn is_irreducible(&self) -> bool {
        graph::strongly_connected(&self.adjacency())
    }

    /// Unique positive left eigenvector `pP = p`, `Σp = 1`.
    pub fn stationary_vector(&self) -> Result<Vec<T>> {
        if !self.is_irreducible() {
            return Err(Error::NotIrreducible);
        }
        graph::stationary_vector(&self.transition)
    }

    /// Some vertex offers two `(edge, map)` choices that differ in the edge or
    /// in the map. Maps compare equal within `1e-12` per coefficient.
    pub fn is_essentially_nondeterministic(&self) -> bool {
        let tol = T::lit(1e-12);
        self.outgoing.iter().any(|choices| {
            choices.iter().enumerate().any(|(a, x)| {
                choices[a + 1..]
                    .iter()
                    .any(|y| x.edge != y.edge || !self.map(x).approx_eq(self.map(y), tol))
            })
        })
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices];
        for e in &self.edges {
            if !adj[e.from].contains(&e.to) {
                adj[e.from].push(e.to);
            }
        }
        adj
    }

    /// Maps that appear anywhere in the system.
    pub fn maps(&self) -> impl Iterator<Item = &Polynomial<T>> {
        self.edges.iter().flat_map(|e| e.atoms.iter().map(|a| &a.map))
    }

    /// Converts every coefficient and weight to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Result<System<U>> {
        let edges = self
            .edges
            .iter()
            .map(|e| EdgeMeasure {
                from: e.from,
                to: e.to,
                atoms: e
                    .atoms
                    .iter()
                    .map(|a| Atom {
                        map: Polynomial::new(
                            a.map
                                .coeffs()
                                .iter()
                                .map(|c| Complex::new(U::lit(c.re.as_f64()), U::lit(c.im.as_f64())))
                                .collect(),
                        ),
                        weight: U::lit(a.weight.as_f64()),
                    })
                    .collect(),
            })
            .collect();
        let window = self.window.map(|w| w.cast());
        Ok(System::new(self.vertices, edges)?.with_window(window).with_name(self.name.clone()))
    }
}
