//! Sphere points, polynomials, the system data model and its config format.

mod config;
pub mod graph;
mod polynomial;
mod sphere;
mod system;

pub use crate::grid::Window;
pub use config::{format_decimal, parse_system, serialize_system};
pub use polynomial::Polynomial;
pub use sphere::{product_distance, SpherePoint};
pub use system::{Atom, Choice, EdgeMeasure, System};
