use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("config schema: {0}")]
    Schema(String),
    #[error("row {vertex} of the transition matrix sums to {sum}, expected 1")]
    Stochasticity { vertex: usize, sum: f64 },
    #[error("map of degree {degree}; degree two or more is required")]
    Degree { degree: usize },
    #[error("edge {edge} atom {atom}: weight {weight} is not positive")]
    Weight { edge: usize, atom: usize, weight: f64 },
    #[error("system is not irreducible")]
    NotIrreducible,
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("vertex {vertex} has no admissible continuation")]
    DeadEnd { vertex: usize },
    #[error("fields do not share one raster")]
    RasterMismatch,
}
