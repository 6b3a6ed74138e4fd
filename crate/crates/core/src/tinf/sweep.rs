use rayon::prelude::*;

use crate::model::{SpherePoint, System};
use crate::tinf::monte_carlo::monte_carlo_t;
use crate::tinf::operator::{operator_iteration, ReadPolicy};
use crate::tinf::tree::tree_bounds_with_budget;
use crate::{Error, FieldVertex, GridField, Raster, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SweepMethod {
    /// `samples` words of length `max_steps` per pixel; pixel `idx` uses
    /// streams `idx * samples ..`.
    MonteCarlo { samples: usize, max_steps: usize, seed: u64 },
    /// Field value is the lower bound, the mass of branches that escape
    /// within `depth` steps; the upper bounds are kept alongside.
    Tree { depth: usize, node_budget: usize },
    OperatorIteration { tol: f64, max_iter: usize, policy: ReadPolicy },
}

impl SweepMethod {
    pub fn name(&self) -> &'static str {
        match self {
            SweepMethod::MonteCarlo { .. } => "monte_carlo",
            SweepMethod::Tree { .. } => "tree",
            SweepMethod::OperatorIteration { .. } => "operator_iteration",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepReport {
    pub iterations: usize,
    pub last_change: f64,
    pub converged: bool,
    /// Uncertified out-of-window reads (operator iteration only).
    pub out_of_window: usize,
    /// Pixels whose tree enumeration ran out of budget.
    pub truncated: usize,
}

#[derive(Clone, Debug)]
pub struct SweepResult<T> {
    pub vertex_fields: Vec<GridField<T>>,
    /// `Σ p_i field_i`; `None` when the graph is not irreducible.
    pub aggregate: Option<GridField<T>>,
    /// Per-vertex lower and upper tree bounds (tree method only).
    pub lower: Option<Vec<GridField<T>>>,
    pub upper: Option<Vec<GridField<T>>>,
    pub report: SweepReport,
}

impl<T: Scalar> SweepResult<T> {
    /// Aggregate of the lower (or upper) bound fields with the stationary weights.
    pub fn aggregate_bounds(&self, s: &System<T>) -> Option<(GridField<T>, GridField<T>)> {
        let p = s.stationary_vector().ok()?;
        Some((aggregate(&p, self.lower.as_ref()?), aggregate(&p, self.upper.as_ref()?)))
    }
}

/// Pointwise `Σ p_i fields_i`.
pub fn aggregate<T: Scalar>(p: &[T], fields: &[GridField<T>]) -> GridField<T> {
    let raster = fields[0].raster;
    let values = (0..raster.len())
        .map(|idx| p.iter().zip(fields).fold(T::zero(), |acc, (&w, f)| acc + w * f.values[idx]))
        .collect();
    GridField { raster, vertex: FieldVertex::Aggregate, values }
}

fn field<T>(raster: Raster<T>, vertex: usize, values: Vec<T>) -> GridField<T> {
    GridField { raster, vertex: FieldVertex::Vertex(vertex), values }
}

/// Per-vertex escape-probability fields over `raster` plus the
/// stationary-weighted aggregate. Results do not depend on the thread count.
pub fn sweep_t<T: Scalar>(s: &System<T>, raster: Raster<T>, method: SweepMethod) -> Result<SweepResult<T>> {
    let m = s.vertex_count();
    let n = raster.len();
    let mut report = SweepReport::default();
    let (mut lower, mut upper) = (None, None);

    let vertex_fields = match method {
        SweepMethod::MonteCarlo { samples, max_steps, seed } => {
            let mut fields = Vec::with_capacity(m);
            for i in 0..m {
                let values = (0..n)
                    .into_par_iter()
                    .map(|idx| {
                        let z = SpherePoint::Finite(raster.center_of(idx));
                        let base = (idx as u64).wrapping_mul(samples as u64);
                        monte_carlo_t(s, z, i, samples, max_steps, seed, base).map(|e| e.mean)
                    })
                    .collect::<Result<Vec<T>>>()?;
                fields.push(field(raster, i, values));
            }
            fields
        }
        SweepMethod::Tree { depth, node_budget } => {
            let (mut lo, mut hi) = (Vec::new(), Vec::new());
            for i in 0..m {
                let bounds: Vec<_> = (0..n)
                    .into_par_iter()
                    .map(|idx| tree_bounds_with_budget(s, raster.center_of(idx).into(), i, depth, node_budget))
                    .collect();
                report.truncated += bounds.iter().filter(|b| b.truncated).count();
                lo.push(field(raster, i, bounds.iter().map(|b| b.lower).collect()));
                hi.push(field(raster, i, bounds.iter().map(|b| b.upper).collect()));
            }
            lower = Some(lo.clone());
            upper = Some(hi);
            lo
        }
        SweepMethod::OperatorIteration { tol, max_iter, policy } => {
            let out = operator_iteration(s, raster, T::lit(tol), max_iter, policy)?;
            report.iterations = out.iterations;
            report.last_change = out.last_change.as_f64();
            report.converged = out.converged;
            report.out_of_window = out.out_of_window;
            if !out.converged {
                return Err(Error::NoConvergence(format!(
                    "operator iteration: sup change {} after {} steps",
                    report.last_change, out.iterations
                )));
            }
            out.fields
        }
    };
    if !matches!(method, SweepMethod::OperatorIteration { .. }) {
        report.converged = true;
    }

    let aggregate = if s.is_irreducible() {
        Some(aggregate(&s.stationary_vector()?, &vertex_fields))
    } else {
        None
    };
    Ok(SweepResult { vertex_fields, aggregate, lower, upper, report })
}
