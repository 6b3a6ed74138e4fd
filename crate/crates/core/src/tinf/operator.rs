//! The transition operator `(Mφ)(z, i) = Σ_j Σ_atoms weight · φ(f(z), j)` on
//! per-vertex grid fields.

use rayon::prelude::*;

use crate::model::{SpherePoint, System};
use crate::sampler::is_escaped;
use crate::tinf::tree::tree_bounds_with_budget;
use crate::{Error, FieldVertex, GridField, Raster, Result, Scalar};

/// How a read of `φ(f(z), j)` outside the raster is resolved.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReadPolicy {
    /// Depth of the branch tree used to certify the value at an
    /// out-of-window image before falling back to the boundary clamp.
    /// Zero disables the certificate.
    pub certify_depth: usize,
    pub certify_budget: usize,
}

impl Default for ReadPolicy {
    fn default() -> Self {
        ReadPolicy { certify_depth: 12, certify_budget: 20_000 }
    }
}

#[derive(Clone, Copy, Debug)]
enum Source<T> {
    Constant(T),
    Interp { vertex: u32, base: u32, dc: u32, dr: u32, fx: T, fy: T },
}

#[derive(Clone, Copy, Debug)]
struct Term<T> {
    weight: T,
    source: Source<T>,
}

/// Precomputed one-step operator on a fixed raster. Images and interpolation
/// weights do not depend on `φ`, so they are evaluated once.
#[derive(Clone, Debug)]
pub struct TransitionStencil<T> {
    raster: Raster<T>,
    vertices: usize,
    offsets: Vec<usize>,
    terms: Vec<Term<T>>,
    /// Number of reads clamped to the window boundary without a certificate.
    pub out_of_window: usize,
}

impl<T: Scalar> TransitionStencil<T> {
    pub fn build(s: &System<T>, raster: Raster<T>, policy: ReadPolicy) -> Self {
        let radius = s.escape_radius();
        let n = raster.len();
        let m = s.vertex_count();
        let per_point: Vec<(Vec<Term<T>>, usize)> = (0..m * n)
            .into_par_iter()
            .map(|k| {
                let (i, idx) = (k / n, k % n);
                let z = raster.center_of(idx);
                let mut terms = Vec::with_capacity(s.outgoing(i).len());
                let mut clamped = 0;
                for c in s.outgoing(i) {
                    let image = s.map(c).eval(z);
                    let source = match image {
                        img if is_escaped(&img, radius) => Source::Constant(T::one()),
                        SpherePoint::Finite(w) if raster.window.contains(w) => interp(&raster, c.to, w),
                        SpherePoint::Finite(w) => {
                            let certified = (policy.certify_depth > 0).then(|| {
                                tree_bounds_with_budget(s, w.into(), c.to, policy.certify_depth, policy.certify_budget)
                            });
                            match certified {
                                Some(b) if b.width() == T::zero() => Source::Constant(b.lower),
                                _ => {
                                    clamped += 1;
                                    interp(&raster, c.to, w)
                                }
                            }
                        }
                        SpherePoint::Infinity => unreachable!("infinity counts as escaped"),
                    };
                    terms.push(Term { weight: c.weight, source });
                }
                (terms, clamped)
            })
            .collect();

        let mut offsets = Vec::with_capacity(m * n + 1);
        let mut terms = Vec::new();
        let mut out_of_window = 0;
        offsets.push(0);
        for (t, clamped) in per_point {
            terms.extend(t);
            offsets.push(terms.len());
            out_of_window += clamped;
        }
        TransitionStencil { raster, vertices: m, offsets, terms, out_of_window }
    }

    pub fn raster(&self) -> Raster<T> {
        self.raster
    }

    /// One application of the operator.
    pub fn apply(&self, phi: &[GridField<T>]) -> Result<Vec<GridField<T>>> {
        if phi.len() != self.vertices || phi.iter().any(|f| f.raster != self.raster) {
            return Err(Error::RasterMismatch);
        }
        let n = self.raster.len();
        let one = T::one();
        let values: Vec<T> = (0..self.vertices * n)
            .into_par_iter()
            .map(|k| {
                self.terms[self.offsets[k]..self.offsets[k + 1]].iter().fold(T::zero(), |acc, t| {
                    let v = match t.source {
                        Source::Constant(v) => v,
                        Source::Interp { vertex, base, dc, dr, fx, fy } => {
                            let f = &phi[vertex as usize].values;
                            let b = base as usize;
                            let (dc, dr) = (dc as usize, dr as usize);
                            let top = f[b] * (one - fx) + f[b + dc] * fx;
                            let bottom = f[b + dr] * (one - fx) + f[b + dr + dc] * fx;
                            top * (one - fy) + bottom * fy
                        }
                    };
                    acc + t.weight * v
                })
            })
            .collect();
        Ok(values
            .chunks(n)
            .enumerate()
            .map(|(i, v)| GridField { raster: self.raster, vertex: FieldVertex::Vertex(i), values: v.to_vec() })
            .collect())
    }
}

fn interp<T: Scalar>(raster: &Raster<T>, vertex: usize, w: num_complex::Complex<T>) -> Source<T> {
    let (nx, ny) = (raster.nx, raster.ny);
    let (col, row) = raster.to_pixel(w);
    let cx = col.max(T::zero()).min(T::lit((nx - 1) as f64));
    let cy = row.max(T::zero()).min(T::lit((ny - 1) as f64));
    let c0 = cx.floor().as_f64() as usize;
    let r0 = cy.floor().as_f64() as usize;
    Source::Interp {
        vertex: vertex as u32,
        base: (r0 * nx + c0) as u32,
        dc: u32::from(c0 + 1 < nx),
        dr: if r0 + 1 < ny { nx as u32 } else { 0 },
        fx: cx - T::lit(c0 as f64),
        fy: cy - T::lit(r0 as f64),
    }
}

/// Single application of the transition operator to a per-vertex family.
/// Returns the new family and the number of uncertified out-of-window reads.
pub fn markov_step<T: Scalar>(
    s: &System<T>,
    phi: &[GridField<T>],
    policy: ReadPolicy,
) -> Result<(Vec<GridField<T>>, usize)> {
    let raster = phi.first().ok_or(Error::RasterMismatch)?.raster;
    let stencil = TransitionStencil::build(s, raster, policy);
    Ok((stencil.apply(phi)?, stencil.out_of_window))
}

/// Continuous start field equal to 1 beyond `2R` and 0 inside `R`:
/// `clamp((|z| - R) / R, 0, 1)`.
pub fn radial_ramp<T: Scalar>(s: &System<T>, raster: Raster<T>) -> Vec<GridField<T>> {
    let r = s.escape_radius();
    (0..s.vertex_count())
        .map(|i| GridField {
            raster,
            vertex: FieldVertex::Vertex(i),
            values: (0..raster.len())
                .map(|idx| ((raster.center_of(idx).norm() - r) / r).max(T::zero()).min(T::one()))
                .collect(),
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct IterationOutcome<T> {
    pub fields: Vec<GridField<T>>,
    pub iterations: usize,
    /// Sup-norm change of the final step.
    pub last_change: T,
    pub converged: bool,
    pub out_of_window: usize,
}

/// Iterates the operator from the radial ramp until the sup-norm change of a
/// step drops below `tol`.
pub fn operator_iteration<T: Scalar>(
    s: &System<T>,
    raster: Raster<T>,
    tol: T,
    max_iter: usize,
    policy: ReadPolicy,
) -> Result<IterationOutcome<T>> {
    let stencil = TransitionStencil::build(s, raster, policy);
    let mut phi = radial_ramp(s, raster);
    let mut last_change = T::infinity();
    let mut iterations = 0;
    while iterations < max_iter {
        let next = stencil.apply(&phi)?;
        last_change = phi.iter().zip(&next).fold(T::zero(), |d, (a, b)| d.max(a.sup_distance(b)));
        phi = next;
        iterations += 1;
        if last_change < tol {
            break;
        }
    }
    Ok(IterationOutcome {
        fields: phi,
        iterations,
        last_change,
        converged: last_change < tol,
        out_of_window: stencil.out_of_window,
    })
}
