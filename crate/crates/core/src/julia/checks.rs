//! Filled-set membership, structural condition checks and cloud/field
//! consistency measures.

use num_complex::Complex;
use rayon::prelude::*;

use crate::julia::cloud::{preimage_cloud, PointCloud};
use crate::julia::geometry::PointIndex;
use crate::model::{SpherePoint, System};
use crate::tinf::{some_branch_escapes, DEFAULT_NODE_BUDGET};
use crate::{FieldVertex, GridField, Raster, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    /// Some admissible word maps the point past the escape radius.
    CertifiedOut,
    /// No branch escaped within the depth (or the budget ran out).
    UnresolvedIn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MembershipVerdict {
    pub membership: Membership,
    /// The node budget ran out before the depth was exhausted.
    pub truncated: bool,
}

pub fn filled_set_membership<T: Scalar>(
    s: &System<T>,
    z: SpherePoint<T>,
    vertex: usize,
    max_depth: usize,
) -> MembershipVerdict {
    filled_set_membership_with_budget(s, z, vertex, max_depth, DEFAULT_NODE_BUDGET)
}

pub fn filled_set_membership_with_budget<T: Scalar>(
    s: &System<T>,
    z: SpherePoint<T>,
    vertex: usize,
    max_depth: usize,
    node_budget: usize,
) -> MembershipVerdict {
    let (escaped, truncated) = some_branch_escapes(s, z, vertex, max_depth, node_budget);
    let membership = if escaped { Membership::CertifiedOut } else { Membership::UnresolvedIn };
    MembershipVerdict { membership, truncated }
}

/// Raster of the smallest filled-in Julia set at `vertex`: 1 where
/// membership is unresolved, 0 where escape is certified.
pub fn render_filled_set<T: Scalar>(
    s: &System<T>,
    vertex: usize,
    raster: Raster<T>,
    max_depth: usize,
    node_budget: usize,
) -> (GridField<T>, usize) {
    let verdicts: Vec<MembershipVerdict> = (0..raster.len())
        .into_par_iter()
        .map(|idx| filled_set_membership_with_budget(s, raster.center_of(idx).into(), vertex, max_depth, node_budget))
        .collect();
    let truncated = verdicts.iter().filter(|v| v.truncated).count();
    let values = verdicts
        .iter()
        .map(|v| if v.membership == Membership::UnresolvedIn { T::one() } else { T::zero() })
        .collect();
    (GridField { raster, vertex: FieldVertex::Vertex(vertex), values }, truncated)
}

pub const DEFAULT_MIN_MARGIN: f64 = 1e-3;
pub const CONTACT_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub enum Separation<T> {
    /// Smallest distance found between preimage clouds of distinct choices.
    /// Infinite when no vertex has two qualifying choices.
    Separated { margin: T },
    Violated { witness: Witness<T> },
    Inconclusive { margin: T },
}

/// Pair of choices whose preimage clouds touch, given as one-based vertex,
/// edge and atom indices as in the config file.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness<T> {
    pub vertex: usize,
    pub first: (usize, usize),
    pub second: (usize, usize),
    pub distance: T,
}

impl<T: Scalar> Separation<T> {
    pub fn label(&self) -> &'static str {
        match self {
            Separation::Separated { .. } => "SEPARATED",
            Separation::Violated { .. } => "VIOLATED",
            Separation::Inconclusive { .. } => "INCONCLUSIVE",
        }
    }
}

/// Backward separating check on sampled clouds: for every vertex and every
/// pair of distinct `(edge, atom)` choices leaving it, the preimage clouds
/// `f^{-1}(cloud_{t(e)})` must stay apart. A pair on the same edge with the
/// same map is exempt.
pub fn check_backward_separating<T: Scalar>(
    s: &System<T>,
    clouds: &[PointCloud<T>],
    min_margin: T,
) -> Result<Separation<T>> {
    let tol = T::lit(1e-12);
    let mut margin = T::infinity();
    let mut worst: Option<Witness<T>> = None;
    for v in 0..s.vertex_count() {
        let choices = s.outgoing(v);
        let mut pre: Vec<Option<Vec<Complex<T>>>> = vec![None; choices.len()];
        for a in 0..choices.len() {
            for b in a + 1..choices.len() {
                let (x, y) = (&choices[a], &choices[b]);
                if x.edge == y.edge && s.map(x).approx_eq(s.map(y), tol) {
                    continue;
                }
                for k in [a, b] {
                    if pre[k].is_none() {
                        pre[k] = Some(preimage_cloud(s, &choices[k], &clouds[choices[k].to].points)?);
                    }
                }
                let (pa, pb) = (pre[a].as_ref().expect("filled"), pre[b].as_ref().expect("filled"));
                let d = PointIndex::new(pa).min_distance(pb);
                if d < margin {
                    margin = d;
                    worst = Some(Witness {
                        vertex: v + 1,
                        first: (x.edge + 1, x.atom + 1),
                        second: (y.edge + 1, y.atom + 1),
                        distance: d,
                    });
                }
            }
        }
    }
    Ok(match worst {
        Some(w) if w.distance <= T::lit(CONTACT_THRESHOLD) => Separation::Violated { witness: w },
        _ if margin >= min_margin => Separation::Separated { margin },
        _ => Separation::Inconclusive { margin },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelVerdict {
    EmptyByLemma,
    Unknown,
}

impl KernelVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            KernelVerdict::EmptyByLemma => "EMPTY_BY_LEMMA",
            KernelVerdict::Unknown => "UNKNOWN",
        }
    }
}

/// The kernel Julia set is empty when the system is irreducible, essentially
/// non-deterministic and backward separating. Never claims non-emptiness.
pub fn check_kernel_empty<T: Scalar>(s: &System<T>, separation: &Separation<T>) -> KernelVerdict {
    let separated = matches!(separation, Separation::Separated { .. });
    if s.is_irreducible() && s.is_essentially_nondeterministic() && separated {
        KernelVerdict::EmptyByLemma
    } else {
        KernelVerdict::Unknown
    }
}

/// Marks pixels whose value differs from some 8-neighbour by more than
/// `threshold`.
pub fn nonconstancy_mask<T: Scalar>(field: &GridField<T>, threshold: T) -> GridField<T> {
    let (nx, ny) = (field.raster.nx, field.raster.ny);
    let values = (0..nx * ny)
        .into_par_iter()
        .map(|idx| {
            let (r, c) = ((idx / nx) as isize, (idx % nx) as isize);
            let v = field.values[idx];
            let mut jump = T::zero();
            for dr in -1..=1 {
                for dc in -1..=1 {
                    let (rr, cc) = (r + dr, c + dc);
                    if rr >= 0 && cc >= 0 && (rr as usize) < ny && (cc as usize) < nx {
                        jump = jump.max((field.values[rr as usize * nx + cc as usize] - v).abs());
                    }
                }
            }
            if jump > threshold {
                T::one()
            } else {
                T::zero()
            }
        })
        .collect();
    GridField { raster: field.raster, vertex: field.vertex, values }
}

/// Largest symmetric Hausdorff-type distance, over vertices `i`, between
/// `cloud_i` and the union of `f^{-1}(cloud_{t(e)})` over choices leaving `i`.
pub fn self_similarity_defect<T: Scalar>(s: &System<T>, clouds: &[PointCloud<T>]) -> Result<T> {
    let mut defect = T::zero();
    for v in 0..s.vertex_count() {
        let mut union = Vec::new();
        for c in s.outgoing(v) {
            union.extend(preimage_cloud(s, c, &clouds[c.to].points)?);
        }
        let own = &clouds[v].points;
        let forward = PointIndex::new(&union).directed_hausdorff(own);
        let backward = PointIndex::new(own).directed_hausdorff(&union);
        defect = defect.max(forward).max(backward);
    }
    Ok(defect)
}
