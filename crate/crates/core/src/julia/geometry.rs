//! Nearest-neighbour queries on point clouds and pixel-mask distances.

use std::marker::PhantomData;

use kiddo::immutable::float::kdtree::ImmutableKdTree;
use kiddo::SquaredEuclidean;
use num_complex::Complex;

use crate::{FieldVertex, GridField, Raster, Scalar};

/// Static k-d tree over a point set for nearest-distance queries.
pub struct PointIndex<T> {
    tree: ImmutableKdTree<f64, u32, 2, 32>,
    len: usize,
    _scalar: PhantomData<T>,
}

impl<T: Scalar> PointIndex<T> {
    pub fn new(points: &[Complex<T>]) -> Self {
        assert!(!points.is_empty(), "empty point set");
        let mut coords: Vec<[f64; 2]> = points.iter().map(|p| [p.re.as_f64(), p.im.as_f64()]).collect();
        // exact duplicates add nothing to distance queries
        coords.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        coords.dedup();
        PointIndex { tree: ImmutableKdTree::new_from_slice(&coords), len: coords.len(), _scalar: PhantomData }
    }

    /// Number of distinct indexed points.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Distance from `z` to the closest indexed point.
    pub fn nearest_distance(&self, z: Complex<T>) -> T {
        let hit = self.tree.nearest_one::<SquaredEuclidean>(&[z.re.as_f64(), z.im.as_f64()]);
        T::lit(hit.distance.sqrt())
    }

    /// `max_{a ∈ from} dist(a, self)`.
    pub fn directed_hausdorff(&self, from: &[Complex<T>]) -> T {
        use rayon::prelude::*;
        T::lit(from.par_iter().map(|&a| self.nearest_distance(a).as_f64()).reduce(|| 0.0, f64::max))
    }

    /// `min_{a ∈ from} dist(a, self)`.
    pub fn min_distance(&self, from: &[Complex<T>]) -> T {
        use rayon::prelude::*;
        T::lit(from.par_iter().map(|&a| self.nearest_distance(a).as_f64()).reduce(|| f64::INFINITY, f64::min))
    }
}

/// Binary mask with 1 on every pixel that contains at least one point.
pub fn rasterize<T: Scalar>(points: &[Complex<T>], raster: Raster<T>, vertex: FieldVertex) -> GridField<T> {
    let mut field = GridField::filled(raster, vertex, T::zero());
    for &p in points {
        if let Some((col, row)) = raster.pixel_of(p) {
            field.values[row * raster.nx + col] = T::one();
        }
    }
    field
}

/// Chessboard distance (in pixels) from each pixel to the nearest marked
/// pixel of `mask`; `u32::MAX` when the mask is empty.
pub fn chebyshev_distance<T: Scalar>(mask: &GridField<T>) -> Vec<u32> {
    let (nx, ny) = (mask.raster.nx, mask.raster.ny);
    let inf = u32::MAX / 2;
    let mut d: Vec<u32> = mask.values.iter().map(|&v| if v > T::zero() { 0 } else { inf }).collect();
    for r in 0..ny {
        for c in 0..nx {
            let mut best = d[r * nx + c];
            if c > 0 {
                best = best.min(d[r * nx + c - 1] + 1);
            }
            if r > 0 {
                for cc in c.saturating_sub(1)..=(c + 1).min(nx - 1) {
                    best = best.min(d[(r - 1) * nx + cc] + 1);
                }
            }
            d[r * nx + c] = best;
        }
    }
    for r in (0..ny).rev() {
        for c in (0..nx).rev() {
            let mut best = d[r * nx + c];
            if c + 1 < nx {
                best = best.min(d[r * nx + c + 1] + 1);
            }
            if r + 1 < ny {
                for cc in c.saturating_sub(1)..=(c + 1).min(nx - 1) {
                    best = best.min(d[(r + 1) * nx + cc] + 1);
                }
            }
            d[r * nx + c] = best;
        }
    }
    if d.iter().all(|&v| v >= inf) {
        return vec![u32::MAX; d.len()];
    }
    d
}

/// Fraction of marked pixels of `a` lying within `pixels` (chessboard) of a
/// marked pixel of `b`. One when `a` is empty.
pub fn fraction_within<T: Scalar>(a: &GridField<T>, b: &GridField<T>, pixels: u32) -> f64 {
    let dist = chebyshev_distance(b);
    let (mut marked, mut near) = (0usize, 0usize);
    for (v, d) in a.values.iter().zip(&dist) {
        if *v > T::zero() {
            marked += 1;
            if *d <= pixels {
                near += 1;
            }
        }
    }
    if marked == 0 {
        1.0
    } else {
        near as f64 / marked as f64
    }
}

/// Does the mask contain a fully marked `k × k` block?
pub fn has_full_block<T: Scalar>(mask: &GridField<T>, k: usize) -> bool {
    let (nx, ny) = (mask.raster.nx, mask.raster.ny);
    if k == 0 || k > nx || k > ny {
        return false;
    }
    // run lengths of marked pixels ending at each column, per row
    let mut run = vec![0usize; nx * ny];
    for r in 0..ny {
        for c in 0..nx {
            if mask.values[r * nx + c] > T::zero() {
                run[r * nx + c] = if c > 0 { run[r * nx + c - 1] + 1 } else { 1 };
            }
        }
    }
    for c in (k - 1)..nx {
        let mut stacked = 0;
        for r in 0..ny {
            stacked = if run[r * nx + c] >= k { stacked + 1 } else { 0 };
            if stacked >= k {
                return true;
            }
        }
    }
    false
}
