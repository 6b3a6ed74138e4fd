//! Random backward orbits approximating the per-vertex Julia sets.

use std::collections::HashSet;
use std::io::{self, Write};

use num_complex::Complex;
use rayon::prelude::*;

use crate::julia::roots::roots;
use crate::model::{Choice, System};
use crate::rng::{self, StreamRng};
use crate::{Error, Result, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud<T> {
    pub vertex: usize,
    pub points: Vec<Complex<T>>,
    /// Number of backward steps from the chain seed to each point.
    pub gens: Vec<u32>,
}

impl<T: Scalar> PointCloud<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `re,im,vertex,gen` rows; the vertex is written one-based.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "re,im,vertex,gen")?;
        for (p, g) in self.points.iter().zip(&self.gens) {
            writeln!(out, "{},{},{},{}", p.re.as_f64(), p.im.as_f64(), self.vertex + 1, g)?;
        }
        Ok(())
    }

    /// Counts distinct points up to `tol`, stopping at `cap`.
    pub fn distinct_up_to(&self, tol: T, cap: usize) -> usize {
        let mut reps: Vec<Complex<T>> = Vec::new();
        for &p in &self.points {
            if reps.iter().all(|r| (r - p).norm() > tol) {
                reps.push(p);
                if reps.len() >= cap {
                    break;
                }
            }
        }
        reps.len()
    }
}

/// How the backward orbit of the seed is sampled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sampler {
    /// One random preimage per step (uniform root, weighted incoming choice).
    RandomChain,
    /// Breadth-first over every preimage, keeping a preimage only if its
    /// `(vertex, cell)` with cells of side `pitch` has not been visited yet.
    /// Without a pitch, the finest power-of-two-bisected pitch whose cloud
    /// fits in `n_points` is searched for.
    PixelTree { pitch: Option<f64> },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CloudParams<T> {
    pub n_points: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Independent chains; chain `k` uses RNG stream `k`. The output is the
    /// concatenation of the chains in stream order.
    pub chains: usize,
    /// Fixed starting point for every chain; drawn from the unit disk when
    /// absent.
    pub start: Option<Complex<T>>,
    pub sampler: Sampler,
}

impl<T: Scalar> CloudParams<T> {
    pub const DEFAULT_BURN_IN: usize = 50;
    pub const DEFAULT_CHAINS: usize = 16;

    pub fn new(n_points: usize, seed: u64) -> Self {
        CloudParams {
            n_points,
            burn_in: Self::DEFAULT_BURN_IN,
            seed,
            chains: Self::DEFAULT_CHAINS,
            start: None,
            sampler: Sampler::RandomChain,
        }
    }

    pub fn with_sampler(mut self, sampler: Sampler) -> Self {
        self.sampler = sampler;
        self
    }

    pub fn with_start(mut self, z: Complex<T>) -> Self {
        self.start = Some(z);
        self
    }
}

/// Draws an incoming `(edge, atom)` of `vertex` with probability proportional
/// to its weight.
fn draw_incoming<T: Scalar>(s: &System<T>, vertex: usize, rng: &mut StreamRng) -> Result<Choice<T>> {
    let choices = s.incoming(vertex);
    let last = *choices.last().ok_or(Error::DeadEnd { vertex: vertex + 1 })?;
    let total: f64 = choices.iter().map(|c| c.weight.as_f64()).sum();
    let u = rng::unit(rng) * total;
    let mut acc = 0.0;
    for c in choices {
        acc += c.weight.as_f64();
        if u < acc {
            return Ok(*c);
        }
    }
    Ok(last)
}

fn preimage_roots<T: Scalar>(s: &System<T>, c: &Choice<T>, z: Complex<T>) -> Result<Vec<Complex<T>>> {
    roots(s.map(c), z).into_result()
}

/// Number of distinct points (up to `1e-8` relative) after `levels` rounds
/// of taking every preimage under every incoming choice, capped at `cap`.
pub fn backward_spread<T: Scalar>(s: &System<T>, z: Complex<T>, vertex: usize, levels: usize, cap: usize) -> usize {
    let mut level = vec![(z, vertex)];
    for _ in 0..levels {
        let mut next: Vec<(Complex<T>, usize)> = Vec::new();
        for &(w, v) in &level {
            for c in s.incoming(v) {
                let Ok(pre) = preimage_roots(s, c, w) else { continue };
                for u in pre {
                    let tol = T::lit(1e-8) * (T::one() + u.norm());
                    if !next.iter().any(|&(x, j)| j == c.from && (x - u).norm() <= tol) {
                        next.push((u, c.from));
                    }
                }
                if next.len() >= cap {
                    return next.len();
                }
            }
        }
        level = next;
    }
    level.len()
}

/// Number of redraws allowed for a chain seed before giving up.
const SEED_ATTEMPTS: usize = 64;

fn draw_seed<T: Scalar>(s: &System<T>, vertex: usize, rng: &mut StreamRng) -> Result<Complex<T>> {
    for _ in 0..SEED_ATTEMPTS {
        let r = rng::unit(rng).sqrt();
        let theta = rng::unit(rng) * std::f64::consts::TAU;
        let z = Complex::new(T::lit(r * theta.cos()), T::lit(r * theta.sin()));
        if backward_spread(s, z, vertex, 3, 3) >= 3 {
            return Ok(z);
        }
    }
    Err(Error::NoConvergence("no non-exceptional seed found".into()))
}

fn run_chain<T: Scalar>(
    s: &System<T>,
    target: usize,
    quota: usize,
    params: &CloudParams<T>,
    stream_id: u64,
) -> Result<(Vec<Complex<T>>, Vec<u32>)> {
    let mut rng = rng::stream(params.seed, stream_id);
    let mut z = match params.start {
        Some(z) => z,
        None => draw_seed(s, target, &mut rng)?,
    };
    let mut v = target;
    let mut points = Vec::with_capacity(quota);
    let mut gens = Vec::with_capacity(quota);
    let max_steps = params.burn_in + 1000 * quota.max(1);
    let mut step = 0usize;
    while points.len() < quota {
        if step >= max_steps {
            return Err(Error::NoConvergence(format!("backward chain rarely visits vertex {}", target + 1)));
        }
        let c = draw_incoming(s, v, &mut rng)?;
        let pre = preimage_roots(s, &c, z)?;
        let k = ((rng::unit(&mut rng) * pre.len() as f64) as usize).min(pre.len() - 1);
        z = pre[k];
        v = c.from;
        step += 1;
        if step > params.burn_in && v == target {
            points.push(z);
            gens.push(step as u32);
        }
    }
    Ok((points, gens))
}

/// Backward orbit cloud approximating the Julia set at `target`.
///
/// With [`Sampler::RandomChain`]: from `(z, j)` pick an incoming
/// `(edge, atom)` with probability proportional to its weight, move to a
/// uniformly chosen root of `f(w) = z` and to the source vertex of the edge.
/// After `burn_in` steps the points visited at `target` are collected.
pub fn backward_orbit_cloud<T: Scalar>(s: &System<T>, target: usize, params: CloudParams<T>) -> Result<PointCloud<T>> {
    assert!(params.n_points >= 1 && params.chains >= 1, "empty cloud requested");
    if let Some(v) = (0..s.vertex_count()).find(|&v| s.incoming(v).is_empty()) {
        return Err(Error::DeadEnd { vertex: v + 1 });
    }
    match params.sampler {
        Sampler::RandomChain => random_chain_cloud(s, target, &params),
        Sampler::PixelTree { pitch: Some(h) } => {
            let root = tree_root(s, target, &params)?;
            Ok(pixel_tree(s, target, root, h, params.n_points)?.0)
        }
        Sampler::PixelTree { pitch: None } => sized_pixel_tree(s, target, &params),
    }
}

fn random_chain_cloud<T: Scalar>(s: &System<T>, target: usize, params: &CloudParams<T>) -> Result<PointCloud<T>> {
    let chains = params.chains.min(params.n_points);
    let base = params.n_points / chains;
    let extra = params.n_points % chains;
    let parts = (0..chains)
        .into_par_iter()
        .map(|k| run_chain(s, target, base + usize::from(k < extra), params, k as u64))
        .collect::<Result<Vec<_>>>()?;
    let mut cloud = PointCloud { vertex: target, points: Vec::with_capacity(params.n_points), gens: Vec::new() };
    for (p, g) in parts {
        cloud.points.extend(p);
        cloud.gens.extend(g);
    }
    Ok(cloud)
}

/// Seed of the breadth-first sampler: the start point (or a non-exceptional
/// random point) pushed `burn_in` random steps backwards.
fn tree_root<T: Scalar>(s: &System<T>, target: usize, params: &CloudParams<T>) -> Result<(Complex<T>, usize, u32)> {
    let mut rng = rng::stream(params.seed, 0);
    let mut z = match params.start {
        Some(z) => z,
        None => draw_seed(s, target, &mut rng)?,
    };
    let mut v = target;
    for _ in 0..params.burn_in {
        let c = draw_incoming(s, v, &mut rng)?;
        let pre = preimage_roots(s, &c, z)?;
        z = pre[((rng::unit(&mut rng) * pre.len() as f64) as usize).min(pre.len() - 1)];
        v = c.from;
    }
    Ok((z, v, params.burn_in as u32))
}

type CellKey = (i64, i64, usize);

fn cell<T: Scalar>(z: Complex<T>, vertex: usize, pitch: f64) -> CellKey {
    ((z.re.as_f64() / pitch).floor() as i64, (z.im.as_f64() / pitch).floor() as i64, vertex)
}

/// Breadth-first backward tree from `root` with one kept point per
/// `(vertex, cell)`. Returns the cloud and whether the tree was exhausted
/// before `cap` points were collected.
fn pixel_tree<T: Scalar>(
    s: &System<T>,
    target: usize,
    root: (Complex<T>, usize, u32),
    pitch: f64,
    cap: usize,
) -> Result<(PointCloud<T>, bool)> {
    let (z0, v0, g0) = root;
    let mut cloud = PointCloud { vertex: target, points: Vec::new(), gens: Vec::new() };
    let mut visited: HashSet<CellKey> = HashSet::new();
    visited.insert(cell(z0, v0, pitch));
    if v0 == target {
        cloud.points.push(z0);
        cloud.gens.push(g0);
    }
    let mut level = vec![(z0, v0)];
    let mut gen = g0;
    while !level.is_empty() {
        if cloud.len() >= cap {
            return Ok((cloud, false));
        }
        gen += 1;
        let children = level
            .par_iter()
            .map(|&(z, v)| {
                let mut out = Vec::new();
                for c in s.incoming(v) {
                    out.extend(preimage_roots(s, c, z)?.into_iter().map(|w| (w, c.from)));
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut next = Vec::new();
        for (w, u) in children.into_iter().flatten() {
            if visited.insert(cell(w, u, pitch)) {
                if u == target {
                    if cloud.len() >= cap {
                        return Ok((cloud, false));
                    }
                    cloud.points.push(w);
                    cloud.gens.push(gen);
                }
                next.push((w, u));
            }
        }
        level = next;
    }
    Ok((cloud, true))
}

/// Pixel tree at the finest pitch (bisected in log scale) whose cloud still
/// fits in `n_points`.
fn sized_pixel_tree<T: Scalar>(s: &System<T>, target: usize, params: &CloudParams<T>) -> Result<PointCloud<T>> {
    let root = tree_root(s, target, params)?;
    let mut coarse = 0.25;
    let mut best = loop {
        let (cloud, exhausted) = pixel_tree(s, target, root, coarse, params.n_points)?;
        if exhausted {
            break cloud;
        }
        coarse *= 4.0;
        if coarse > 1e6 {
            return Err(Error::NoConvergence("pixel tree does not fit the point budget".into()));
        }
    };
    let mut fine = coarse / 2.0;
    loop {
        let (cloud, exhausted) = pixel_tree(s, target, root, fine, params.n_points)?;
        if !exhausted {
            break;
        }
        best = cloud;
        coarse = fine;
        fine /= 2.0;
        if fine < 1e-9 {
            return Ok(best);
        }
    }
    for _ in 0..5 {
        let mid = (coarse * fine).sqrt();
        let (cloud, exhausted) = pixel_tree(s, target, root, mid, params.n_points)?;
        if exhausted {
            best = cloud;
            coarse = mid;
        } else {
            fine = mid;
        }
    }
    Ok(best)
}

/// Clouds for every vertex, vertex `i` using seed `seed + i`.
pub fn clouds_for_all<T: Scalar>(s: &System<T>, params: CloudParams<T>) -> Result<Vec<PointCloud<T>>> {
    (0..s.vertex_count())
        .map(|i| backward_orbit_cloud(s, i, CloudParams { seed: params.seed.wrapping_add(i as u64), ..params }))
        .collect()
}

/// Every root of `f(w) = z` for every `z` of the cloud, in cloud order.
pub fn preimage_cloud<T: Scalar>(s: &System<T>, c: &Choice<T>, cloud: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    let parts = cloud.par_iter().map(|&z| preimage_roots(s, c, z)).collect::<Result<Vec<_>>>()?;
    Ok(parts.into_iter().flatten().collect())
}
