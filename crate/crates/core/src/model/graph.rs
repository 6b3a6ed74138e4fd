//! Graph and matrix analysis of the transition structure.

use std::collections::VecDeque;

use crate::{Error, Result, Scalar};

fn reachable_from(adj: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Single strongly connected component covering every vertex: vertex 0
/// reaches everything in the graph and in its reverse.
pub fn strongly_connected(adj: &[Vec<usize>]) -> bool {
    if adj.is_empty() {
        return false;
    }
    let mut rev = vec![Vec::new(); adj.len()];
    for (v, ws) in adj.iter().enumerate() {
        for &w in ws {
            rev[w].push(v);
        }
    }
    reachable_from(adj, 0).into_iter().all(|b| b) && reachable_from(&rev, 0).into_iter().all(|b| b)
}

/// `max_i |(pP)_i - p_i|`.
pub fn stationary_residual<T: Scalar>(p: &[T], transition: &[Vec<T>]) -> T {
    let m = p.len();
    (0..m)
        .map(|j| {
            let s = (0..m).fold(T::zero(), |s, i| s + p[i] * transition[i][j]);
            (s - p[j]).abs()
        })
        .fold(T::zero(), T::max)
}

const DIRECT_SOLVE_MAX: usize = 16;

/// Stationary vector of an irreducible row-stochastic matrix.
///
/// Small chains use a dense solve of `(Pᵀ - I) p = 0` with the last equation
/// replaced by `Σp = 1`; larger ones run power iteration on the lazy chain
/// `(I + P)/2`, which shares the stationary vector and is aperiodic.
pub fn stationary_vector<T: Scalar>(transition: &[Vec<T>]) -> Result<Vec<T>> {
    let m = transition.len();
    let tol = T::stochastic_tol();
    let mut p = if m <= DIRECT_SOLVE_MAX { direct(transition)? } else { lazy_power(transition, tol)? };

    // one refinement pass through the chain itself
    for _ in 0..2 {
        if stationary_residual(&p, transition) <= tol {
            break;
        }
        let next: Vec<T> = (0..m).map(|j| (0..m).fold(T::zero(), |s, i| s + p[i] * transition[i][j])).collect();
        let total = next.iter().fold(T::zero(), |s, &x| s + x);
        p = next.into_iter().map(|x| x / total).collect();
    }

    let residual = stationary_residual(&p, transition);
    if residual > tol || p.iter().any(|&x| !(x > T::zero())) {
        return Err(Error::NoConvergence(format!("stationary vector residual {}", residual.as_f64())));
    }
    Ok(p)
}

fn direct<T: Scalar>(transition: &[Vec<T>]) -> Result<Vec<T>> {
    let m = transition.len();
    // augmented matrix [A | b]
    let mut a: Vec<Vec<T>> = (0..m)
        .map(|r| {
            let mut row: Vec<T> = (0..m)
                .map(|c| {
                    let v = transition[c][r];
                    if r == c {
                        v - T::one()
                    } else {
                        v
                    }
                })
                .collect();
            row.push(T::zero());
            row
        })
        .collect();
    a[m - 1] = vec![T::one(); m + 1];

    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).expect("finite"))
            .expect("non-empty");
        if a[pivot][col].abs() <= T::epsilon() {
            return Err(Error::NoConvergence("singular stationary system".into()));
        }
        a.swap(col, pivot);
        for r in 0..m {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != T::zero() {
                    for c in col..=m {
                        let v = a[col][c];
                        a[r][c] = a[r][c] - f * v;
                    }
                }
            }
        }
    }
    Ok((0..m).map(|r| a[r][m] / a[r][r]).collect())
}

fn lazy_power<T: Scalar>(transition: &[Vec<T>], tol: T) -> Result<Vec<T>> {
    let m = transition.len();
    let half = T::lit(0.5);
    let mut p = vec![T::one() / T::lit(m as f64); m];
    for _ in 0..1_000_000 {
        let next: Vec<T> = (0..m)
            .map(|j| half * p[j] + half * (0..m).fold(T::zero(), |s, i| s + p[i] * transition[i][j]))
            .collect();
        let delta = next.iter().zip(&p).fold(T::zero(), |d, (a, b)| d.max((*a - *b).abs()));
        p = next;
        if delta <= tol * T::lit(0.01) {
            return Ok(p);
        }
    }
    Err(Error::NoConvergence("power iteration budget exhausted".into()))
}
