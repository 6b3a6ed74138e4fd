//! Markov random dynamical systems of polynomials on the Riemann sphere.
//!
//! A system is a finite directed graph whose edges carry finitely supported
//! distributions over polynomial maps of degree two or more. The crate builds
//! such systems from config text, checks their structural conditions,
//! computes the probability that a random orbit tends to infinity (per vertex
//! and stationary-weighted), and renders per-vertex Julia sets, filled-in
//! sets and random Julia sets along sampled map sequences.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! and `*32` aliases below fix the scalar.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod examples;
pub mod grid;
pub mod julia;
pub mod model;
pub mod rng;
pub mod sampler;
mod scalar;
pub mod tinf;

pub use error::{Error, Result};
pub use grid::{FieldVertex, GridField, Raster, Window};
pub use model::{parse_system, serialize_system, Polynomial, SpherePoint, System};
pub use scalar::Scalar;

pub type Complex64 = num_complex::Complex<f64>;
pub type Complex32 = num_complex::Complex<f32>;

pub type System64 = System<f64>;
pub type System32 = System<f32>;
pub type Polynomial64 = Polynomial<f64>;
pub type Polynomial32 = Polynomial<f32>;
pub type SpherePoint64 = SpherePoint<f64>;
pub type SpherePoint32 = SpherePoint<f32>;
pub type GridField64 = GridField<f64>;
pub type GridField32 = GridField<f32>;
pub type Window64 = Window<f64>;
pub type Window32 = Window<f32>;
pub type Raster64 = Raster<f64>;
pub type PointCloud64 = julia::PointCloud<f64>;
pub type PointCloud32 = julia::PointCloud<f32>;
