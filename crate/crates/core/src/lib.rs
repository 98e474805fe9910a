//! Stochastic steepest descent for consistent linear systems `Ax = b`.
//!
//! The framework covers sketch-and-project style methods: each iteration
//! picks one sketch `S_i` from a finite family, measures the sketched loss
//! `f_i(x) = ½‖Ax - b‖²_{H_i}` and takes an exact line-search step along its
//! gradient in the `G` metric, optionally with heavy-ball momentum. Row
//! sketches give Kaczmarz, column sketches give coordinate descent and the
//! single full sketch gives steepest descent.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix the scalar for the common cases.

// `!(x > 0)` forms also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod problem;
pub mod rng;
pub mod sampling;
pub mod scalar;
pub mod sketch;
pub mod solver;
pub mod theory;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix = linalg::DenseMatrix<f64>;
pub type Matrix32 = linalg::DenseMatrix<f32>;
pub type System = problem::LinearSystem<f64>;
pub type System32 = problem::LinearSystem<f32>;
pub type Family<'a> = sketch::SketchFamily<'a, f64>;
pub type Family32<'a> = sketch::SketchFamily<'a, f32>;
