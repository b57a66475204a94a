//! Loss-landscape analysis of two-layer linear networks.
//!
//! The training loss `0.5 * ||W2*W1*X - Y||_F^2` of a linear network with one
//! hidden layer is nonconvex, but its geometry is benign once the input `X`
//! has full row rank: every critical point is either a global minimum or a
//! strict saddle, and adding the balance regularizer
//! `(mu/4) * ||W2'W2 - W1*X*X'*W1'||_F^2` makes the whole critical set
//! available in closed form through the SVD of `Y*V` (with `X = U*S*V'`).
//!
//! This crate turns those structural facts into executable, testable
//! constructions:
//!
//! - [`linalg`]: dense matrices, reduced SVD, symmetric eigendecomposition,
//!   seeded orthonormal sampling;
//! - [`model`]: the objectives, their gradients, the Hessian quadratic form,
//!   dense Hessian assembly, and finite-difference oracles;
//! - [`landscape`]: enumeration of the critical set, global-minimum /
//!   strict-saddle classification with explicit escape directions and
//!   curvature bounds, and the balanced lift that extends the analysis to
//!   the unregularized loss;
//! - [`optimize`]: plain, noisy, and perturbed gradient descent, instrumented
//!   against the closed-form optimum;
//! - [`datagen`] and [`fixture`]: reproducible problem instances and a
//!   plain-text matrix format.
//!
//! All numerics are generic over the scalar type through [`Scalar`]
//! (`f32` or `f64`); concrete aliases for the common types live at the crate
//! root. Everything is pure and deterministic: random quantities take an
//! explicit seed, and values are immutable once built.

pub mod datagen;
pub mod fixture;
pub mod landscape;
pub mod linalg;
pub mod model;
pub mod optimize;
mod scalar;
pub mod tol;

pub use scalar::Scalar;

/// Dense matrix over `f64`, the default precision.
pub type Matrix64 = linalg::Matrix<f64>;
/// Dense matrix over `f32`.
pub type Matrix32 = linalg::Matrix<f32>;
/// Training instance over `f64`.
pub type Dataset64 = model::Dataset<f64>;
/// Factor pair (network weights) over `f64`.
pub type FactorPair64 = model::FactorPair<f64>;
/// Perturbation direction over `f64`.
pub type Direction64 = model::Direction<f64>;
