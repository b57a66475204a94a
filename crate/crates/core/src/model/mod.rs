//! Objectives, gradients, and curvature of the two-layer linear model.
//!
//! The model maps `x -> W2 * W1 * x`. Given training data `(X, Y)` this
//! module evaluates:
//!
//! - the fit loss `f = 0.5 * ||W2*W1*X - Y||_F^2`;
//! - the balance penalty `rho = ||W2'W2 - W1*X*X'*W1'||_F^2`, zero exactly
//!   when the two layers carry balanced energy relative to the input Gram;
//! - the regularized loss `g = f + (mu/4) * rho`, whose critical set is
//!   fully enumerable (see [`crate::landscape`]);
//! - the variant `h` that uses the unweighted penalty
//!   `||W2'W2 - W1*W1'||_F^2` (evaluation only);
//! - the gradient of `g` (`mu = 0` gives the gradient of `f`), the Hessian
//!   quadratic form, dense Hessian assembly by polarization, and
//!   finite-difference oracles for both.
//!
//! All functions are pure; [`Dataset`] caches its factorizations at
//! construction and is immutable afterwards.

mod fdcheck;
mod hessian;
mod objective;

pub use fdcheck::{fd_grad_error, fd_quadform_error, FD_GRAD_STEP, FD_QUADFORM_STEP};
pub use hessian::{assemble_hessian, flatten_direction, hessian_quadform, unflatten_direction, MAX_HESSIAN_DIM};
pub use objective::{
    balance_gap, balance_penalty, fit_loss, grad, plain_regularized_loss, regularized_loss,
    residual,
};

use thiserror::Error;

use crate::linalg::{reduced_svd, LinalgError, Matrix, SvdTriple};
use crate::{tol, Scalar};

/// Errors from model construction and evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("regularization weight must be nonnegative, got {0}")]
    NegativeMu(f64),
    #[error("dense Hessian dimension {n} exceeds limit {max}")]
    TooLarge { n: usize, max: usize },
    #[error("need at least as many samples as input dimensions ({samples} < {input_dim})")]
    TooFewSamples { samples: usize, input_dim: usize },
    #[error("input matrix X is rank deficient (rank {rank} < {input_dim} rows)")]
    RankDeficientX { rank: usize, input_dim: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A training instance `(X, Y)` with its cached factorizations.
///
/// `X` is `input_dim x samples` and must have full row rank — the one
/// structural assumption the whole analysis rests on. `Y` is
/// `output_dim x samples`. Construction computes and caches:
///
/// - the reduced SVD `X = U * S * V'` (square orthogonal `U` by the rank
///   assumption);
/// - the projected output `Y*V` and its reduced SVD `P * L * Q'`, whose
///   singular pairs generate every critical point of the regularized loss;
/// - the input Gram `X*X'` and the maps `U*S`, `S^-1*U'` used by the
///   closed-form constructions.
#[derive(Debug, Clone)]
pub struct Dataset<T> {
    x: Matrix<T>,
    y: Matrix<T>,
    svd_x: SvdTriple<T>,
    xxt: Matrix<T>,
    u_sigma: Matrix<T>,
    sigma_inv_ut: Matrix<T>,
    projected_y: Matrix<T>,
    svd_projected_y: Option<SvdTriple<T>>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(x: Matrix<T>, y: Matrix<T>) -> Result<Self, ModelError> {
        let (input_dim, samples) = x.shape();
        if y.cols() != samples {
            return Err(ModelError::ShapeMismatch(format!(
                "X has {} samples but Y has {}",
                samples,
                y.cols()
            )));
        }
        if samples < input_dim {
            return Err(ModelError::TooFewSamples { samples, input_dim });
        }
        let svd_x = reduced_svd(&x)?;
        if svd_x.rank() < input_dim {
            return Err(ModelError::RankDeficientX { rank: svd_x.rank(), input_dim });
        }

        let xxt = x.gram_left();
        let mut u_sigma = svd_x.u.clone();
        for j in 0..input_dim {
            for i in 0..input_dim {
                u_sigma[(i, j)] = u_sigma[(i, j)] * svd_x.s[j];
            }
        }
        let mut sigma_inv_ut = svd_x.u.transpose();
        for i in 0..input_dim {
            for j in 0..input_dim {
                sigma_inv_ut[(i, j)] = sigma_inv_ut[(i, j)] / svd_x.s[i];
            }
        }

        let projected_y = &y * &svd_x.v;
        // A zero (or fully orthogonal) output leaves no singular pairs; the
        // critical set is then just the origin orbit.
        let svd_projected_y = match reduced_svd(&projected_y) {
            Ok(t) => Some(t),
            Err(LinalgError::ZeroMatrix) => None,
            Err(e) => return Err(e.into()),
        };

        Ok(Self { x, y, svd_x, xxt, u_sigma, sigma_inv_ut, projected_y, svd_projected_y })
    }

    pub fn input_dim(&self) -> usize {
        self.x.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.y.rows()
    }

    pub fn samples(&self) -> usize {
        self.x.cols()
    }

    pub fn x(&self) -> &Matrix<T> {
        &self.x
    }

    pub fn y(&self) -> &Matrix<T> {
        &self.y
    }

    /// Reduced SVD of `X` (square orthogonal `U`).
    pub fn svd_x(&self) -> &SvdTriple<T> {
        &self.svd_x
    }

    /// Cached input Gram `X * X'`.
    pub fn xxt(&self) -> &Matrix<T> {
        &self.xxt
    }

    /// `U * S`: maps right-singular coordinates back to input space.
    pub fn u_sigma(&self) -> &Matrix<T> {
        &self.u_sigma
    }

    /// `S^-1 * U'`: whitens the input covariance.
    pub fn sigma_inv_ut(&self) -> &Matrix<T> {
        &self.sigma_inv_ut
    }

    /// The projected output `Y * V`.
    pub fn projected_y(&self) -> &Matrix<T> {
        &self.projected_y
    }

    /// Singular values of `Y * V`, descending (empty when `Y*V = 0`).
    pub fn lambda(&self) -> &[T] {
        self.svd_projected_y.as_ref().map_or(&[], |t| &t.s)
    }

    /// Rank of `Y * V`.
    pub fn rank_projected_y(&self) -> usize {
        self.lambda().len()
    }

    /// Left singular vector `p_j` of `Y * V` (length `output_dim`).
    pub fn left_pair(&self, j: usize) -> Vec<T> {
        self.svd_projected_y.as_ref().expect("singular pair index in range").u.column(j)
    }

    /// Right singular vector `q_j` of `Y * V` (length `input_dim`).
    pub fn right_pair(&self, j: usize) -> Vec<T> {
        self.svd_projected_y.as_ref().expect("singular pair index in range").v.column(j)
    }

    /// `1 + sum_i sigma_i^-2` over the singular values of `X`: the
    /// normalization constant in the saddle curvature bounds.
    pub fn curvature_denominator(&self) -> T {
        T::one() + self.svd_x.s.iter().map(|&s| T::one() / (s * s)).sum::<T>()
    }

    /// `1 + ||Y||_F * ||X||_F`, the scale all gradient-norm tolerances are
    /// measured against.
    pub fn grad_scale(&self) -> T {
        T::one() + self.y.norm() * self.x.norm()
    }

    /// Default gradient-norm threshold below which a point counts as
    /// critical for classification purposes.
    pub fn critical_tol(&self) -> T {
        tol::scaled::<T>(1e-8) * self.grad_scale()
    }
}

/// The optimization variable: the two weight matrices, conceptually stacked
/// as `[W2; W1']`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair<T> {
    /// Second-layer weights, `output_dim x hidden_dim`.
    pub w2: Matrix<T>,
    /// First-layer weights, `hidden_dim x input_dim`.
    pub w1: Matrix<T>,
}

impl<T: Scalar> FactorPair<T> {
    pub fn new(w2: Matrix<T>, w1: Matrix<T>) -> Result<Self, ModelError> {
        if w2.cols() != w1.rows() {
            return Err(ModelError::ShapeMismatch(format!(
                "W2 is {}x{} but W1 is {}x{}",
                w2.rows(),
                w2.cols(),
                w1.rows(),
                w1.cols()
            )));
        }
        Ok(Self { w2, w1 })
    }

    pub fn zeros(output_dim: usize, hidden_dim: usize, input_dim: usize) -> Self {
        Self { w2: Matrix::zeros(output_dim, hidden_dim), w1: Matrix::zeros(hidden_dim, input_dim) }
    }

    pub fn hidden_dim(&self) -> usize {
        self.w2.cols()
    }

    /// The end-to-end linear map `W2 * W1`.
    pub fn product(&self) -> Matrix<T> {
        &self.w2 * &self.w1
    }

    pub fn norm_sq(&self) -> T {
        self.w2.norm_sq() + self.w1.norm_sq()
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    /// Shape consistency against a dataset.
    pub fn check_shapes(&self, data: &Dataset<T>) -> Result<(), ModelError> {
        if self.w2.rows() != data.output_dim() || self.w1.cols() != data.input_dim() {
            return Err(ModelError::ShapeMismatch(format!(
                "factors map {} -> {} but data is {} -> {}",
                self.w1.cols(),
                self.w2.rows(),
                data.input_dim(),
                data.output_dim()
            )));
        }
        Ok(())
    }
}

/// A perturbation of a [`FactorPair`], block-aligned with `(W2, W1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction<T> {
    pub dw2: Matrix<T>,
    pub dw1: Matrix<T>,
}

impl<T: Scalar> Direction<T> {
    pub fn zeros_like(z: &FactorPair<T>) -> Self {
        Self {
            dw2: Matrix::zeros(z.w2.rows(), z.w2.cols()),
            dw1: Matrix::zeros(z.w1.rows(), z.w1.cols()),
        }
    }

    /// Squared stacked norm `||dw2||_F^2 + ||dw1||_F^2`.
    pub fn norm_sq(&self) -> T {
        self.dw2.norm_sq() + self.dw1.norm_sq()
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Self { dw2: self.dw2.scale(s), dw1: self.dw1.scale(s) }
    }

    /// `z + t * self`.
    pub fn step_from(&self, z: &FactorPair<T>, t: T) -> FactorPair<T> {
        FactorPair {
            w2: &z.w2 + &self.dw2.scale(t),
            w1: &z.w1 + &self.dw1.scale(t),
        }
    }
}
