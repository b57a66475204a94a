//! The structure of the critical set, as executable constructions.
//!
//! For the regularized loss `g` (with `mu > 0` and full-row-rank `X`) the
//! critical set is known in closed form: with `X = U*S*V'` and
//! `Y*V = P*L*Q'`, every critical point picks an orthogonal subset of the
//! singular pairs `(p_j, q_j)` of `Y*V`, loads each with `sqrt(lambda_j)`,
//! and rotates by an arbitrary orthonormal `R`. This module provides:
//!
//! - [`build_critical_point`]: the pair `(W2, W1)` for one such selection;
//! - [`all_specs`]: systematic enumeration of every selection;
//! - [`global_min_value`]: the shared optimum of the fit loss and the
//!   regularized loss, straight from the truncated spectrum of `Y*V`;
//! - [`classify`]: global minimum or strict saddle, the latter with an
//!   explicit escape direction, its Rayleigh quotient, and the matching
//!   curvature bound;
//! - [`escape_direction`]: the negative-curvature construction itself;
//! - [`balanced_lift`] and [`classify_f_critical`]: the rebalancing
//!   construction that transfers the whole analysis to critical points of
//!   the unregularized fit loss.

mod classify;
mod enumerate;
mod lift;

pub use classify::{classify, classify_f_critical, escape_direction};
pub use enumerate::{all_specs, build_critical_point, count_specs, global_min_value, MAX_SPECS};
pub use lift::{balanced_lift, pull_back_direction, LiftResult};

use thiserror::Error;

use crate::linalg::Matrix;
use crate::model::{Direction, ModelError};
use crate::{tol, Scalar};

/// One slot of a critical-point selection: either empty or a signed singular
/// pair of `Y*V`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Empty,
    /// Load singular pair `index` (0-based) with sign `+1` or `-1`.
    Pair { index: usize, negative: bool },
}

impl Slot {
    pub fn pair(index: usize) -> Self {
        Slot::Pair { index, negative: false }
    }

    pub fn pair_neg(index: usize) -> Self {
        Slot::Pair { index, negative: true }
    }
}

/// Selection identifying a single critical point of the regularized loss.
///
/// `slots` assigns each of the `hidden_dim` columns either nothing or a
/// signed singular pair of `Y*V` (indices must be distinct); `rotation` is
/// the orthonormal matrix mixing the hidden coordinates.
#[derive(Debug, Clone)]
pub struct CriticalPointSpec<T> {
    pub slots: Vec<Slot>,
    pub rotation: Matrix<T>,
}

impl<T: Scalar> CriticalPointSpec<T> {
    /// Selection with the identity rotation.
    pub fn plain(slots: Vec<Slot>) -> Self {
        let d1 = slots.len();
        Self { slots, rotation: Matrix::identity(d1) }
    }

    /// All-empty selection (the origin).
    pub fn origin(hidden_dim: usize) -> Self {
        Self::plain(vec![Slot::Empty; hidden_dim])
    }

    /// Indices selected by the non-empty slots.
    pub fn selected(&self) -> Vec<usize> {
        self.slots
            .iter()
            .filter_map(|s| match s {
                Slot::Pair { index, .. } => Some(*index),
                Slot::Empty => None,
            })
            .collect()
    }

    /// Validates slot indices against the rank of `Y*V` and the rotation
    /// against orthonormality.
    pub fn validate(&self, rank: usize) -> Result<(), LandscapeError> {
        let d1 = self.slots.len();
        let mut seen = vec![false; rank];
        for slot in &self.slots {
            if let Slot::Pair { index, .. } = slot {
                if *index >= rank {
                    return Err(LandscapeError::InvalidSpec(format!(
                        "slot index {} out of range (rank {})",
                        index, rank
                    )));
                }
                if seen[*index] {
                    return Err(LandscapeError::InvalidSpec(format!(
                        "singular pair {} selected twice",
                        index
                    )));
                }
                seen[*index] = true;
            }
        }
        if self.rotation.shape() != (d1, d1) {
            return Err(LandscapeError::InvalidSpec(format!(
                "rotation is {:?}, expected {}x{}",
                self.rotation.shape(),
                d1,
                d1
            )));
        }
        let defect = (&self.rotation.gram_right() - &Matrix::identity(d1)).norm();
        if defect > tol::scaled::<T>(1e-12) * T::from_usize(d1).unwrap() {
            return Err(LandscapeError::InvalidSpec(format!(
                "rotation is not orthonormal (defect {:e})",
                defect
            )));
        }
        Ok(())
    }

    /// Compact display form like `[1+ 2- _]` (1-based indices).
    pub fn label(&self) -> String {
        let parts: Vec<String> = self
            .slots
            .iter()
            .map(|s| match s {
                Slot::Empty => "_".to_string(),
                Slot::Pair { index, negative: false } => format!("{}+", index + 1),
                Slot::Pair { index, negative: true } => format!("{}-", index + 1),
            })
            .collect();
        format!("[{}]", parts.join(" "))
    }
}

/// Which curvature bound applies to a strict saddle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureCase {
    /// `rank(Y*V) <= hidden_dim`: bound `-2 * lambda_r / (1 + sum sigma_i^-2)`.
    RankWithinHidden,
    /// `rank(Y*V) > hidden_dim`: bound
    /// `-2 * (lambda_{d1} - lambda_{r'}) / (1 + sum sigma_i^-2)`.
    RankExceedsHidden,
}

/// Verdict for a critical point.
#[derive(Debug, Clone)]
pub enum Classification<T> {
    GlobalMin,
    StrictSaddle {
        /// Explicit negative-curvature direction.
        direction: Direction<T>,
        /// `quadform / ||direction||^2`; strictly negative.
        rayleigh: T,
        /// Upper bound on the smallest Hessian eigenvalue certified by the
        /// applicable case (0 when only the sign is asserted).
        bound: T,
        case: CurvatureCase,
    },
}

impl<T> Classification<T> {
    pub fn is_global_min(&self) -> bool {
        matches!(self, Classification::GlobalMin)
    }
}

/// Errors from landscape constructions.
#[derive(Debug, Error)]
pub enum LandscapeError {
    #[error("invalid critical-point spec: {0}")]
    InvalidSpec(String),
    #[error("enumeration would produce {count} specs (limit {max})")]
    TooMany { count: u128, max: u128 },
    #[error("point is not critical: gradient norm {grad_norm:e} exceeds tolerance {tol:e}")]
    NotCritical { grad_norm: f64, tol: f64 },
    #[error("point is a global minimum; no escape direction exists")]
    IsGlobalMin,
    #[error("classification requires mu > 0, got {0}")]
    NonPositiveMu(f64),
    #[error("W2 * W1 is numerically zero; the balanced lift is empty")]
    ZeroProduct,
    #[error("could not recover the omitted singular pairs from the point")]
    AmbiguousRecovery,
    #[error("no negative curvature found at a non-optimal critical point")]
    NoNegativeCurvature,
    #[error(transparent)]
    Model(#[from] ModelError),
}
