//! Dense linear-algebra substrate.
//!
//! Small dense real matrices with the factorizations the landscape analysis
//! needs: reduced SVD ([`reduced_svd`]), symmetric eigendecomposition
//! ([`sym_eig`]), and seeded orthonormal sampling ([`random_orthonormal`]).
//! Problem sizes are tiny (a few hundred at most), so both factorizations use
//! Jacobi-type iterations: simple, and accurate to close to machine precision.
//!
//! All operations are pure functions of their inputs; values are immutable
//! once constructed and safe to share across threads.

mod eig;
mod matrix;
mod ortho;
mod svd;

pub use eig::{sym_eig, SymEig};
pub use matrix::Matrix;
pub use ortho::{gaussian_matrix, random_orthonormal};
pub use svd::{reduced_svd, SvdTriple};

use thiserror::Error;

/// Errors from matrix construction and factorization.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    /// A user-supplied entry was NaN or infinite.
    #[error("matrix entry at ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    /// Entry buffer length does not match `rows * cols`.
    #[error("expected {rows}x{cols} = {} entries, got {got}", rows * cols)]
    BadLength { rows: usize, cols: usize, got: usize },
    /// A matrix dimension was zero.
    #[error("matrix dimensions must be positive, got {rows}x{cols}")]
    EmptyShape { rows: usize, cols: usize },
    /// Every singular value fell below the rank drop tolerance.
    #[error("matrix is numerically zero; no singular values above drop tolerance")]
    ZeroMatrix,
    /// A square matrix was required.
    #[error("operation requires a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    /// A Jacobi sweep limit was exhausted before reaching tolerance.
    #[error("{what} did not converge within {sweeps} sweeps")]
    NoConvergence { what: &'static str, sweeps: usize },
}
