//! Reproducible problem instances.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::{gaussian_matrix, reduced_svd, Matrix};
use crate::model::{Dataset, ModelError};
use crate::Scalar;

/// Problem dimensions: input width, hidden width, output width, sample count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub input: usize,
    pub hidden: usize,
    pub output: usize,
    pub samples: usize,
}

impl Dims {
    pub fn new(input: usize, hidden: usize, output: usize, samples: usize) -> Self {
        Self { input, hidden, output, samples }
    }
}

/// How the output matrix is produced.
#[derive(Debug, Clone)]
pub enum DataMode<T> {
    /// `Y = W2* W1* X` with Gaussian factors of the given inner rank: the
    /// optimum value is zero whenever `rank <= hidden`, and the planted
    /// product is recoverable.
    Planted { rank: usize, scale: T },
    /// `Y` i.i.d. Gaussian; the optimum is the Eckart-Young tail energy.
    RandomY,
}

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("bad dimensions: {0}")]
    BadDims(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A generated instance, with the planted product kept around for recovery
/// checks when one exists.
#[derive(Debug, Clone)]
pub struct Generated<T> {
    pub data: Dataset<T>,
    pub planted_product: Option<Matrix<T>>,
}

/// Ratio `sigma_min / sigma_max` below which a sampled input is redrawn.
const CONDITION_FLOOR: f64 = 1e-6;

/// Draws a seeded instance.
///
/// The input `X` is i.i.d. Gaussian, redrawn until its smallest singular
/// value clears `1e-6 * sigma_max` — full row rank is the one hypothesis the
/// landscape results need, so ill-conditioned draws are rejected at the
/// source. Identical `(dims, mode, seed)` always produce the same instance.
pub fn generate_dataset<T: Scalar>(
    dims: &Dims,
    mode: &DataMode<T>,
    seed: u64,
) -> Result<Generated<T>, DatagenError> {
    if dims.input == 0 || dims.hidden == 0 || dims.output == 0 || dims.samples == 0 {
        return Err(DatagenError::BadDims(format!("all dimensions must be positive: {dims:?}")));
    }
    if dims.samples < dims.input {
        return Err(DatagenError::BadDims(format!(
            "need samples >= input dimension ({} < {})",
            dims.samples, dims.input
        )));
    }
    if let DataMode::Planted { rank, .. } = mode {
        let cap = dims.input.min(dims.output);
        if *rank == 0 || *rank > cap {
            return Err(DatagenError::BadDims(format!(
                "planted rank {rank} outside 1..={cap}"
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = loop {
        let candidate = gaussian_matrix::<T>(dims.input, dims.samples, &mut rng);
        if let Ok(svd) = reduced_svd(&candidate) {
            if svd.rank() == dims.input {
                let smin = svd.s[svd.rank() - 1];
                let smax = svd.s[0];
                if smin >= T::real(CONDITION_FLOOR) * smax {
                    break candidate;
                }
            }
        }
    };

    let (y, planted_product) = match mode {
        DataMode::Planted { rank, scale } => {
            let w2_star = gaussian_matrix::<T>(dims.output, *rank, &mut rng).scale(*scale);
            let w1_star = gaussian_matrix::<T>(*rank, dims.input, &mut rng).scale(*scale);
            let product = &w2_star * &w1_star;
            (&product * &x, Some(product))
        }
        DataMode::RandomY => (gaussian_matrix::<T>(dims.output, dims.samples, &mut rng), None),
    };

    let data = Dataset::new(x, y)?;
    Ok(Generated { data, planted_product })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::global_min_value;

    #[test]
    fn planted_rank_one_is_realizable() {
        let dims = Dims::new(2, 1, 2, 4);
        let g = generate_dataset::<f64>(&dims, &DataMode::Planted { rank: 1, scale: 1.0 }, 42)
            .unwrap();
        assert!(global_min_value(&g.data, 1).abs() < 1e-10);
        assert!(g.planted_product.is_some());
    }

    #[test]
    fn random_output_is_not_realizable_with_narrow_hidden() {
        // rank(Y V) = 2 > hidden = 1 almost surely.
        let dims = Dims::new(2, 1, 2, 4);
        let g = generate_dataset::<f64>(&dims, &DataMode::<f64>::RandomY, 42).unwrap();
        assert!(global_min_value(&g.data, 1) > 1e-6);
    }

    #[test]
    fn deterministic_per_seed() {
        let dims = Dims::new(3, 2, 2, 6);
        let a = generate_dataset::<f64>(&dims, &DataMode::RandomY, 7).unwrap();
        let b = generate_dataset::<f64>(&dims, &DataMode::RandomY, 7).unwrap();
        assert_eq!(a.data.x().as_slice(), b.data.x().as_slice());
        assert_eq!(a.data.y().as_slice(), b.data.y().as_slice());
    }

    #[test]
    fn bad_dims_rejected() {
        assert!(generate_dataset::<f64>(
            &Dims::new(3, 1, 1, 2),
            &DataMode::RandomY,
            0
        )
        .is_err());
        assert!(generate_dataset::<f64>(
            &Dims::new(2, 1, 2, 4),
            &DataMode::Planted { rank: 3, scale: 1.0 },
            0
        )
        .is_err());
    }
}
