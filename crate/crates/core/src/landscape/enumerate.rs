use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::landscape::{CriticalPointSpec, LandscapeError, Slot};
use crate::linalg::{random_orthonormal, Matrix};
use crate::model::{Dataset, FactorPair};
use crate::Scalar;

/// The shared global minimum value of the fit loss and the regularized loss.
///
/// Best rank-`min(hidden, output, input)` approximation of `Y*V`: keep the
/// top singular values, pay half the energy of the rest, plus the constant
/// `0.5 * (||Y||_F^2 - ||Y*V||_F^2)` lost outside the row space of `X`.
pub fn global_min_value<T: Scalar>(data: &Dataset<T>, hidden_dim: usize) -> T {
    let keep = hidden_dim.min(data.output_dim()).min(data.input_dim());
    let half = T::real(0.5);
    let tail: T = data.lambda().iter().skip(keep).map(|&l| l * l).sum();
    let offset = data.y().norm_sq() - data.projected_y().norm_sq();
    half * tail + half * offset
}

/// Builds the critical point identified by a [`CriticalPointSpec`].
///
/// Column `i` of the pre-rotation second layer is `sign * sqrt(lambda_j) * p_j`
/// (or zero), row `i` of the pre-rotation first layer is
/// `sign * sqrt(lambda_j) * q_j'` (or zero); the rotation and the whitening
/// map `S^-1*U'` then produce `W2 = W2~ * R'` and `W1 = R * W1~ * S^-1 * U'`.
/// The result has exactly vanishing gradient (up to rounding) for every
/// `mu >= 0` and satisfies the balance identity.
pub fn build_critical_point<T: Scalar>(
    data: &Dataset<T>,
    hidden_dim: usize,
    spec: &CriticalPointSpec<T>,
) -> Result<FactorPair<T>, LandscapeError> {
    if spec.slots.len() != hidden_dim {
        return Err(LandscapeError::InvalidSpec(format!(
            "spec has {} slots, expected hidden dimension {}",
            spec.slots.len(),
            hidden_dim
        )));
    }
    spec.validate(data.rank_projected_y())?;

    let d2 = data.output_dim();
    let d0 = data.input_dim();
    let mut w2_tilde = Matrix::zeros(d2, hidden_dim);
    let mut w1_tilde = Matrix::zeros(hidden_dim, d0);
    for (i, slot) in spec.slots.iter().enumerate() {
        if let Slot::Pair { index, negative } = slot {
            let lam = data.lambda()[*index];
            let scale = if *negative { -lam.sqrt() } else { lam.sqrt() };
            let p = data.left_pair(*index);
            let q = data.right_pair(*index);
            for (row, &pv) in p.iter().enumerate() {
                w2_tilde[(row, i)] = scale * pv;
            }
            for (col, &qv) in q.iter().enumerate() {
                w1_tilde[(i, col)] = scale * qv;
            }
        }
    }

    let w2 = &w2_tilde * &spec.rotation.transpose();
    let w1 = &(&spec.rotation * &w1_tilde) * data.sigma_inv_ut();
    Ok(FactorPair { w2, w1 })
}

/// Hard cap on the number of enumerated specs.
pub const MAX_SPECS: u128 = 100_000;

/// Number of base selections for given rank and hidden dimension:
/// slot sequences over `{empty} U {(j, +-)}` whose non-empty indices are
/// strictly increasing.
pub fn count_specs(rank: usize, hidden_dim: usize) -> u128 {
    let mut total: u128 = 0;
    for k in 0..=rank.min(hidden_dim) {
        total += binomial(hidden_dim, k) * binomial(rank, k) * (1u128 << k);
    }
    total
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Every base selection (identity rotation), in a fixed deterministic order,
/// plus `include_rotations` seeded random rotations per selection.
///
/// Fails with [`LandscapeError::TooMany`] when the total would exceed
/// [`MAX_SPECS`].
pub fn all_specs<T: Scalar>(
    data: &Dataset<T>,
    hidden_dim: usize,
    include_rotations: usize,
    seed: u64,
) -> Result<Vec<CriticalPointSpec<T>>, LandscapeError> {
    let rank = data.rank_projected_y();
    let base = count_specs(rank, hidden_dim);
    let total = base * (1 + include_rotations as u128);
    if total > MAX_SPECS {
        return Err(LandscapeError::TooMany { count: total, max: MAX_SPECS });
    }

    let mut bases: Vec<Vec<Slot>> = Vec::with_capacity(base as usize);
    let mut current = vec![Slot::Empty; hidden_dim];
    fill_slots(&mut bases, &mut current, 0, 0, rank);
    debug_assert_eq!(bases.len() as u128, base);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut specs = Vec::with_capacity(total as usize);
    for slots in bases {
        for t in 0..=include_rotations {
            let rotation = if t == 0 {
                Matrix::identity(hidden_dim)
            } else {
                random_orthonormal::<T>(hidden_dim, rng.random::<u64>())
            };
            specs.push(CriticalPointSpec { slots: slots.clone(), rotation });
        }
    }
    Ok(specs)
}

/// Depth-first walk over the slots; `next_index` enforces strictly
/// increasing pair indices, which makes each unordered selection appear in
/// exactly one slot arrangement per choice of occupied slots.
fn fill_slots(
    out: &mut Vec<Vec<Slot>>,
    current: &mut Vec<Slot>,
    slot: usize,
    next_index: usize,
    rank: usize,
) {
    if slot == current.len() {
        out.push(current.clone());
        return;
    }
    current[slot] = Slot::Empty;
    fill_slots(out, current, slot + 1, next_index, rank);
    for index in next_index..rank {
        for negative in [false, true] {
            current[slot] = Slot::Pair { index, negative };
            fill_slots(out, current, slot + 1, index + 1, rank);
        }
    }
    current[slot] = Slot::Empty;
}
