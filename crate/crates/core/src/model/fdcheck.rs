//! Finite-difference oracles for the analytic gradient and Hessian form.

use crate::model::{hessian_quadform, regularized_loss, Dataset, Direction, FactorPair, ModelError};
use crate::Scalar;

/// Default central-difference step for gradient checks.
pub const FD_GRAD_STEP: f64 = 1e-5;
/// Default step for second directional differences.
pub const FD_QUADFORM_STEP: f64 = 1e-4;

/// Maximum relative disagreement between the analytic gradient and a
/// central finite difference of the regularized loss.
///
/// Every entry of `W2` and `W1` is perturbed by `+-step`; the per-entry error
/// is normalized by `max(1, |analytic entry|)`. `step` must lie in
/// `[1e-7, 1e-3]`, the usable central-difference window in double precision.
pub fn fd_grad_error<T: Scalar>(
    z: &FactorPair<T>,
    data: &Dataset<T>,
    mu: T,
    step: T,
) -> Result<T, ModelError> {
    assert!(
        step >= T::real(1e-7) && step <= T::real(1e-3),
        "finite-difference step outside [1e-7, 1e-3]"
    );
    let analytic = crate::model::grad(z, data, mu)?;
    let two_h = T::real(2.0) * step;

    let mut worst = T::zero();
    let mut probe = z.clone();
    let blocks: [(usize, usize); 2] = [z.w2.shape(), z.w1.shape()];
    for (block, (rows, cols)) in blocks.iter().enumerate() {
        for i in 0..*rows {
            for j in 0..*cols {
                let (orig, reference) = if block == 0 {
                    (z.w2[(i, j)], analytic.dw2[(i, j)])
                } else {
                    (z.w1[(i, j)], analytic.dw1[(i, j)])
                };
                let entry = |p: &mut FactorPair<T>, v: T| {
                    if block == 0 {
                        p.w2[(i, j)] = v;
                    } else {
                        p.w1[(i, j)] = v;
                    }
                };
                entry(&mut probe, orig + step);
                let plus = regularized_loss(&probe, data, mu)?;
                entry(&mut probe, orig - step);
                let minus = regularized_loss(&probe, data, mu)?;
                entry(&mut probe, orig);
                let fd = (plus - minus) / two_h;
                let err = (fd - reference).abs() / T::one().max(reference.abs());
                worst = worst.max(err);
            }
        }
    }
    Ok(worst)
}

/// Relative disagreement between the Hessian quadratic form and the second
/// directional difference `(g(Z+tD) - 2 g(Z) + g(Z-tD)) / t^2`.
///
/// Normalized by `max(1, |quadform|)`, matching the gradient-check
/// convention.
pub fn fd_quadform_error<T: Scalar>(
    z: &FactorPair<T>,
    dir: &Direction<T>,
    data: &Dataset<T>,
    mu: T,
    step: T,
) -> Result<T, ModelError> {
    assert!(
        step >= T::real(1e-7) && step <= T::real(1e-3),
        "finite-difference step outside [1e-7, 1e-3]"
    );
    let q = hessian_quadform(z, dir, data, mu)?;
    let center = regularized_loss(z, data, mu)?;
    let plus = regularized_loss(&dir.step_from(z, step), data, mu)?;
    let minus = regularized_loss(&dir.step_from(z, -step), data, mu)?;
    let fd = (plus - (center + center) + minus) / (step * step);
    Ok((fd - q).abs() / T::one().max(q.abs()))
}
