use crate::linalg::Matrix;
use crate::model::{Dataset, Direction, FactorPair, ModelError};
use crate::Scalar;

fn check_mu<T: Scalar>(mu: T) -> Result<(), ModelError> {
    if mu < T::zero() {
        return Err(ModelError::NegativeMu(mu.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(())
}

/// The fit residual `W2 * W1 * X - Y`.
pub fn residual<T: Scalar>(z: &FactorPair<T>, data: &Dataset<T>) -> Matrix<T> {
    &(&z.product() * data.x()) - data.y()
}

/// Fit loss `0.5 * ||W2*W1*X - Y||_F^2`.
pub fn fit_loss<T: Scalar>(z: &FactorPair<T>, data: &Dataset<T>) -> Result<T, ModelError> {
    z.check_shapes(data)?;
    Ok(T::real(0.5) * residual(z, data).norm_sq())
}

/// The balance gap `W2'W2 - W1 * (X*X') * W1'` (symmetric, hidden x hidden).
///
/// Vanishes exactly on the critical set of the regularized loss.
pub fn balance_gap<T: Scalar>(z: &FactorPair<T>, data: &Dataset<T>) -> Matrix<T> {
    let w1_xxt = &z.w1 * data.xxt();
    &z.w2.gram_right() - &(&w1_xxt * &z.w1.transpose())
}

/// Balance penalty `||W2'W2 - W1*X*X'*W1'||_F^2`.
pub fn balance_penalty<T: Scalar>(z: &FactorPair<T>, data: &Dataset<T>) -> Result<T, ModelError> {
    z.check_shapes(data)?;
    Ok(balance_gap(z, data).norm_sq())
}

/// Regularized loss `g = f + (mu/4) * rho`.
///
/// For any `mu >= 0` this has the same global minimum value as the fit loss;
/// for `mu > 0` every one of its critical points is either a global minimum
/// or a strict saddle. `mu = 0` reduces to the fit loss.
pub fn regularized_loss<T: Scalar>(
    z: &FactorPair<T>,
    data: &Dataset<T>,
    mu: T,
) -> Result<T, ModelError> {
    check_mu(mu)?;
    let f = fit_loss(z, data)?;
    if mu == T::zero() {
        return Ok(f);
    }
    Ok(f + mu * T::real(0.25) * balance_gap(z, data).norm_sq())
}

/// Loss with the unweighted balance penalty:
/// `f + (mu/4) * ||W2'W2 - W1*W1'||_F^2`.
///
/// Evaluation only — the landscape machinery in this crate classifies the
/// input-weighted objective, not this one. When `X` is orthonormal the two
/// coincide.
pub fn plain_regularized_loss<T: Scalar>(
    z: &FactorPair<T>,
    data: &Dataset<T>,
    mu: T,
) -> Result<T, ModelError> {
    check_mu(mu)?;
    let f = fit_loss(z, data)?;
    let gap = &z.w2.gram_right() - &z.w1.gram_left();
    Ok(f + mu * T::real(0.25) * gap.norm_sq())
}

/// Gradient of the regularized loss with respect to `(W2, W1)`.
///
/// With `E = W2'W2 - W1*X*X'*W1'` and `R = W2*W1*X - Y`:
///
/// ```text
/// dW1 = W2' * R * X' - mu * E * W1 * X*X'
/// dW2 = R * X' * W1'  + mu * W2 * E
/// ```
///
/// `mu = 0` yields the gradient of the fit loss.
pub fn grad<T: Scalar>(
    z: &FactorPair<T>,
    data: &Dataset<T>,
    mu: T,
) -> Result<Direction<T>, ModelError> {
    z.check_shapes(data)?;
    check_mu(mu)?;
    let r_xt = &residual(z, data) * &data.x().transpose();
    let mut dw1 = &z.w2.transpose() * &r_xt;
    let mut dw2 = &r_xt * &z.w1.transpose();
    if mu > T::zero() {
        let gap = balance_gap(z, data);
        let w1_xxt = &z.w1 * data.xxt();
        dw1 = &dw1 - &(&gap * &w1_xxt).scale(mu);
        dw2 = &dw2 + &(&z.w2 * &gap).scale(mu);
    }
    Ok(Direction { dw2, dw1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_data(x: f64, y: f64) -> Dataset<f64> {
        Dataset::new(
            Matrix::from_vec(1, 1, vec![x]).unwrap(),
            Matrix::from_vec(1, 1, vec![y]).unwrap(),
        )
        .unwrap()
    }

    fn scalar_pair(w2: f64, w1: f64) -> FactorPair<f64> {
        FactorPair {
            w2: Matrix::from_vec(1, 1, vec![w2]).unwrap(),
            w1: Matrix::from_vec(1, 1, vec![w1]).unwrap(),
        }
    }

    #[test]
    fn fit_loss_values() {
        let d = scalar_data(1.0, 0.0);
        assert_eq!(fit_loss(&scalar_pair(1.0, 1.0), &d).unwrap(), 0.5);

        // W2*W1*X hits Y exactly: residual zero.
        let d = scalar_data(2.0, 6.0);
        let six = 6.0f64.sqrt();
        let loss = fit_loss(&scalar_pair(six, six / 2.0), &d).unwrap();
        assert!(loss.abs() < 1e-12);

        // The zero map costs half the output energy.
        let z = FactorPair::zeros(1, 1, 1);
        assert_eq!(fit_loss(&z, &d).unwrap(), 18.0);
    }

    #[test]
    fn balance_penalty_values() {
        let d = scalar_data(2.0, 0.0);
        // 1 = 0.5 * 4 * 0.5: balanced by construction.
        assert_eq!(balance_penalty(&scalar_pair(1.0, 0.5), &d).unwrap(), 0.0);
        // (9 - 4)^2 = 25.
        assert_eq!(balance_penalty(&scalar_pair(3.0, 1.0), &d).unwrap(), 25.0);
        assert_eq!(balance_penalty(&FactorPair::zeros(1, 1, 1), &d).unwrap(), 0.0);
    }

    #[test]
    fn regularized_loss_values() {
        let d = scalar_data(2.0, 6.0);
        // Balanced point: g = f exactly.
        let six = 6.0f64.sqrt();
        let balanced = scalar_pair(six, six / 2.0);
        let f = fit_loss(&balanced, &d).unwrap();
        assert_eq!(regularized_loss(&balanced, &d, 1.0).unwrap(), f);

        // Zero residual, rho = 25: g = 25/4.
        assert!((regularized_loss(&scalar_pair(3.0, 1.0), &d, 1.0).unwrap() - 6.25).abs() < 1e-12);

        let z = FactorPair::zeros(1, 1, 1);
        assert_eq!(regularized_loss(&z, &d, 3.5).unwrap(), 18.0);

        assert!(matches!(
            regularized_loss(&z, &d, -1.0),
            Err(ModelError::NegativeMu(_))
        ));
    }

    #[test]
    fn plain_regularized_loss_values() {
        let d = scalar_data(2.0, 6.0);
        // (9 - 1)^2 / 4 = 16 on top of a zero residual.
        assert!((plain_regularized_loss(&scalar_pair(3.0, 1.0), &d, 1.0).unwrap() - 16.0).abs() < 1e-12);

        // Orthonormal input: the two regularizers agree.
        let d = Dataset::new(
            Matrix::<f64>::identity(2),
            Matrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 1.0]]).unwrap(),
        )
        .unwrap();
        let z = FactorPair {
            w2: Matrix::from_vec(2, 1, vec![1.0, 2.0]).unwrap(),
            w1: Matrix::from_vec(1, 2, vec![0.5, -1.0]).unwrap(),
        };
        let g = regularized_loss(&z, &d, 0.7).unwrap();
        let h = plain_regularized_loss(&z, &d, 0.7).unwrap();
        assert!((g - h).abs() < 1e-12);
    }

    #[test]
    fn grad_values() {
        let d = scalar_data(2.0, 6.0);

        // Every gradient term carries a factor of W1 or W2, so the origin is
        // always critical.
        let zero = FactorPair::zeros(1, 1, 1);
        let dir = grad(&zero, &d, 1.0).unwrap();
        assert_eq!(dir.dw1[(0, 0)], 0.0);
        assert_eq!(dir.dw2[(0, 0)], 0.0);

        // Zero residual and balanced: critical for any mu.
        let six = 6.0f64.sqrt();
        let dir = grad(&scalar_pair(six, six / 2.0), &d, 1.0).unwrap();
        assert!(dir.norm() < 1e-12);

        // Zero residual but unbalanced: critical for the fit loss only.
        let dir = grad(&scalar_pair(3.0, 1.0), &d, 0.0).unwrap();
        assert!(dir.norm() < 1e-12);
        let dir = grad(&scalar_pair(3.0, 1.0), &d, 1.0).unwrap();
        assert!((dir.dw1[(0, 0)] + 20.0).abs() < 1e-12);
        assert!((dir.dw2[(0, 0)] - 15.0).abs() < 1e-12);
    }

    #[test]
    fn g_dominates_f() {
        let d = scalar_data(2.0, 6.0);
        for (w2, w1) in [(0.3, -1.2), (2.0, 2.0), (-0.5, 0.1)] {
            let z = scalar_pair(w2, w1);
            let f = fit_loss(&z, &d).unwrap();
            let g = regularized_loss(&z, &d, 0.8).unwrap();
            assert!(g >= f - 1e-12);
        }
    }
}
