use crate::landscape::LandscapeError;
use crate::linalg::{reduced_svd, LinalgError, SvdTriple};
use crate::model::{Dataset, Direction, FactorPair};
use crate::Scalar;

/// A balanced refactorization of the same end-to-end map.
///
/// `zbar` realizes the product `W2 * W1` of the input pair with an inner
/// dimension equal to `rank(W2 * W1)`, satisfies the balance identity
/// exactly, and — when the input was a critical point of the fit loss — is
/// itself a critical point whose classification transfers back.
#[derive(Debug, Clone)]
pub struct LiftResult<T> {
    pub zbar: FactorPair<T>,
    /// Reduced SVD `Phi * Theta * Psi'` of `W2 * W1 * U * S`, the scaled
    /// product the construction factors.
    pub factors: SvdTriple<T>,
}

/// Rebalances a factor pair without changing its product.
///
/// With `W2*W1*U*S = Phi * Theta * Psi'` (reduced SVD):
///
/// ```text
/// W2_bar = Phi * Theta^(1/2)
/// W1_bar = Theta^(1/2) * Psi' * S^-1 * U'
/// ```
///
/// so `W2_bar * W1_bar = W2 * W1` and
/// `W2_bar' * W2_bar = W1_bar * (X*X') * W1_bar' = Theta`. Meaningful as a
/// landscape tool at critical points of the fit loss, where the output is
/// again critical; the two identities above hold for any input. Fails with
/// [`LandscapeError::ZeroProduct`] when `W2 * W1 = 0` (such a point is
/// already balanced and there is nothing to factor).
pub fn balanced_lift<T: Scalar>(
    z: &FactorPair<T>,
    data: &Dataset<T>,
) -> Result<LiftResult<T>, LandscapeError> {
    z.check_shapes(data).map_err(LandscapeError::Model)?;
    let scaled_product = &z.product() * data.u_sigma();
    let factors = match reduced_svd(&scaled_product) {
        Ok(t) => t,
        Err(LinalgError::ZeroMatrix) => return Err(LandscapeError::ZeroProduct),
        Err(e) => return Err(LandscapeError::Model(e.into())),
    };

    let k = factors.rank();
    let mut w2_bar = factors.u.clone();
    for j in 0..k {
        let root = factors.s[j].sqrt();
        for i in 0..w2_bar.rows() {
            w2_bar[(i, j)] = w2_bar[(i, j)] * root;
        }
    }
    let mut theta_psi_t = factors.v.transpose();
    for i in 0..k {
        let root = factors.s[i].sqrt();
        for j in 0..theta_psi_t.cols() {
            theta_psi_t[(i, j)] = theta_psi_t[(i, j)] * root;
        }
    }
    let w1_bar = &theta_psi_t * data.sigma_inv_ut();
    Ok(LiftResult { zbar: FactorPair { w2: w2_bar, w1: w1_bar }, factors })
}

/// Pulls a perturbation of the lifted pair back to the original coordinates:
///
/// ```text
/// D1 = W1 * U * S * Psi * Theta^(-1/2) * D1_bar
/// D2 = D2_bar * Theta^(-1/2) * Phi' * W2
/// ```
///
/// The pulled-back direction reproduces the lifted Hessian form of the fit
/// loss: the three products `W2*D1`, `D2*W1`, and `D2*D1` match their lifted
/// counterparts exactly.
pub fn pull_back_direction<T: Scalar>(
    z: &FactorPair<T>,
    data: &Dataset<T>,
    lift: &LiftResult<T>,
    dbar: &Direction<T>,
) -> Direction<T> {
    let k = lift.factors.rank();
    // Psi * Theta^(-1/2) and Theta^(-1/2) * Phi', with the diagonal folded in.
    let mut psi_scaled = lift.factors.v.clone();
    for j in 0..k {
        let inv_root = T::one() / lift.factors.s[j].sqrt();
        for i in 0..psi_scaled.rows() {
            psi_scaled[(i, j)] = psi_scaled[(i, j)] * inv_root;
        }
    }
    let mut phi_t_scaled = lift.factors.u.transpose();
    for i in 0..k {
        let inv_root = T::one() / lift.factors.s[i].sqrt();
        for j in 0..phi_t_scaled.cols() {
            phi_t_scaled[(i, j)] = phi_t_scaled[(i, j)] * inv_root;
        }
    }
    let dw1 = &(&(&z.w1 * data.u_sigma()) * &psi_scaled) * &dbar.dw1;
    let dw2 = &(&dbar.dw2 * &phi_t_scaled) * &z.w2;
    Direction { dw2, dw1 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::model::balance_gap;

    fn scalar_instance() -> Dataset<f64> {
        Dataset::new(
            Matrix::from_vec(1, 1, vec![2.0]).unwrap(),
            Matrix::from_vec(1, 1, vec![6.0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn scalar_lift_matches_hand_computation() {
        // W2*W1*U*S = 3 * 1 * 1 * 2 = 6, so Theta = 6 and the balanced pair
        // is (sqrt(6), sqrt(6)/2).
        let d = scalar_instance();
        let z = FactorPair {
            w2: Matrix::from_vec(1, 1, vec![3.0]).unwrap(),
            w1: Matrix::from_vec(1, 1, vec![1.0]).unwrap(),
        };
        let lift = balanced_lift(&z, &d).unwrap();
        let six = 6.0f64.sqrt();
        assert!((lift.factors.s[0] - 6.0).abs() < 1e-12);
        assert!((lift.zbar.w2[(0, 0)] - six).abs() < 1e-12);
        assert!((lift.zbar.w1[(0, 0)] - six / 2.0).abs() < 1e-12);
    }

    #[test]
    fn lift_preserves_product_and_balances() {
        let x = Matrix::from_rows(&[vec![1.0, 0.3, -0.5, 2.0], vec![0.2, 1.5, 0.7, -0.1]]).unwrap();
        let y = Matrix::from_rows(&[vec![0.5, 1.0, 0.0, -1.0], vec![1.5, -0.2, 0.8, 0.3]]).unwrap();
        let d = Dataset::new(x, y).unwrap();
        let z = FactorPair {
            w2: Matrix::from_rows(&[vec![1.0, -0.4], vec![0.3, 2.0]]).unwrap(),
            w1: Matrix::from_rows(&[vec![0.7, 0.1], vec![-0.2, 1.1]]).unwrap(),
        };
        let lift = balanced_lift(&z, &d).unwrap();
        let product_gap = (&lift.zbar.product() - &z.product()).norm();
        assert!(product_gap <= 1e-10 * (1.0 + z.product().norm()), "{product_gap}");
        assert!(balance_gap(&lift.zbar, &d).norm() <= 1e-10);
    }

    #[test]
    fn already_balanced_point_is_reproduced() {
        let d = scalar_instance();
        let six = 6.0f64.sqrt();
        let z = FactorPair {
            w2: Matrix::from_vec(1, 1, vec![six]).unwrap(),
            w1: Matrix::from_vec(1, 1, vec![six / 2.0]).unwrap(),
        };
        let lift = balanced_lift(&z, &d).unwrap();
        assert!((&lift.zbar.product() - &z.product()).norm() < 1e-12);
        assert!(balance_gap(&lift.zbar, &d).norm() < 1e-12);
    }

    #[test]
    fn degenerate_product_shrinks_inner_dimension() {
        let d = Dataset::new(
            Matrix::identity(3),
            Matrix::from_fn(3, 3, |i, j| if i == j { 1.0 } else { 0.0 }),
        )
        .unwrap();
        // Rank-one product despite hidden dimension 2.
        let z = FactorPair {
            w2: Matrix::from_rows(&[vec![1.0, 2.0], vec![0.5, 1.0], vec![-1.0, -2.0]]).unwrap(),
            w1: Matrix::from_rows(&[vec![1.0, 0.0, 1.0], vec![0.5, 0.0, 0.5]]).unwrap(),
        };
        let lift = balanced_lift(&z, &d).unwrap();
        assert_eq!(lift.zbar.hidden_dim(), 1);
        assert!((&lift.zbar.product() - &z.product()).norm() < 1e-10);
    }

    #[test]
    fn zero_product_is_an_error() {
        let d = scalar_instance();
        let z = FactorPair::zeros(1, 1, 1);
        assert!(matches!(balanced_lift(&z, &d), Err(LandscapeError::ZeroProduct)));
    }
}
