use crate::linalg::Matrix;
use crate::model::{balance_gap, residual, Dataset, Direction, FactorPair, ModelError};
use crate::Scalar;

/// Upper limit on the dense Hessian dimension `hidden * (output + input)`.
pub const MAX_HESSIAN_DIM: usize = 4096;

/// Hessian quadratic form of the regularized loss,
/// `d^2/dt^2 g(Z + t*D) |_{t=0}`.
///
/// With `E = W2'W2 - W1*M*W1'`, `M = X*X'`, `R = W2*W1*X - Y`:
///
/// ```text
/// q(D) = ||(W2*D1 + D2*W1) * X||_F^2
///      + 2 <D2*D1, R*X'>
///      + mu * ( <E, D2'D2 - D1*M*D1'>
///             + 0.5 * ||W2'D2 + D2'W2 - W1*M*D1' - D1*M*W1'||_F^2 )
/// ```
///
/// The full form is evaluated at every point — the `<E, .>` term drops only
/// on the critical set, and finite-difference validation needs the quadratic
/// form to be exact away from it. `mu = 0` gives the Hessian form of the fit
/// loss.
pub fn hessian_quadform<T: Scalar>(
    z: &FactorPair<T>,
    dir: &Direction<T>,
    data: &Dataset<T>,
    mu: T,
) -> Result<T, ModelError> {
    z.check_shapes(data)?;
    if dir.dw2.shape() != z.w2.shape() || dir.dw1.shape() != z.w1.shape() {
        return Err(ModelError::ShapeMismatch(format!(
            "direction blocks {:?}/{:?} do not match factors {:?}/{:?}",
            dir.dw2.shape(),
            dir.dw1.shape(),
            z.w2.shape(),
            z.w1.shape()
        )));
    }
    if mu < T::zero() {
        return Err(ModelError::NegativeMu(mu.to_f64().unwrap_or(f64::NAN)));
    }

    let mixed = &(&z.w2 * &dir.dw1) + &(&dir.dw2 * &z.w1);
    let first = (&mixed * data.x()).norm_sq();

    let cross = (&dir.dw2 * &dir.dw1).dot(&(&residual(z, data) * &data.x().transpose()));
    let mut q = first + T::real(2.0) * cross;

    if mu > T::zero() {
        let gap = balance_gap(z, data);
        let d1_m = &dir.dw1 * data.xxt();
        let dir_gap = &dir.dw2.gram_right() - &(&d1_m * &dir.dw1.transpose());
        let w1_m_d1t = &(&z.w1 * data.xxt()) * &dir.dw1.transpose();
        let w2t_d2 = &z.w2.transpose() * &dir.dw2;
        let sym = &(&w2t_d2 + &w2t_d2.transpose()) - &(&w1_m_d1t + &w1_m_d1t.transpose());
        q = q + mu * (gap.dot(&dir_gap) + T::real(0.5) * sym.norm_sq());
    }
    Ok(q)
}

/// Stack a direction into a flat vector: `dw2` entries row-major, then `dw1`
/// entries row-major. This is the coordinate system of [`assemble_hessian`].
pub fn flatten_direction<T: Scalar>(dir: &Direction<T>) -> Vec<T> {
    let mut v = Vec::with_capacity(dir.dw2.as_slice().len() + dir.dw1.as_slice().len());
    v.extend_from_slice(dir.dw2.as_slice());
    v.extend_from_slice(dir.dw1.as_slice());
    v
}

/// Inverse of [`flatten_direction`] for a factor pair of the same shape.
pub fn unflatten_direction<T: Scalar>(like: &FactorPair<T>, v: &[T]) -> Direction<T> {
    let n2 = like.w2.rows() * like.w2.cols();
    let n1 = like.w1.rows() * like.w1.cols();
    assert_eq!(v.len(), n2 + n1, "flat vector length mismatch");
    Direction {
        dw2: Matrix::from_fn(like.w2.rows(), like.w2.cols(), |i, j| v[i * like.w2.cols() + j]),
        dw1: Matrix::from_fn(like.w1.rows(), like.w1.cols(), |i, j| {
            v[n2 + i * like.w1.cols() + j]
        }),
    }
}

/// Dense Hessian of the regularized loss in the flattened coordinates.
///
/// Assembled entry-by-entry from the quadratic form via polarization,
/// `H_ij = (q(e_i + e_j) - q(e_i - e_j)) / 4`, which makes the result
/// symmetric by construction. Intended for eigenvalue checks at desk scale;
/// dimensions above [`MAX_HESSIAN_DIM`] are refused.
pub fn assemble_hessian<T: Scalar>(
    z: &FactorPair<T>,
    data: &Dataset<T>,
    mu: T,
) -> Result<Matrix<T>, ModelError> {
    z.check_shapes(data)?;
    let n = z.w2.as_slice().len() + z.w1.as_slice().len();
    if n > MAX_HESSIAN_DIM {
        return Err(ModelError::TooLarge { n, max: MAX_HESSIAN_DIM });
    }

    let quarter = T::real(0.25);
    let mut h = Matrix::zeros(n, n);
    let mut flat = vec![T::zero(); n];
    for i in 0..n {
        for j in i..n {
            flat[i] = flat[i] + T::one();
            flat[j] = flat[j] + T::one();
            let plus = hessian_quadform(z, &unflatten_direction(z, &flat), data, mu)?;
            flat[j] = flat[j] - T::real(2.0);
            let minus = hessian_quadform(z, &unflatten_direction(z, &flat), data, mu)?;
            flat[i] = T::zero();
            flat[j] = T::zero();
            let entry = (plus - minus) * quarter;
            h[(i, j)] = entry;
            h[(j, i)] = entry;
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_eig;

    fn instance_a() -> Dataset<f64> {
        Dataset::new(
            Matrix::from_vec(1, 1, vec![2.0]).unwrap(),
            Matrix::from_vec(1, 1, vec![6.0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn quadform_at_origin_is_pure_cross_term() {
        let d = instance_a();
        let z = FactorPair::zeros(1, 1, 1);
        let dir = Direction {
            dw2: Matrix::from_vec(1, 1, vec![1.0]).unwrap(),
            dw1: Matrix::from_vec(1, 1, vec![0.5]).unwrap(),
        };
        // Only the cross term survives: 2 * (0.5 * (-6 * 2)) = -12,
        // independent of mu.
        for mu in [0.0, 0.3, 1.0, 10.0] {
            let q = hessian_quadform(&z, &dir, &d, mu).unwrap();
            assert!((q + 12.0).abs() < 1e-12, "mu={mu}: {q}");
        }
    }

    #[test]
    fn quadform_of_zero_direction_is_zero() {
        let d = instance_a();
        let z = FactorPair::zeros(1, 1, 1);
        let dir = Direction::zeros_like(&z);
        assert_eq!(hessian_quadform(&z, &dir, &d, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn assembled_hessian_at_origin() {
        let d = instance_a();
        let z = FactorPair::zeros(1, 1, 1);
        let h = assemble_hessian(&z, &d, 1.0).unwrap();
        assert_eq!(h.shape(), (2, 2));
        assert!(h[(0, 0)].abs() < 1e-12);
        assert!(h[(1, 1)].abs() < 1e-12);
        assert!((h[(0, 1)] + 12.0).abs() < 1e-12);
        assert!((h[(1, 0)] + 12.0).abs() < 1e-12);
        let eig = sym_eig(&h).unwrap();
        assert!((eig.min_value() + 12.0).abs() < 1e-12);
    }

    #[test]
    fn hessian_reproduces_quadform_and_is_symmetric() {
        let x = Matrix::<f64>::from_rows(&[vec![1.0, 0.4, -0.3], vec![0.2, 1.5, 0.8]]).unwrap();
        let y = Matrix::from_rows(&[vec![0.7, -1.0, 0.5], vec![1.2, 0.3, -0.4]]).unwrap();
        let d = Dataset::new(x, y).unwrap();
        let z = FactorPair {
            w2: Matrix::from_rows(&[vec![0.5, -0.2], vec![1.0, 0.3]]).unwrap(),
            w1: Matrix::from_rows(&[vec![0.1, 0.9], vec![-0.4, 0.2]]).unwrap(),
        };
        let mu = 0.7;
        let h = assemble_hessian(&z, &d, mu).unwrap();
        assert!((&h - &h.transpose()).norm() <= 1e-9 * h.norm());

        // v' H v against the quadratic form along the gradient direction.
        let g = crate::model::grad(&z, &d, mu).unwrap();
        let v = Matrix::col_vec(&flatten_direction(&g));
        let vhv = (&v.transpose() * &(&h * &v))[(0, 0)];
        let q = hessian_quadform(&z, &g, &d, mu).unwrap();
        assert!((vhv - q).abs() <= 1e-8 * q.abs().max(1.0));
    }

    #[test]
    fn flatten_roundtrip() {
        let z = FactorPair::<f64>::zeros(2, 3, 2);
        let dir = Direction {
            dw2: Matrix::from_fn(2, 3, |i, j| (i * 3 + j) as f64),
            dw1: Matrix::from_fn(3, 2, |i, j| 10.0 + (i * 2 + j) as f64),
        };
        let flat = flatten_direction(&dir);
        assert_eq!(flat.len(), 12);
        assert_eq!(unflatten_direction(&z, &flat), dir);
    }

    #[test]
    fn oversized_hessian_refused() {
        let x = Matrix::<f64>::identity(40);
        let y = Matrix::from_fn(70, 40, |i, j| ((i + j) % 3) as f64 - 1.0);
        let d = Dataset::new(x, y).unwrap();
        let z = FactorPair::zeros(70, 40, 40);
        assert!(matches!(
            assemble_hessian(&z, &d, 1.0),
            Err(ModelError::TooLarge { n: 4400, .. })
        ));
    }
}
