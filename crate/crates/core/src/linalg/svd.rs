use crate::linalg::{LinalgError, Matrix};
use crate::{tol, Scalar};

/// Reduced singular value decomposition `A = U * diag(S) * V'`.
///
/// `U` is m x k and `V` is n x k with orthonormal columns; `S` holds the k
/// singular values above the rank drop tolerance, sorted descending. The
/// factorization is deterministic: the largest-magnitude entry of each left
/// singular vector is forced positive.
#[derive(Debug, Clone)]
pub struct SvdTriple<T> {
    pub u: Matrix<T>,
    pub s: Vec<T>,
    pub v: Matrix<T>,
}

impl<T: Scalar> SvdTriple<T> {
    /// Numerical rank: the number of retained singular values.
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// `U * diag(S) * V'`.
    pub fn reconstruct(&self) -> Matrix<T> {
        let mut scaled = self.u.clone();
        for j in 0..self.s.len() {
            for i in 0..scaled.rows() {
                scaled[(i, j)] = scaled[(i, j)] * self.s[j];
            }
        }
        &scaled * &self.v.transpose()
    }
}

/// Relative drop tolerance for the numerical rank cutoff.
///
/// Singular values at or below `1e-12 * max(m, n) * s_max` are treated as
/// zero: a machine-scale surrogate for the exact-rank assumption the
/// closed-form constructions rely on.
pub const RANK_DROP_TOL: f64 = 1e-12;

const MAX_SWEEPS: usize = 64;

/// Reduced SVD of a dense matrix by one-sided Jacobi orthogonalization.
///
/// Returns [`LinalgError::ZeroMatrix`] when every singular value falls below
/// the drop tolerance. Accuracy: the reconstruction `U diag(S) V'` matches
/// `A` to a small multiple of machine precision relative to `||A||_F`.
pub fn reduced_svd<T: Scalar>(a: &Matrix<T>) -> Result<SvdTriple<T>, LinalgError> {
    // One-sided Jacobi wants at least as many rows as columns; transposing
    // swaps the roles of U and V.
    if a.rows() < a.cols() {
        let t = jacobi_svd(&a.transpose())?;
        return Ok(fix_signs(SvdTriple { u: t.v, s: t.s, v: t.u }));
    }
    Ok(fix_signs(jacobi_svd(a)?))
}

/// Core one-sided Jacobi loop for m >= n.
fn jacobi_svd<T: Scalar>(a: &Matrix<T>) -> Result<SvdTriple<T>, LinalgError> {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    let mut g = a.clone();
    let mut v = Matrix::identity(n);
    let eps = T::epsilon();
    // Columns whose energy falls below rounding noise are already zero for
    // factorization purposes; rotating against them never converges because
    // the relative threshold collapses with the column norm.
    let noise_floor = {
        let f = eps * a.norm();
        f * f
    };

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut app = T::zero();
                let mut aqq = T::zero();
                let mut apq = T::zero();
                for i in 0..m {
                    let gp = g[(i, p)];
                    let gq = g[(i, q)];
                    app = app + gp * gp;
                    aqq = aqq + gq * gq;
                    apq = apq + gp * gq;
                }
                if app <= noise_floor || aqq <= noise_floor {
                    continue;
                }
                if apq.abs() <= eps * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                // Rotation angle that zeroes the (p, q) inner product.
                let zeta = (aqq - app) / (T::real(2.0) * apq);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let gp = g[(i, p)];
                    let gq = g[(i, q)];
                    g[(i, p)] = c * gp - s * gq;
                    g[(i, q)] = s * gp + c * gq;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence { what: "one-sided Jacobi SVD", sweeps: MAX_SWEEPS });
    }

    // Column norms are the singular values; sort descending.
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<T> = (0..n)
        .map(|j| (0..m).map(|i| g[(i, j)] * g[(i, j)]).sum::<T>().sqrt())
        .collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());

    let sigma_max = norms[order[0]];
    let drop = tol::scaled::<T>(RANK_DROP_TOL) * T::from_usize(m.max(n)).unwrap() * sigma_max;
    let k = order.iter().take_while(|&&j| norms[j] > drop).count();
    if k == 0 {
        return Err(LinalgError::ZeroMatrix);
    }

    let mut u = Matrix::zeros(m, k);
    let mut vk = Matrix::zeros(n, k);
    let mut s = Vec::with_capacity(k);
    for (out, &j) in order[..k].iter().enumerate() {
        let sigma = norms[j];
        s.push(sigma);
        for i in 0..m {
            u[(i, out)] = g[(i, j)] / sigma;
        }
        for i in 0..n {
            vk[(i, out)] = v[(i, j)];
        }
    }
    Ok(SvdTriple { u, s, v: vk })
}

/// Force the largest-magnitude entry of each left singular vector positive,
/// compensating in V, so repeated factorizations agree bit-for-bit.
fn fix_signs<T: Scalar>(mut t: SvdTriple<T>) -> SvdTriple<T> {
    for j in 0..t.s.len() {
        let mut best = T::zero();
        let mut flip = false;
        for i in 0..t.u.rows() {
            let v = t.u[(i, j)];
            if v.abs() > best {
                best = v.abs();
                flip = v < T::zero();
            }
        }
        if flip {
            for i in 0..t.u.rows() {
                t.u[(i, j)] = -t.u[(i, j)];
            }
            for i in 0..t.v.rows() {
                t.v[(i, j)] = -t.v[(i, j)];
            }
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[Vec<f64>]) -> Matrix<f64> {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn scalar_1x1() {
        let t = reduced_svd(&mat(&[vec![2.0]])).unwrap();
        assert_eq!(t.s, vec![2.0]);
        assert_eq!(t.u[(0, 0)], 1.0);
        assert_eq!(t.v[(0, 0)], 1.0);
    }

    #[test]
    fn identity_2x2() {
        let t = reduced_svd(&Matrix::<f64>::identity(2)).unwrap();
        assert_eq!(t.s, vec![1.0, 1.0]);
        let uv = &t.u * &t.v.transpose();
        assert!((&uv - &Matrix::identity(2)).norm() < 1e-14);
    }

    #[test]
    fn diagonal_3_1() {
        // Hand eigendecomposition of diag(3, 1): singular vectors are the
        // standard basis up to sign, values (3, 1).
        let t = reduced_svd(&mat(&[vec![3.0, 0.0], vec![0.0, 1.0]])).unwrap();
        assert_eq!(t.s, vec![3.0, 1.0]);
        for j in 0..2 {
            // Sign convention picks the +1 representative.
            assert!((t.u[(j, j)] - 1.0).abs() < 1e-14);
            assert!((t.v[(j, j)] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_matrix_rejected() {
        let z = Matrix::<f64>::zeros(2, 3);
        assert_eq!(reduced_svd(&z).unwrap_err(), LinalgError::ZeroMatrix);
    }

    #[test]
    fn rank_deficient_drops_small_values() {
        // Rank one: second column is twice the first.
        let a = mat(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        let t = reduced_svd(&a).unwrap();
        assert_eq!(t.rank(), 1);
        assert!((&t.reconstruct() - &a).norm() < 1e-12 * a.norm());
    }

    #[test]
    fn wide_matrix_reconstructs() {
        let a = mat(&[vec![1.0, -2.0, 0.5, 3.0], vec![0.0, 1.0, 4.0, -1.0]]);
        let t = reduced_svd(&a).unwrap();
        assert_eq!(t.u.shape(), (2, 2));
        assert_eq!(t.v.shape(), (4, 2));
        assert!((&t.reconstruct() - &a).norm() < 1e-13 * a.norm());
        let utu = t.u.gram_right();
        assert!((&utu - &Matrix::identity(2)).norm() < 1e-13);
        let vtv = t.v.gram_right();
        assert!((&vtv - &Matrix::identity(2)).norm() < 1e-13);
    }

    #[test]
    fn descending_order() {
        let a = mat(&[vec![1.0, 0.0, 0.0], vec![0.0, 5.0, 0.0], vec![0.0, 0.0, 3.0]]);
        let t = reduced_svd(&a).unwrap();
        assert_eq!(t.s, vec![5.0, 3.0, 1.0]);
    }
}
