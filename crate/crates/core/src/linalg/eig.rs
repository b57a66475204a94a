use crate::linalg::{LinalgError, Matrix};
use crate::Scalar;

/// Full spectrum of a symmetric matrix.
///
/// `values` is sorted ascending; column `i` of `vectors` is the unit
/// eigenvector paired with `values[i]`, with its largest-magnitude entry
/// forced positive so the decomposition is deterministic.
#[derive(Debug, Clone)]
pub struct SymEig<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

impl<T: Scalar> SymEig<T> {
    pub fn min_value(&self) -> T {
        self.values[0]
    }

    pub fn min_vector(&self) -> Vec<T> {
        self.vectors.column(0)
    }

    /// `V * diag(values) * V'`.
    pub fn reconstruct(&self) -> Matrix<T> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            for i in 0..n {
                scaled[(i, j)] = scaled[(i, j)] * self.values[j];
            }
        }
        &scaled * &self.vectors.transpose()
    }
}

const MAX_SWEEPS: usize = 64;

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// The input is symmetrized as `(A + A') / 2` before solving, so callers may
/// pass matrices that are symmetric only up to rounding. Returns
/// [`LinalgError::NotSquare`] for rectangular input.
pub fn sym_eig<T: Scalar>(a: &Matrix<T>) -> Result<SymEig<T>, LinalgError> {
    let (m, n) = a.shape();
    if m != n {
        return Err(LinalgError::NotSquare { rows: m, cols: n });
    }

    let half = T::real(0.5);
    let mut w = Matrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)]) * half);
    let mut v = Matrix::identity(n);
    let eps = T::epsilon();
    let scale = w.norm().max(T::min_positive_value());

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + w[(p, q)] * w[(p, q)];
            }
        }
        if off.sqrt() <= eps * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = w[(p, q)];
                if apq.abs() <= eps * eps * scale {
                    continue;
                }
                let theta = (w[(q, q)] - w[(p, p)]) / (T::real(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (T::one() + theta * theta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let wip = w[(i, p)];
                    let wiq = w[(i, q)];
                    w[(i, p)] = c * wip - s * wiq;
                    w[(i, q)] = s * wip + c * wiq;
                }
                for j in 0..n {
                    let wpj = w[(p, j)];
                    let wqj = w[(q, j)];
                    w[(p, j)] = c * wpj - s * wqj;
                    w[(q, j)] = s * wpj + c * wqj;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip - s * viq;
                    v[(i, q)] = s * vip + c * viq;
                }
            }
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence { what: "Jacobi eigensolver", sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| w[(i, i)]).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());

    let values: Vec<T> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (out, &j) in order.iter().enumerate() {
        let col = v.column(j);
        let mut best = T::zero();
        let mut flip = false;
        for &x in &col {
            if x.abs() > best {
                best = x.abs();
                flip = x < T::zero();
            }
        }
        for i in 0..n {
            vectors[(i, out)] = if flip { -col[i] } else { col[i] };
        }
    }
    Ok(SymEig { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exchange_matrix() {
        let a = Matrix::<f64>::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let e = sym_eig(&a).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15);
        assert!((e.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_matrix() {
        let e = sym_eig(&Matrix::<f64>::zeros(2, 2)).unwrap();
        assert_eq!(e.values, vec![0.0, 0.0]);
    }

    #[test]
    fn off_diagonal_negative_pair() {
        // The 2x2 form [[0, -12], [-12, 0]] that shows up as an assembled
        // curvature matrix: eigenvalues -12 and 12 by direct computation.
        let a = Matrix::<f64>::from_rows(&[vec![0.0, -12.0], vec![-12.0, 0.0]]).unwrap();
        let e = sym_eig(&a).unwrap();
        assert!((e.min_value() + 12.0).abs() < 1e-12);
        assert!((e.values[1] - 12.0).abs() < 1e-12);
    }

    #[test]
    fn rectangular_rejected() {
        let a = Matrix::<f64>::zeros(2, 3);
        assert_eq!(sym_eig(&a).unwrap_err(), LinalgError::NotSquare { rows: 2, cols: 3 });
    }

    #[test]
    fn eigenvector_residual() {
        let a = Matrix::from_rows(&[
            vec![4.0, 1.0, -2.0],
            vec![1.0, 3.0, 0.5],
            vec![-2.0, 0.5, 1.0],
        ])
        .unwrap();
        let e = sym_eig(&a).unwrap();
        for i in 0..3 {
            let v = Matrix::col_vec(&e.vectors.column(i));
            let residual = &(&a * &v) - &v.scale(e.values[i]);
            assert!(residual.norm() < 1e-8 * a.norm(), "residual {}", residual.norm());
        }
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }
}
