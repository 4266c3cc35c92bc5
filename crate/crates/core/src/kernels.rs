//! Kernel (Gram) matrix construction from a point set.
//!
//! Points are the rows of the input matrix. Both kernels compute the upper
//! triangle and mirror it, so the result is symmetric to the last bit.

use crate::error::{CoreError, Result};
use crate::matrix::DenseMatrix;

fn check_points(x: &DenseMatrix, op: &'static str) -> Result<()> {
    if x.rows() == 0 || x.cols() == 0 {
        return Err(CoreError::EmptyInput { op });
    }
    Ok(())
}

/// Linear kernel: entry `(i, j)` is the inner product of points `i` and `j`.
/// The result is symmetric positive semi-definite with rank at most
/// `min(points, dimension)`.
pub fn kernel_linear(x: &DenseMatrix) -> Result<DenseMatrix> {
    check_points(x, "kernel_linear")?;
    let m = x.rows();
    let d = x.cols();
    let mut k = DenseMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let mut acc = 0.0;
            for c in 0..d {
                acc += x.get(i, c) * x.get(j, c);
            }
            k.set(i, j, acc);
            k.set(j, i, acc);
        }
    }
    Ok(k)
}

/// Radial basis function kernel with width `sigma`:
/// `exp(-||x_i - x_j||^2 / (2 sigma^2))`. The diagonal is exactly one and
/// all entries lie in `(0, 1]`.
pub fn kernel_rbf(x: &DenseMatrix, sigma: f64) -> Result<DenseMatrix> {
    check_points(x, "kernel_rbf")?;
    // NaN fails this comparison too.
    if sigma.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(CoreError::InvalidSigma { sigma });
    }
    let m = x.rows();
    let d = x.cols();
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mut k = DenseMatrix::zeros(m, m);
    for i in 0..m {
        k.set(i, i, 1.0);
        for j in (i + 1)..m {
            let mut dist2 = 0.0;
            for c in 0..d {
                let diff = x.get(i, c) - x.get(j, c);
                dist2 += diff * diff;
            }
            let v = (-dist2 * inv).exp();
            k.set(i, j, v);
            k.set(j, i, v);
        }
    }
    Ok(k)
}

/// The `||X||_F / sqrt(n)` width convention, where `n` is the number of
/// points. Exposed for the CLI's `--sigma frob` spelling.
pub fn rbf_sigma_frobenius(x: &DenseMatrix) -> f64 {
    x.frobenius_norm() / (x.rows() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::sym_eigen;

    #[test]
    fn identity_points_give_identity_kernel() {
        let k = kernel_linear(&DenseMatrix::identity(2)).unwrap();
        assert_eq!(k, DenseMatrix::identity(2));
    }

    #[test]
    fn duplicate_points_duplicate_kernel_rows() {
        let x = DenseMatrix::from_rows(&[
            vec![1.0, -2.0, 0.5],
            vec![0.25, 3.0, 1.0],
            vec![1.0, -2.0, 0.5],
        ]);
        let k = kernel_linear(&x).unwrap();
        for j in 0..3 {
            assert_eq!(k.get(0, j), k.get(2, j));
            assert_eq!(k.get(j, 0), k.get(j, 2));
        }
    }

    #[test]
    fn linear_kernel_rank_is_bounded_by_dimension() {
        // 10 points in R^3: the Gram matrix has rank at most 3.
        let x = DenseMatrix::from_fn(10, 3, |i, j| ((i * 7 + j * 13) % 11) as f64 / 11.0 - 0.4);
        let k = kernel_linear(&x).unwrap();
        let (mut eigenvalues, _) = sym_eigen(&k).unwrap();
        eigenvalues.sort_by(|a, b| b.abs().partial_cmp(&a.abs()).unwrap());
        let lambda_max = eigenvalues[0].abs();
        let significant = eigenvalues
            .iter()
            .filter(|l| l.abs() > 1e-10 * lambda_max)
            .count();
        assert!(significant <= 3, "rank {} exceeds dimension", significant);
    }

    #[test]
    fn kernels_are_symmetric_bitwise() {
        let x = DenseMatrix::from_fn(8, 4, |i, j| (i as f64 * 0.37 + j as f64 * 1.21).sin());
        for k in [kernel_linear(&x).unwrap(), kernel_rbf(&x, 0.8).unwrap()] {
            for i in 0..8 {
                for j in 0..8 {
                    assert_eq!(k.get(i, j).to_bits(), k.get(j, i).to_bits());
                }
            }
        }
    }

    #[test]
    fn rbf_diagonal_is_exactly_one() {
        let x = DenseMatrix::from_fn(6, 5, |i, j| (i + 2 * j) as f64 * 0.3);
        let k = kernel_rbf(&x, 2.5).unwrap();
        for i in 0..6 {
            assert_eq!(k.get(i, i), 1.0);
        }
    }

    #[test]
    fn rbf_at_distance_sigma_sqrt_two_is_inv_e() {
        let sigma = 0.7;
        let d = sigma * 2.0f64.sqrt();
        let x = DenseMatrix::from_rows(&[vec![0.0], vec![d]]);
        let k = kernel_rbf(&x, sigma).unwrap();
        assert!((k.get(0, 1) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn rbf_entries_approach_one_for_wide_kernels() {
        let x = DenseMatrix::from_fn(5, 3, |i, j| (i * 3 + j) as f64);
        let k = kernel_rbf(&x, 1e6).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert!(k.get(i, j) > 0.999_999);
                assert!(k.get(i, j) <= 1.0);
            }
        }
    }

    #[test]
    fn rbf_rejects_nonpositive_sigma() {
        let x = DenseMatrix::identity(2);
        assert!(kernel_rbf(&x, 0.0).is_err());
        assert!(kernel_rbf(&x, -1.0).is_err());
        assert!(kernel_linear(&DenseMatrix::zeros(0, 0)).is_err());
    }
}
