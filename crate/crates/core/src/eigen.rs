//! Symmetric eigendecomposition via cyclic Jacobi rotations, the
//! eigenvalue-thresholded pseudoinverse built on it, and the low-rank
//! reconstruction error.
//!
//! Jacobi is quadratic-convergent and dependency free, which is all that is
//! needed at the core-matrix sizes this toolkit targets (r up to a couple
//! thousand).

use crate::error::{CoreError, Result};
use crate::matrix::{gemm, DenseMatrix};

const MAX_SWEEPS: usize = 64;

fn off_diagonal_norm(m: &DenseMatrix) -> f64 {
    let n = m.rows();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                let v = m.get(i, j);
                acc += v * v;
            }
        }
    }
    acc.sqrt()
}

/// Eigendecomposition of a symmetric matrix: returns `(eigenvalues, q)` with
/// `m = q * diag(eigenvalues) * q^T` and orthonormal columns in `q`.
/// Eigenvalues are unsorted (they land wherever the sweeps leave them).
///
/// The input is symmetrized as `(m + m^T) / 2` first, so callers may pass
/// matrices that are symmetric only up to roundoff.
pub fn sym_eigen(m: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    if !m.is_square() {
        return Err(CoreError::NotSquare {
            op: "sym_eigen",
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    if n == 0 {
        return Err(CoreError::EmptyInput { op: "sym_eigen" });
    }

    let mut a = DenseMatrix::from_fn(n, n, |i, j| 0.5 * (m.get(i, j) + m.get(j, i)));
    let mut q = DenseMatrix::identity(n);
    let norm = a.frobenius_norm();
    if norm == 0.0 {
        return Ok((vec![0.0; n], q));
    }
    let target = 1e-14 * norm;

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) < target {
            let eigenvalues = (0..n).map(|i| a.get(i, i)).collect();
            return Ok((eigenvalues, q));
        }
        for p in 0..n - 1 {
            for r in p + 1..n {
                let apr = a.get(p, r);
                if apr == 0.0 {
                    continue;
                }
                // Classic two-sided rotation choosing the smaller angle.
                let theta = (a.get(r, r) - a.get(p, p)) / (2.0 * apr);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a.get(k, p);
                    let akr = a.get(k, r);
                    a.set(k, p, c * akp - s * akr);
                    a.set(k, r, s * akp + c * akr);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let ark = a.get(r, k);
                    a.set(p, k, c * apk - s * ark);
                    a.set(r, k, s * apk + c * ark);
                }
                for k in 0..n {
                    let qkp = q.get(k, p);
                    let qkr = q.get(k, r);
                    q.set(k, p, c * qkp - s * qkr);
                    q.set(k, r, s * qkp + c * qkr);
                }
            }
        }
    }

    let offdiag = off_diagonal_norm(&a);
    if offdiag < target * 10.0 {
        // Stagnated within an order of magnitude of the target; the spectrum
        // is still accurate to far better than the tolerances used downstream.
        let eigenvalues = (0..n).map(|i| a.get(i, i)).collect();
        return Ok((eigenvalues, q));
    }
    Err(CoreError::NoConvergence {
        sweeps: MAX_SWEEPS,
        offdiag,
    })
}

/// Pseudoinverse of a symmetric positive semi-definite matrix.
///
/// The input is symmetrized, eigendecomposed, and eigenvalues with
/// `|lambda| <= tol * max|lambda|` are dropped while the rest are inverted.
/// The result is assembled as its upper triangle and mirrored, so it is
/// symmetric by construction.
pub fn pseudoinverse_spsd(m: &DenseMatrix, tol: f64) -> Result<DenseMatrix> {
    if !m.is_square() {
        return Err(CoreError::NotSquare {
            op: "pseudoinverse_spsd",
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    let (eigenvalues, q) = sym_eigen(m)?;
    let lambda_max = eigenvalues.iter().fold(0.0f64, |acc, l| acc.max(l.abs()));
    let cutoff = tol * lambda_max;
    let inverted: Vec<f64> = eigenvalues
        .iter()
        .map(|&l| if l.abs() <= cutoff { 0.0 } else { 1.0 / l })
        .collect();

    let mut out = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += q.get(i, k) * inverted[k] * q.get(j, k);
            }
            out.set(i, j, acc);
            out.set(j, i, acc);
        }
    }
    Ok(out)
}

/// Relative Frobenius error of the low-rank reconstruction
/// `B * pinv(C) * B^T` against `a`.
pub fn nystrom_error(
    a: &DenseMatrix,
    b: &DenseMatrix,
    c: &DenseMatrix,
    tol: f64,
) -> Result<f64> {
    if !a.is_square() {
        return Err(CoreError::NotSquare {
            op: "nystrom_error",
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if b.rows() != a.rows() || !c.is_square() || c.rows() != b.cols() {
        return Err(CoreError::DimensionMismatch {
            op: "nystrom_error",
            left_rows: b.rows(),
            left_cols: b.cols(),
            right_rows: c.rows(),
            right_cols: c.cols(),
        });
    }
    let approx = reconstruct(b, c, tol)?;
    a.relative_frobenius_distance(&approx)
}

/// The reconstruction `B * pinv(C) * B^T` itself.
pub fn reconstruct(b: &DenseMatrix, c: &DenseMatrix, tol: f64) -> Result<DenseMatrix> {
    let pinv = pseudoinverse_spsd(c, tol)?;
    let bp = gemm(b, &pinv, false)?;
    gemm(&bp, &b.transpose(), false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gen_block, Distribution, SketchSeed};

    fn random_spsd(n: usize, rank: usize, key: u64) -> DenseMatrix {
        let seed = SketchSeed::new(key, Distribution::Gaussian);
        let g = gen_block(seed, 0, n as u64, 0, rank as u64, n as u64).unwrap();
        gemm(&g, &g.transpose(), false).unwrap()
    }

    #[test]
    fn eigen_reconstructs_input() {
        let a = random_spsd(12, 12, 7);
        let (eigenvalues, q) = sym_eigen(&a).unwrap();
        let n = a.rows();
        let recon = DenseMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| q.get(i, k) * eigenvalues[k] * q.get(j, k)).sum()
        });
        assert!(a.relative_frobenius_distance(&recon).unwrap() < 1e-12);
        // Orthonormal columns.
        let qtq = gemm(&q, &q, true).unwrap();
        assert!(qtq.relative_frobenius_distance(&DenseMatrix::identity(n)).unwrap() < 1e-12);
    }

    #[test]
    fn diagonal_pseudoinverse() {
        let m = DenseMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 0.0]]);
        let p = pseudoinverse_spsd(&m, 1e-12).unwrap();
        assert!((p.get(0, 0) - 0.5).abs() < 1e-15);
        assert_eq!(p.get(1, 1), 0.0);
        assert_eq!(p.get(0, 1), 0.0);
    }

    #[test]
    fn identity_pseudoinverse_is_identity() {
        let p = pseudoinverse_spsd(&DenseMatrix::identity(5), 1e-12).unwrap();
        assert!(p.relative_frobenius_distance(&DenseMatrix::identity(5)).unwrap() < 1e-12);
    }

    #[test]
    fn moore_penrose_identities_on_rank_deficient_input() {
        let m = random_spsd(4, 2, 99);
        let p = pseudoinverse_spsd(&m, 1e-12).unwrap();
        let mpm = gemm(&gemm(&m, &p, false).unwrap(), &m, false).unwrap();
        let pmp = gemm(&gemm(&p, &m, false).unwrap(), &p, false).unwrap();
        assert!(m.relative_frobenius_distance(&mpm).unwrap() < 1e-10);
        assert!(p.relative_frobenius_distance(&pmp).unwrap() < 1e-10);
    }

    #[test]
    fn moore_penrose_identities_on_well_conditioned_inputs() {
        for key in [1u64, 2, 3] {
            let m = random_spsd(8, 8, key);
            let p = pseudoinverse_spsd(&m, 1e-12).unwrap();
            let mpm = gemm(&gemm(&m, &p, false).unwrap(), &m, false).unwrap();
            let pmp = gemm(&gemm(&p, &m, false).unwrap(), &p, false).unwrap();
            assert!(m.relative_frobenius_distance(&mpm).unwrap() < 1e-8);
            assert!(p.relative_frobenius_distance(&pmp).unwrap() < 1e-8);
            for i in 0..8 {
                for j in 0..8 {
                    assert_eq!(p.get(i, j).to_bits(), p.get(j, i).to_bits());
                }
            }
        }
    }

    #[test]
    fn exact_reconstruction_has_zero_error() {
        // Feeding B = A and C = A reconstructs A exactly for SPD A.
        let a = random_spsd(6, 6, 21);
        let err = nystrom_error(&a, &a, &a, 1e-12).unwrap();
        assert!(err <= 1e-12, "error {err}");
    }

    #[test]
    fn exact_rank_recovery() {
        // Rank-20 SPSD matrix sketched with r = 40 gaussian columns is
        // recovered to working precision.
        let n = 200;
        let a = random_spsd(n, 20, 4);
        let omega = gen_block(
            SketchSeed::new(11, Distribution::Gaussian),
            0,
            n as u64,
            0,
            40,
            n as u64,
        )
        .unwrap();
        let b = gemm(&a, &omega, false).unwrap();
        let c = gemm(&omega, &b, true).unwrap();
        let err = nystrom_error(&a, &b, &c, 1e-12).unwrap();
        assert!(err <= 1e-8, "error {err}");
    }

    #[test]
    fn error_is_invariant_under_congruent_permutation() {
        let n = 30;
        let r = 8;
        let a = random_spsd(n, 5, 17);
        let omega = gen_block(
            SketchSeed::new(5, Distribution::Gaussian),
            0,
            n as u64,
            0,
            r as u64,
            n as u64,
        )
        .unwrap();
        let b = gemm(&a, &omega, false).unwrap();
        let c = gemm(&omega, &b, true).unwrap();
        let base = nystrom_error(&a, &b, &c, 1e-12).unwrap();

        // Permute columns of B and apply the congruent permutation to C.
        let perm: Vec<usize> = (0..r).map(|j| (j * 3 + 1) % r).collect();
        let bp = DenseMatrix::from_fn(n, r, |i, j| b.get(i, perm[j]));
        let cp = DenseMatrix::from_fn(r, r, |i, j| c.get(perm[i], perm[j]));
        let permuted = nystrom_error(&a, &bp, &cp, 1e-12).unwrap();
        assert!((base - permuted).abs() < 1e-10, "{base} vs {permuted}");
    }

    #[test]
    fn shape_errors() {
        let a = DenseMatrix::zeros(3, 4);
        assert!(nystrom_error(&a, &a, &a, 1e-12).is_err());
        assert!(pseudoinverse_spsd(&a, 1e-12).is_err());
        let sq = DenseMatrix::identity(3);
        let b = DenseMatrix::zeros(3, 2);
        let c = DenseMatrix::zeros(3, 3);
        assert!(nystrom_error(&sq, &b, &c, 1e-12).is_err());
    }
}
