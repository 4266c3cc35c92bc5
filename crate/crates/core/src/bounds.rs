//! Communication lower bounds for sketching and for the two-multiply
//! low-rank pipeline, together with the analytic optimizers they come from
//! and the projection inequality that backs both.
//!
//! Both bounds solve a small constrained optimization problem whose optimum
//! is known in closed form by case analysis; the bound is the optimal
//! objective minus the words a rank can already own.

use crate::error::{CoreError, Result};

/// Which case of the closed-form solution applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundCase {
    Case1,
    Case2,
    Case3,
    Case4,
}

impl BoundCase {
    pub fn index(self) -> usize {
        match self {
            BoundCase::Case1 => 1,
            BoundCase::Case2 => 2,
            BoundCase::Case3 => 3,
            BoundCase::Case4 => 4,
        }
    }
}

impl std::fmt::Display for BoundCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "case{}", self.index())
    }
}

/// A lower bound on communicated words, the case that produced it, and the
/// optimizer point of the underlying minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    /// Minimum words any rank must send or receive.
    pub words: f64,
    pub case: BoundCase,
    /// Optimal data-access point `x*` (length 2 for sketching, 3 for the
    /// two-multiply pipeline).
    pub optimizer: Vec<f64>,
}

fn check_positive(value: u64, param: &'static str) -> Result<()> {
    if value == 0 {
        return Err(CoreError::InvalidParameter {
            param,
            requirement: "a positive count",
            value,
        });
    }
    Ok(())
}

/// Optimal `(x1, x2)` minimizing `x1 + x2` subject to
/// `x1 * x2 >= n1*n2*r/P`, `x1 >= n1*n2/P`, `x2 >= n1*r/P`.
pub fn rand_matmul_optimizer(n1: u64, n2: u64, r: u64, p: u64) -> (BoundCase, [f64; 2]) {
    let (n1f, n2f, rf, pf) = (n1 as f64, n2 as f64, r as f64, p as f64);
    if p <= n1 {
        (BoundCase::Case1, [n1f * n2f / pf, n1f * rf / pf])
    } else if p * r <= n1 * n2 {
        (BoundCase::Case2, [n1f * n2f / pf, rf])
    } else {
        let x = (n1f * n2f * rf / pf).sqrt();
        (BoundCase::Case3, [x, x])
    }
}

/// Lower bound on the words any load-balanced one-copy algorithm must
/// communicate to form an `n1 x n2` by `n2 x r` product when the second
/// operand can be generated rather than communicated. Requires `r < n2`.
pub fn rand_matmul_bound(n1: u64, n2: u64, r: u64, p: u64) -> Result<BoundResult> {
    check_positive(n1, "n1")?;
    check_positive(n2, "n2")?;
    check_positive(r, "r")?;
    check_positive(p, "P")?;
    if r >= n2 {
        return Err(CoreError::InvalidParameter {
            param: "r",
            requirement: "r < n2 (the sketch must reduce the contracted dimension)",
            value: r,
        });
    }
    let (case, x) = rand_matmul_optimizer(n1, n2, r, p);
    let pf = p as f64;
    let owned = (n1 * n2) as f64 / pf + (n1 * r) as f64 / pf;
    let words = (x[0] + x[1] - owned).max(0.0);
    Ok(BoundResult {
        words,
        case,
        optimizer: x.to_vec(),
    })
}

/// Optimal `(x1, x2, x3)` minimizing `x1 + x2 + x3` subject to
/// `x1*x2 >= n^2 r/P`, `x2*x3 >= n r^2/P`, `x1 >= n^2/P`, `x2 >= nr/P`,
/// `x3 >= r^2/P`.
pub fn nystrom_optimizer(n: u64, r: u64, p: u64) -> (BoundCase, [f64; 3]) {
    let (nf, rf, pf) = (n as f64, r as f64, p as f64);
    if p <= r {
        (
            BoundCase::Case1,
            [nf * nf / pf, nf * rf / pf, rf * rf / pf],
        )
    } else if p <= n {
        (BoundCase::Case2, [nf * nf / pf, nf * rf / pf, rf])
    } else if p * r <= n * (n + r) {
        (BoundCase::Case3, [nf * nf / pf, rf, nf * rf / pf])
    } else {
        let t = (nf * rf / ((nf + rf) * pf)).sqrt();
        (BoundCase::Case4, [nf * t, (nf + rf) * t, rf * t])
    }
}

/// Lower bound on communicated words for the two-multiply pipeline
/// (`B = A * sketch`, `C = sketch^T * B` with symmetric `n x n` input).
/// Requires `r < n`.
pub fn nystrom_bound(n: u64, r: u64, p: u64) -> Result<BoundResult> {
    check_positive(n, "n")?;
    check_positive(r, "r")?;
    check_positive(p, "P")?;
    if r >= n {
        return Err(CoreError::InvalidParameter {
            param: "r",
            requirement: "r < n",
            value: r,
        });
    }
    let (case, x) = nystrom_optimizer(n, r, p);
    let pf = p as f64;
    let owned = (n * n) as f64 / pf + (n * r) as f64 / pf + (r * r) as f64 / pf;
    let words = (x[0] + x[1] + x[2] - owned).max(0.0);
    Ok(BoundResult {
        words,
        case,
        optimizer: x.to_vec(),
    })
}

/// Sizes of the three pairwise plane projections of a finite point set in
/// Z^3, used to check `|V| <= |proj_ab| * |proj_bc|` for every pair of
/// projections that share an axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProjectionCheck {
    pub points: usize,
    pub proj_ij: usize,
    pub proj_jk: usize,
    pub proj_ki: usize,
}

impl ProjectionCheck {
    pub fn holds(&self) -> bool {
        let v = self.points;
        v <= self.proj_ij * self.proj_jk
            && v <= self.proj_jk * self.proj_ki
            && v <= self.proj_ki * self.proj_ij
    }
}

/// Computes the three pairwise projection sizes of `points`.
pub fn projection_check(points: &[(i64, i64, i64)]) -> ProjectionCheck {
    use std::collections::HashSet;
    let mut set = HashSet::new();
    let mut ij = HashSet::new();
    let mut jk = HashSet::new();
    let mut ki = HashSet::new();
    for &(i, j, k) in points {
        set.insert((i, j, k));
        ij.insert((i, j));
        jk.insert((j, k));
        ki.insert((k, i));
    }
    ProjectionCheck {
        points: set.len(),
        proj_ij: ij.len(),
        proj_jk: jk.len(),
        proj_ki: ki.len(),
    }
}
