//! Model communication costs of the two distributed algorithms on a given
//! processor grid, and grid selection that matches the lower-bound cases
//! with an exhaustive fallback.
//!
//! Bandwidth terms are evaluated as `block - block / q` so that on divisible
//! instances every intermediate is an exact integer in floating point and
//! predictions compare bit-for-bit against the metered totals.

use crate::bounds::{nystrom_optimizer, rand_matmul_optimizer, BoundCase};
use crate::error::{CoreError, Result};
use crate::grid::{factor_triples, GridSpec};

/// One collective's share of a predicted cost.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTerm {
    pub label: &'static str,
    pub words: f64,
}

/// Predicted per-rank communication of an algorithm on a fixed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CostPrediction {
    /// Model words per rank; always the sum of `terms`.
    pub bandwidth_words: f64,
    /// Model message count per rank.
    pub latency_messages: u64,
    pub terms: Vec<CostTerm>,
}

impl CostPrediction {
    fn from_terms(terms: Vec<CostTerm>, latency_messages: u64) -> Self {
        let bandwidth_words = terms.iter().map(|t| t.words).sum();
        CostPrediction {
            bandwidth_words,
            latency_messages,
            terms,
        }
    }
}

/// Which of the two pipeline layouts drives grid selection: change the
/// layout of the intermediate between the two multiplies, or keep one grid
/// and pay the larger final reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NystromVariant {
    Redist,
    NoRedist,
}

impl std::fmt::Display for NystromVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NystromVariant::Redist => write!(f, "redist"),
            NystromVariant::NoRedist => write!(f, "noredist"),
        }
    }
}

impl std::str::FromStr for NystromVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "redist" => Ok(NystromVariant::Redist),
            "noredist" | "no-redist" => Ok(NystromVariant::NoRedist),
            other => Err(format!("unknown variant `{other}` (expected redist or noredist)")),
        }
    }
}

pub(crate) fn ceil_log2(q: usize) -> u64 {
    if q <= 1 {
        0
    } else {
        (usize::BITS - (q - 1).leading_zeros()) as u64
    }
}

/// `(1 - 1/q) * whole`, written so divisible inputs stay exact.
fn collective_words(whole: f64, q: usize) -> f64 {
    if q <= 1 {
        0.0
    } else {
        whole - whole / q as f64
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    num as f64 / den as f64
}

/// Raw model words per rank of the sketch multiply on `grid`, defined for
/// any factor triple (no divisibility requirements).
pub fn rand_matmul_model_words(n1: u64, n2: u64, r: u64, grid: &GridSpec) -> f64 {
    let [p1, p2, p3] = grid.dims();
    let block_a = ratio(n1 * n2, (p1 * p2) as u64);
    let block_b = ratio(n1 * r, (p1 * p3) as u64);
    collective_words(block_a, p3) + collective_words(block_b, p2)
}

pub fn rand_matmul_model_latency(grid: &GridSpec) -> u64 {
    let [_, p2, p3] = grid.dims();
    ceil_log2(p3) + ceil_log2(p2)
}

fn check_divides(dim: u64, by: usize, dims: [usize; 3], target: &str) -> Result<()> {
    if !dim.is_multiple_of(by as u64) {
        return Err(CoreError::GridDivisibility {
            dims,
            target: target.to_string(),
        });
    }
    Ok(())
}

/// Predicted per-rank communication of the sketch multiply. The grid must
/// divide `(n1, n2, r)` dimension-wise.
pub fn rand_matmul_cost(n1: u64, n2: u64, r: u64, grid: &GridSpec) -> Result<CostPrediction> {
    let [p1, p2, p3] = grid.dims();
    check_divides(n1, p1, grid.dims(), &format!("{n1}x{n2} * {n2}x{r}"))?;
    check_divides(n2, p2, grid.dims(), &format!("{n1}x{n2} * {n2}x{r}"))?;
    check_divides(r, p3, grid.dims(), &format!("{n1}x{n2} * {n2}x{r}"))?;
    let block_a = ratio(n1 * n2, (p1 * p2) as u64);
    let block_b = ratio(n1 * r, (p1 * p3) as u64);
    let terms = vec![
        CostTerm {
            label: "all_gather_a",
            words: collective_words(block_a, p3),
        },
        CostTerm {
            label: "reduce_scatter_b",
            words: collective_words(block_b, p2),
        },
    ];
    Ok(CostPrediction::from_terms(terms, rand_matmul_model_latency(grid)))
}

/// Raw model words per rank of the full pipeline on `(pi, psi)` including
/// the layout change between the multiplies when the grids differ.
pub fn nystrom_model_words(n: u64, r: u64, pi: &GridSpec, psi: &GridSpec) -> f64 {
    let [p1, p2, p3] = pi.dims();
    let [q1, q2, q3] = psi.dims();
    let p = pi.size() as u64;
    let block_a = ratio(n * n, (p1 * p2) as u64);
    let block_bhat = ratio(n * r, (p1 * p3) as u64);
    let block_b = ratio(n * r, (q1 * q3) as u64);
    let block_c = ratio(r * r, (q2 * q3) as u64);
    let redistribution = if pi == psi { 0.0 } else { ratio(n * r, p) };
    collective_words(block_a, p3)
        + collective_words(block_bhat, p2)
        + redistribution
        + collective_words(block_b, q2)
        + collective_words(block_c, q1)
}

pub fn nystrom_model_latency(pi: &GridSpec, psi: &GridSpec) -> u64 {
    let [_, p2, p3] = pi.dims();
    let [q1, q2, _] = psi.dims();
    let redistribution = if pi == psi { 0 } else { (pi.size() - 1) as u64 };
    ceil_log2(p3) + ceil_log2(p2) + redistribution + ceil_log2(q2) + ceil_log2(q1)
}

/// Predicted per-rank communication of the pipeline. `pi` must divide
/// `(n, n, r)` and `psi` must divide `(n, r, r)`; both grids must factor the
/// same processor count.
pub fn nystrom_cost(n: u64, r: u64, pi: &GridSpec, psi: &GridSpec) -> Result<CostPrediction> {
    if pi.size() != psi.size() {
        return Err(CoreError::GridSizeMismatch {
            dims: psi.dims(),
            procs: pi.size(),
        });
    }
    let [p1, p2, p3] = pi.dims();
    let [q1, q2, q3] = psi.dims();
    let what = format!("pipeline n={n} r={r}");
    check_divides(n, p1, pi.dims(), &what)?;
    check_divides(n, p2, pi.dims(), &what)?;
    check_divides(r, p3, pi.dims(), &what)?;
    check_divides(n, q1, psi.dims(), &what)?;
    check_divides(r, q2, psi.dims(), &what)?;
    check_divides(r, q3, psi.dims(), &what)?;

    let p = pi.size() as u64;
    let block_a = ratio(n * n, (p1 * p2) as u64);
    let block_bhat = ratio(n * r, (p1 * p3) as u64);
    let block_b = ratio(n * r, (q1 * q3) as u64);
    let block_c = ratio(r * r, (q2 * q3) as u64);
    let redistribution = if pi == psi { 0.0 } else { ratio(n * r, p) };
    let terms = vec![
        CostTerm {
            label: "all_gather_a",
            words: collective_words(block_a, p3),
        },
        CostTerm {
            label: "reduce_scatter_bhat",
            words: collective_words(block_bhat, p2),
        },
        CostTerm {
            label: "redistribute",
            words: redistribution,
        },
        CostTerm {
            label: "all_gather_b",
            words: collective_words(block_b, q2),
        },
        CostTerm {
            label: "reduce_scatter_c",
            words: collective_words(block_c, q1),
        },
    ];
    Ok(CostPrediction::from_terms(terms, nystrom_model_latency(pi, psi)))
}

/// True when `grid` divides the sketch-multiply extents dimension-wise
/// (enough for cost predictions to be meaningful).
pub fn rand_matmul_grid_divides(n1: u64, n2: u64, r: u64, grid: &GridSpec) -> bool {
    let [p1, p2, p3] = grid.dims();
    n1.is_multiple_of(p1 as u64) && n2.is_multiple_of(p2 as u64) && r.is_multiple_of(p3 as u64)
}

/// True when the sketch multiply can actually run on `grid`: the grid
/// divides the extents and both collectives get evenly splittable buffers.
pub fn rand_matmul_grid_valid(n1: u64, n2: u64, r: u64, grid: &GridSpec) -> bool {
    let [p1, p2, p3] = grid.dims();
    let (p1, p2, p3) = (p1 as u64, p2 as u64, p3 as u64);
    rand_matmul_grid_divides(n1, n2, r, grid)
        && ((n1 / p1) * (n2 / p2)).is_multiple_of(p3)
        && ((n1 / p1) * (r / p3)).is_multiple_of(p2)
}

/// Dimension-wise divisibility for the grid pair.
pub fn nystrom_grids_divide(n: u64, r: u64, pi: &GridSpec, psi: &GridSpec) -> bool {
    let [q1, q2, q3] = psi.dims();
    rand_matmul_grid_divides(n, n, r, pi)
        && pi.size() == psi.size()
        && n.is_multiple_of(q1 as u64)
        && r.is_multiple_of(q2 as u64)
        && r.is_multiple_of(q3 as u64)
}

/// True when the pipeline can run on `(pi, psi)`.
pub fn nystrom_grids_valid(n: u64, r: u64, pi: &GridSpec, psi: &GridSpec) -> bool {
    let [q1, q2, q3] = psi.dims();
    let (q1, q2, q3) = (q1 as u64, q2 as u64, q3 as u64);
    nystrom_grids_divide(n, r, pi, psi)
        && rand_matmul_grid_valid(n, n, r, pi)
        && ((n / q1) * (r / q3)).is_multiple_of(q2)
        && ((r / q2) * (r / q3)).is_multiple_of(q1)
}

fn exact_sqrt_factor(num: u128, den: u128) -> Option<usize> {
    // Integer x with x^2 * den == num, if one exists.
    if den == 0 || !num.is_multiple_of(den) {
        return None;
    }
    let target = num / den;
    let x = (target as f64).sqrt().round() as u128;
    for cand in x.saturating_sub(1)..=x + 1 {
        if cand * cand == target {
            return usize::try_from(cand).ok();
        }
    }
    None
}

/// Picks the processor grid for the sketch multiply: the case-matching grid
/// when it is integral and runnable, otherwise the runnable factor triple of
/// `P` with the fewest model words (and the cheapest triple outright when no
/// factorization is runnable, e.g. coprime dimensions).
pub fn select_rand_matmul_grid(n1: u64, n2: u64, r: u64, p: u64) -> Result<GridSpec> {
    if p == 0 {
        return Err(CoreError::InvalidParameter {
            param: "P",
            requirement: "a positive processor count",
            value: p,
        });
    }
    let (case, _) = rand_matmul_optimizer(n1, n2, r, p);
    let analytic = match case {
        BoundCase::Case1 => GridSpec::new(p as usize, 1, 1).ok(),
        BoundCase::Case2 => {
            if p.is_multiple_of(n1) {
                GridSpec::new(n1 as usize, (p / n1) as usize, 1).ok()
            } else {
                None
            }
        }
        _ => {
            let p2 = exact_sqrt_factor(p as u128 * n2 as u128, r as u128 * n1 as u128);
            let p3 = exact_sqrt_factor(p as u128 * r as u128, n1 as u128 * n2 as u128);
            match (p2, p3) {
                (Some(p2), Some(p3)) if p2 > 0 && p3 > 0 => {
                    GridSpec::new(n1 as usize, p2, p3).ok()
                }
                _ => None,
            }
        }
    };
    if let Some(grid) = analytic {
        if grid.size() as u64 == p && rand_matmul_grid_divides(n1, n2, r, &grid) {
            return Ok(grid);
        }
    }
    Ok(cheapest_triple(p as usize, |g| {
        let tier = if rand_matmul_grid_valid(n1, n2, r, g) {
            2
        } else if rand_matmul_grid_divides(n1, n2, r, g) {
            1
        } else {
            0
        };
        (tier, rand_matmul_model_words(n1, n2, r, g))
    }))
}

/// Minimum-cost factor triple under `score`; higher tiers (runnable, then
/// merely divisible) win over cheaper-but-unusable grids, and ties keep the
/// first triple in enumeration order so the choice is deterministic.
fn cheapest_triple(p: usize, score: impl Fn(&GridSpec) -> (u8, f64)) -> GridSpec {
    let triples = factor_triples(p);
    let mut best: Option<(u8, f64, GridSpec)> = None;
    for g in triples {
        let (tier, words) = score(&g);
        let better = match &best {
            None => true,
            Some((bt, bw, _)) => tier > *bt || (tier == *bt && words < *bw),
        };
        if better {
            best = Some((tier, words, g));
        }
    }
    best.expect("P >= 1 always has the trivial factorization").2
}

/// Picks the pair of grids for the pipeline.
///
/// With [`NystromVariant::Redist`] the pair follows the lower-bound cases
/// (first grid for the big multiply, second reshaped for the small one, with
/// a layout change in between). With [`NystromVariant::NoRedist`] the first
/// grid is the sketch-multiply choice and the second is the same grid, so no
/// layout change is needed. Non-integral or non-runnable case formulas fall
/// back to exhaustive search over factor-triple pairs minimizing model words.
pub fn select_nystrom_grids(
    n: u64,
    r: u64,
    p: u64,
    variant: NystromVariant,
) -> Result<(GridSpec, GridSpec)> {
    if p == 0 {
        return Err(CoreError::InvalidParameter {
            param: "P",
            requirement: "a positive processor count",
            value: p,
        });
    }
    match variant {
        NystromVariant::NoRedist => {
            let candidate = select_rand_matmul_grid(n, n, r, p)?;
            if nystrom_grids_divide(n, r, &candidate, &candidate) {
                return Ok((candidate, candidate));
            }
            let best = cheapest_triple(p as usize, |g| {
                let tier = if nystrom_grids_valid(n, r, g, g) {
                    2
                } else if nystrom_grids_divide(n, r, g, g) {
                    1
                } else {
                    0
                };
                (tier, nystrom_model_words(n, r, g, g))
            });
            Ok((best, best))
        }
        NystromVariant::Redist => {
            let (case, _) = nystrom_optimizer(n, r, p);
            let analytic = redist_case_grids(n, r, p, case);
            if let Some((pi, psi)) = analytic {
                if pi.size() as u64 == p
                    && psi.size() as u64 == p
                    && nystrom_grids_divide(n, r, &pi, &psi)
                {
                    return Ok((pi, psi));
                }
                log::debug!(
                    "case-{} grids {pi} / {psi} for n={n} r={r} P={p} do not multiply out \
                     to P or do not divide the extents; falling back to enumeration",
                    case.index()
                );
            }
            Ok(cheapest_grid_pair(n, r, p as usize))
        }
    }
}

fn redist_case_grids(n: u64, r: u64, p: u64, case: BoundCase) -> Option<(GridSpec, GridSpec)> {
    let g = |a: u64, b: u64, c: u64| -> Option<GridSpec> {
        GridSpec::new(
            usize::try_from(a).ok()?,
            usize::try_from(b).ok()?,
            usize::try_from(c).ok()?,
        )
        .ok()
    };
    match case {
        BoundCase::Case1 => Some((g(p, 1, 1)?, g(1, 1, p)?)),
        BoundCase::Case2 => {
            if !p.is_multiple_of(r) {
                return None;
            }
            Some((g(p, 1, 1)?, g(p / r, 1, r)?))
        }
        BoundCase::Case3 => {
            if !p.is_multiple_of(n) || !n.is_multiple_of(r) {
                return None;
            }
            Some((g(n, p / n, 1)?, g(n / r, p / n, r)?))
        }
        BoundCase::Case4 => {
            let p2 = exact_sqrt_factor((n + r) as u128 * p as u128, n as u128 * r as u128)?;
            let p3 = exact_sqrt_factor(r as u128 * p as u128, n as u128 * (n + r) as u128)?;
            // Second grid's leading dimension as stated in the case
            // analysis; it rarely multiplies out to P, in which case the
            // caller falls back to enumeration.
            let q1 = exact_sqrt_factor(
                n as u128 * n as u128 * n as u128 * p as u128,
                r as u128 * r as u128 * r as u128 * (n + r) as u128,
            )?;
            let pi = g(n, p2 as u64, p3 as u64)?;
            let psi = g(q1 as u64, p2 as u64, r)?;
            Some((pi, psi))
        }
    }
}

fn cheapest_grid_pair(n: u64, r: u64, p: usize) -> (GridSpec, GridSpec) {
    let triples = factor_triples(p);
    let mut best: Option<(u8, f64, (GridSpec, GridSpec))> = None;
    for pi in &triples {
        for psi in &triples {
            let tier = if nystrom_grids_valid(n, r, pi, psi) {
                2
            } else if nystrom_grids_divide(n, r, pi, psi) {
                1
            } else {
                0
            };
            let words = nystrom_model_words(n, r, pi, psi);
            let better = match &best {
                None => true,
                Some((bt, bw, _)) => tier > *bt || (tier == *bt && words < *bw),
            };
            if better {
                best = Some((tier, words, (*pi, *psi)));
            }
        }
    }
    best.expect("P >= 1 always has the trivial factorization").2
}
