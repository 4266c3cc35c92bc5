//! Brute-force constrained searches used as independent oracles by the test
//! suites. Nothing here knows about the closed-form case solutions it is
//! used to validate: the minima are found by logarithmic grid search over
//! the feasible box, refined by coordinate descent (each coordinate has a
//! closed-form feasible minimum given the others) and a final ternary polish
//! on the one-dimensional reduction.

const GRID_POINTS: usize = 200;
const DESCENT_ROUNDS: usize = 200;
const TERNARY_ITERS: usize = 200;

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let lo = lo.max(1e-300);
    let hi = hi.max(lo * (1.0 + 1e-12));
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (llo + (lhi - llo) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

fn ternary_min(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..TERNARY_ITERS {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    f(0.5 * (lo + hi))
}

/// Minimum of `x1 + x2` subject to `x1*x2 >= n1*n2*r/P`, `x1 >= n1*n2/P`,
/// `x2 >= n1*r/P`.
pub fn rand_matmul_search_minimum(n1: u64, n2: u64, r: u64, p: u64) -> f64 {
    let pf = p as f64;
    let c0 = (n1 as f64) * (n2 as f64) * (r as f64) / pf;
    let l1 = (n1 as f64) * (n2 as f64) / pf;
    let l2 = (n1 as f64) * (r as f64) / pf;

    // For any x1 the cheapest feasible x2 is max(l2, c0/x1).
    let objective = |x1: f64| x1 + (c0 / x1).max(l2);

    let hi = (c0 / l2).max(l1) * 2.0 + 1.0;
    let mut best = f64::INFINITY;
    let mut best_x1 = l1;
    for x1 in log_grid(l1, hi, GRID_POINTS) {
        let v = objective(x1);
        if v < best {
            best = v;
            best_x1 = x1;
        }
    }

    // Coordinate descent: each coordinate's feasible minimum is closed form.
    let mut x1 = best_x1;
    let mut x2 = (c0 / x1).max(l2);
    for _ in 0..DESCENT_ROUNDS {
        let nx1 = (c0 / x2).max(l1);
        let nx2 = (c0 / nx1).max(l2);
        if (nx1 - x1).abs() <= 1e-15 * x1 && (nx2 - x2).abs() <= 1e-15 * x2 {
            x1 = nx1;
            x2 = nx2;
            break;
        }
        x1 = nx1;
        x2 = nx2;
    }
    best = best.min(x1 + x2);

    best.min(ternary_min(l1, hi, objective))
}

/// Minimum of `x1 + x2 + x3` subject to `x1*x2 >= n^2 r/P`,
/// `x2*x3 >= n r^2/P`, `x1 >= n^2/P`, `x2 >= nr/P`, `x3 >= r^2/P`.
pub fn nystrom_search_minimum(n: u64, r: u64, p: u64) -> f64 {
    let pf = p as f64;
    let (nf, rf) = (n as f64, r as f64);
    let c1 = nf * nf * rf / pf;
    let c2 = nf * rf * rf / pf;
    let l1 = nf * nf / pf;
    let l2 = nf * rf / pf;
    let l3 = rf * rf / pf;

    // Given x2, the cheapest feasible x1 and x3 are closed form.
    let objective = |x2: f64| x2 + (c1 / x2).max(l1) + (c2 / x2).max(l3);

    let hi = l2.max(c1 / l1).max(c2 / l3) * 2.0 + 1.0;
    let mut best = f64::INFINITY;
    let mut best_x2 = l2;
    for x2 in log_grid(l2, hi, GRID_POINTS) {
        let v = objective(x2);
        if v < best {
            best = v;
            best_x2 = x2;
        }
    }

    let mut x2 = best_x2;
    let mut x1 = (c1 / x2).max(l1);
    let mut x3 = (c2 / x2).max(l3);
    for _ in 0..DESCENT_ROUNDS {
        let nx2 = (c1 / x1).max(c2 / x3).max(l2);
        let nx1 = (c1 / nx2).max(l1);
        let nx3 = (c2 / nx2).max(l3);
        let stable = (nx1 - x1).abs() <= 1e-15 * x1
            && (nx2 - x2).abs() <= 1e-15 * x2
            && (nx3 - x3).abs() <= 1e-15 * x3;
        x1 = nx1;
        x2 = nx2;
        x3 = nx3;
        if stable {
            break;
        }
    }
    best = best.min(x1 + x2 + x3);

    best.min(ternary_min(l2, hi, objective))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fully_local_instances_cost_the_owned_shares() {
        // P = 1 can satisfy every constraint at the lower box corner.
        let v = rand_matmul_search_minimum(4, 8, 2, 1);
        assert!((v - (32.0 + 8.0)).abs() < 1e-9 * 40.0);
        let v = nystrom_search_minimum(8, 2, 1);
        assert!((v - (64.0 + 16.0 + 4.0)).abs() < 1e-9 * 84.0);
    }

    #[test]
    fn search_respects_product_constraint() {
        // n1=2, n2=4, r=2, P=16: corner is infeasible, optimum sits on the
        // product constraint at x1 = x2 = sqrt(n1 n2 r / P) = 1.
        let v = rand_matmul_search_minimum(2, 4, 2, 16);
        assert!((v - 2.0).abs() < 1e-9 * 2.0, "got {v}");
    }
}
