//! Slow, independent reference implementations used by the test suites.
//!
//! Nothing in the library's production paths calls into this module; it
//! exists so unit, property, and acceptance tests can cross-check the fast
//! implementations against exhaustive enumeration.

use crate::kernel::GramMatrix;

/// Nonconformity score by full grid enumeration: evaluate the false-inclusion
/// loss at every distinct surrogate value plus the sentinel, and take the
/// smallest value with loss at most `rho`, with no monotonicity shortcut.
pub fn brute_force_nonconformity(surrogates: &[f64], golds: &[f64], lambda: f64, rho: u32) -> f64 {
    assert_eq!(surrogates.len(), golds.len());
    assert!(!surrogates.is_empty());
    let mut grid = surrogates.to_vec();
    grid.sort_by(|a, b| a.total_cmp(b));
    grid.dedup();
    let max = *grid.last().unwrap();
    grid.push(max + 1.0);
    grid.into_iter()
        .filter(|&s| {
            let loss = surrogates
                .iter()
                .zip(golds)
                .filter(|(&surr, &gold)| surr >= s && gold < lambda)
                .count();
            loss as f64 <= f64::from(rho)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Pinball loss `ℓ_α(z) = (1−α)·max(z,0) + α·max(−z,0)`.
pub fn pinball(z: f64, alpha: f64) -> f64 {
    (1.0 - alpha) * z.max(0.0) + alpha * (-z).max(0.0)
}

/// Minimize the total pinball loss over constant fits. The minimum is
/// attained at an order statistic, so scanning the observed scores suffices;
/// returns the minimizing score and the objective there. When the minimizer
/// is an interval this returns its left endpoint.
pub fn pinball_constant_minimum(scores: &[f64], alpha: f64) -> (f64, f64) {
    assert!(!scores.is_empty());
    let mut best = (f64::NAN, f64::INFINITY);
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    for &beta in &sorted {
        let obj: f64 = scores.iter().map(|&s| pinball(s - beta, alpha)).sum();
        if obj < best.1 - 1e-15 {
            best = (beta, obj);
        }
    }
    best
}

/// Solution of the dual quantile-regression QP found by exhaustive
/// enumeration of active sets.
#[derive(Debug, Clone)]
pub struct QpOracleSolution {
    pub duals: Vec<f64>,
    pub intercept: f64,
    /// Optimal dual objective `(1/m)·υᵀS − υᵀKυ/(2γm²)`.
    pub dual_objective: f64,
}

#[derive(Clone, Copy, PartialEq)]
enum VarState {
    Lower,
    Upper,
    Free,
}

/// Solve the dual of the regularized kernel quantile regression
///
/// ```text
/// max  (1/m)·υᵀS − υᵀKυ/(2γm²)   s.t.  υ ∈ [−α, 1−α]^m,  Συ = 0
/// ```
///
/// by enumerating all 3^m assignments of each variable to {lower bound,
/// upper bound, free}, solving the stationarity system on the free set, and
/// keeping the best feasible KKT point. Only usable for small `m`.
pub fn active_set_qp_oracle(
    gram: &GramMatrix,
    scores: &[f64],
    alpha: f64,
    gamma: f64,
) -> QpOracleSolution {
    let m = scores.len();
    assert_eq!(gram.len(), m);
    assert!(m <= 8, "oracle enumerates 3^m states");
    let lo = -alpha;
    let up = 1.0 - alpha;
    let scale = 1.0 / (gamma * m as f64);
    let tol = 1e-9;

    let mut best: Option<QpOracleSolution> = None;
    for code in 0..3usize.pow(m as u32) {
        let mut states = Vec::with_capacity(m);
        let mut c = code;
        for _ in 0..m {
            states.push(match c % 3 {
                0 => VarState::Lower,
                1 => VarState::Upper,
                _ => VarState::Free,
            });
            c /= 3;
        }
        let free: Vec<usize> =
            (0..m).filter(|&i| states[i] == VarState::Free).collect();
        let mut duals: Vec<f64> = states
            .iter()
            .map(|s| match s {
                VarState::Lower => lo,
                VarState::Upper => up,
                VarState::Free => 0.0,
            })
            .collect();
        let fixed_sum: f64 = (0..m).filter(|i| states[*i] != VarState::Free).map(|i| duals[i]).sum();

        let nf = free.len();
        let intercept;
        if nf == 0 {
            if fixed_sum.abs() > tol {
                continue;
            }
            // β must separate the bound groups: g_i ≤ β at lower, ≥ β at upper.
            let g = |i: usize| {
                scores[i] - scale * (0..m).map(|j| gram.get(i, j) * duals[j]).sum::<f64>()
            };
            let mut lo_max = f64::NEG_INFINITY;
            let mut up_min = f64::INFINITY;
            for i in 0..m {
                match states[i] {
                    VarState::Lower => lo_max = lo_max.max(g(i)),
                    VarState::Upper => up_min = up_min.min(g(i)),
                    VarState::Free => unreachable!(),
                }
            }
            if lo_max > up_min + tol {
                continue;
            }
            intercept = 0.5 * (lo_max.max(-1e300) + up_min.min(1e300));
        } else {
            // Stationarity on the free set plus the sum constraint:
            //   scale·Σ_{j free} K_ij υ_j + β = S_i − scale·Σ_{j fixed} K_ij ῡ_j
            //   Σ_{j free} υ_j = −Σ fixed
            let n = nf + 1;
            let mut a = vec![0.0; n * n];
            let mut b = vec![0.0; n];
            for (r, &i) in free.iter().enumerate() {
                for (cidx, &j) in free.iter().enumerate() {
                    a[r * n + cidx] = scale * gram.get(i, j);
                }
                a[r * n + nf] = 1.0;
                let fixed_part: f64 = (0..m)
                    .filter(|j| states[*j] != VarState::Free)
                    .map(|j| gram.get(i, j) * duals[j])
                    .sum();
                b[r] = scores[i] - scale * fixed_part;
            }
            for (cidx, _) in free.iter().enumerate() {
                a[nf * n + cidx] = 1.0;
            }
            b[nf] = -fixed_sum;
            let Some(x) = solve_dense(&mut a, &mut b, n) else {
                continue;
            };
            let mut ok = true;
            for (r, &i) in free.iter().enumerate() {
                duals[i] = x[r];
                if x[r] < lo - tol || x[r] > up + tol {
                    ok = false;
                }
            }
            if !ok {
                continue;
            }
            intercept = x[nf];
            // Sign conditions on the bound variables.
            for i in 0..m {
                let g = scores[i]
                    - scale * (0..m).map(|j| gram.get(i, j) * duals[j]).sum::<f64>();
                match states[i] {
                    VarState::Lower if g - intercept > tol => ok = false,
                    VarState::Upper if g - intercept < -tol => ok = false,
                    _ => {}
                }
            }
            if !ok {
                continue;
            }
        }

        let quad: f64 = (0..m)
            .map(|i| duals[i] * (0..m).map(|j| gram.get(i, j) * duals[j]).sum::<f64>())
            .sum();
        let obj = duals.iter().zip(scores).map(|(&u, &s)| u * s).sum::<f64>() / m as f64
            - quad * scale / (2.0 * m as f64);
        if best.as_ref().map_or(true, |b| obj > b.dual_objective) {
            best = Some(QpOracleSolution { duals, intercept, dual_objective: obj });
        }
    }
    best.expect("the box-and-sum feasible region is nonempty, some state must verify")
}

/// Gaussian elimination with partial pivoting on an `n×n` system stored
/// row-major; returns `None` when the matrix is numerically singular.
fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        let pivot = (col..n).max_by(|&r1, &r2| {
            a[r1 * n + col].abs().total_cmp(&a[r2 * n + col].abs())
        })?;
        if a[pivot * n + col].abs() < 1e-12 {
            return None;
        }
        if pivot != col {
            for c in 0..n {
                a.swap(col * n + c, pivot * n + c);
            }
            b.swap(col, pivot);
        }
        for row in (col + 1)..n {
            let factor = a[row * n + col] / a[col * n + col];
            for c in col..n {
                a[row * n + c] -= factor * a[col * n + c];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for c in (row + 1)..n {
            acc -= a[row * n + c] * x[c];
        }
        x[row] = acc / a[row * n + row];
    }
    Some(x)
}
