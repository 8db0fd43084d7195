//! Log-domain Sinkhorn solver for entropy-regularized optimal transport,
//! with epsilon scaling for small regularization targets.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

use super::OtddConfig;

/// L1 bound on the coupling's marginal violation at convergence.
pub const MARGINAL_TOLERANCE: f64 = 1e-6;

const STAGE_ITERATIONS: usize = 50;
const ANNEAL_FACTOR: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct SinkhornResult {
    pub coupling: Array2<f64>,
    /// Inner product of the coupling with the cost matrix.
    pub transport_cost: f64,
    pub iterations: usize,
    pub marginal_residual: f64,
    /// Regularization actually used (resolved from the config).
    pub epsilon: f64,
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + values.map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Entropic-regularized optimal coupling between histograms `a` and `b`
/// under the given cost. Alternating potential updates run in the log
/// domain; the marginal violation must drop to [`MARGINAL_TOLERANCE`]
/// within `cfg.max_iterations`, otherwise the error carries the residual.
pub fn sinkhorn(
    cost: ArrayView2<f64>,
    a: &[f64],
    b: &[f64],
    cfg: &OtddConfig,
) -> Result<SinkhornResult> {
    let (n, m) = cost.dim();
    if a.len() != n || b.len() != m {
        return Err(Error::InvalidInput(format!(
            "weights ({}, {}) do not match cost shape ({n}, {m})",
            a.len(),
            b.len()
        )));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidInput("cost matrix must be finite".into()));
    }
    for (name, w) in [("a", a), ("b", b)] {
        if w.iter().any(|v| *v < 0.0) {
            return Err(Error::InvalidInput(format!("weights {name} must be non-negative")));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "weights {name} sum to {sum}, expected 1"
            )));
        }
    }

    // Work on the support; zero-weight rows/columns stay empty in the output.
    let rows: Vec<usize> = (0..n).filter(|&i| a[i] > 0.0).collect();
    let cols: Vec<usize> = (0..m).filter(|&j| b[j] > 0.0).collect();
    let (ns, ms) = (rows.len(), cols.len());
    let c = Array2::from_shape_fn((ns, ms), |(i, j)| cost[[rows[i], cols[j]]]);
    let log_a: Vec<f64> = rows.iter().map(|&i| a[i].ln()).collect();
    let log_b: Vec<f64> = cols.iter().map(|&j| b[j].ln()).collect();

    let epsilon = resolve_epsilon(cfg, &c)?;
    let max_cost = c.iter().copied().fold(0.0f64, f64::max);

    let mut f = vec![0.0f64; ns];
    let mut g = vec![0.0f64; ms];
    let mut iterations = 0usize;
    let mut residual = f64::INFINITY;

    let mut eps = if max_cost > epsilon { max_cost } else { epsilon };
    loop {
        let at_target = eps <= epsilon;
        let stage_budget = if at_target {
            cfg.max_iterations.saturating_sub(iterations)
        } else {
            STAGE_ITERATIONS.min(cfg.max_iterations.saturating_sub(iterations))
        };
        for _ in 0..stage_budget {
            for (i, fi) in f.iter_mut().enumerate() {
                let lse = log_sum_exp((0..ms).map(|j| (g[j] - c[[i, j]]) / eps));
                *fi = eps * (log_a[i] - lse);
            }
            for (j, gj) in g.iter_mut().enumerate() {
                let lse = log_sum_exp((0..ns).map(|i| (f[i] - c[[i, j]]) / eps));
                *gj = eps * (log_b[j] - lse);
            }
            iterations += 1;
            if at_target {
                residual = marginal_residual(&c, &f, &g, &log_a, &log_b, eps);
                if residual <= MARGINAL_TOLERANCE {
                    break;
                }
            }
        }
        if at_target {
            break;
        }
        eps = (eps * ANNEAL_FACTOR).max(epsilon);
        if iterations >= cfg.max_iterations {
            eps = epsilon; // force one final residual measurement
            residual = marginal_residual(&c, &f, &g, &log_a, &log_b, eps);
            break;
        }
    }

    if residual > MARGINAL_TOLERANCE {
        return Err(Error::NotConverged { iterations, residual });
    }

    let mut coupling = Array2::zeros((n, m));
    let mut transport_cost = 0.0;
    for i in 0..ns {
        for j in 0..ms {
            let p = ((f[i] + g[j] - c[[i, j]]) / epsilon).exp();
            coupling[[rows[i], cols[j]]] = p;
            transport_cost += p * c[[i, j]];
        }
    }
    Ok(SinkhornResult {
        coupling,
        transport_cost,
        iterations,
        marginal_residual: residual,
        epsilon,
    })
}

fn resolve_epsilon(cfg: &OtddConfig, cost: &Array2<f64>) -> Result<f64> {
    if let Some(eps) = cfg.entropic_epsilon {
        if eps <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "entropic epsilon must be positive, got {eps}"
            )));
        }
        return Ok(eps);
    }
    let mut sorted: Vec<f64> = cost.iter().copied().collect();
    sorted.sort_by(|x, y| x.partial_cmp(y).expect("finite costs"));
    let median = sorted.get(sorted.len() / 2).copied().unwrap_or(0.0);
    let max = sorted.last().copied().unwrap_or(0.0);
    let eps = 0.05 * if median > 0.0 { median } else { max };
    Ok(if eps > 0.0 { eps } else { 1e-3 })
}

fn marginal_residual(
    c: &Array2<f64>,
    f: &[f64],
    g: &[f64],
    log_a: &[f64],
    log_b: &[f64],
    eps: f64,
) -> f64 {
    let (ns, ms) = c.dim();
    let mut row_violation = 0.0;
    let mut col_sums = vec![0.0f64; ms];
    for i in 0..ns {
        let mut row_sum = 0.0;
        for j in 0..ms {
            let p = ((f[i] + g[j] - c[[i, j]]) / eps).exp();
            row_sum += p;
            col_sums[j] += p;
        }
        row_violation += (row_sum - log_a[i].exp()).abs();
    }
    let col_violation: f64 = col_sums
        .iter()
        .zip(log_b)
        .map(|(s, lb)| (s - lb.exp()).abs())
        .sum();
    row_violation + col_violation
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(eps: f64) -> OtddConfig {
        OtddConfig {
            entropic_epsilon: Some(eps),
            max_iterations: 200_000,
            ..Default::default()
        }
    }

    /// Exact OT for uniform square problems by brute force over
    /// assignments.
    fn assignment_oracle(cost: &Array2<f64>) -> f64 {
        let n = cost.nrows();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        permute(&mut perm, 0, cost, &mut best);
        best / n as f64
    }

    fn permute(perm: &mut Vec<usize>, k: usize, cost: &Array2<f64>, best: &mut f64) {
        if k == perm.len() {
            let total: f64 = perm.iter().enumerate().map(|(i, &j)| cost[[i, j]]).sum();
            *best = best.min(total);
            return;
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            permute(perm, k + 1, cost, best);
            perm.swap(k, i);
        }
    }

    #[test]
    fn zero_cost_matrix_transports_for_free() {
        let cost = Array2::zeros((3, 4));
        let a = [1.0 / 3.0; 3];
        let b = [0.25; 4];
        let r = sinkhorn(cost.view(), &a, &b, &OtddConfig::default()).unwrap();
        assert!(r.transport_cost.abs() < 1e-12);
        assert!(r.marginal_residual <= MARGINAL_TOLERANCE);
    }

    #[test]
    fn two_by_two_antidiagonal_concentrates_on_the_diagonal() {
        let cost = array![[0.0, 1.0], [1.0, 0.0]];
        let a = [0.5, 0.5];
        let b = [0.5, 0.5];
        // enumeration over couplings [[t, .5-t], [.5-t, t]]: cost = 1 - 2t,
        // minimized at t = 0.5 with cost 0
        let r = sinkhorn(cost.view(), &a, &b, &cfg(0.001)).unwrap();
        assert!(r.transport_cost < 1e-3, "cost {}", r.transport_cost);
        assert!(r.coupling[[0, 0]] > 0.49 && r.coupling[[1, 1]] > 0.49);
    }

    #[test]
    fn matches_brute_force_assignment_within_two_percent() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..=6 {
            let pts_a: Vec<[f64; 2]> =
                (0..n).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
            let pts_b: Vec<[f64; 2]> =
                (0..n).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
            let cost = Array2::from_shape_fn((n, n), |(i, j)| {
                (pts_a[i][0] - pts_b[j][0]).powi(2) + (pts_a[i][1] - pts_b[j][1]).powi(2)
            });
            let mut sorted: Vec<f64> = cost.iter().copied().collect();
            sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let median = sorted[sorted.len() / 2];
            let w = vec![1.0 / n as f64; n];
            let r = sinkhorn(cost.view(), &w, &w, &cfg(0.01 * median)).unwrap();
            let exact = assignment_oracle(&cost);
            assert!(
                (r.transport_cost - exact).abs() <= 0.02 * exact,
                "n={n}: entropic {} vs exact {exact}",
                r.transport_cost
            );
        }
    }

    #[test]
    fn permuted_points_self_distance_stays_near_zero() {
        // an exact assignment (the inverse permutation) has cost 0, so the
        // entropic cost is pure regularization bias, bounded by eps terms
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in 3..=8usize {
            let pts: Vec<[f64; 2]> = (0..n)
                .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
                .collect();
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                perm.swap(i, rng.gen_range(0..=i));
            }
            let cost = Array2::from_shape_fn((n, n), |(i, j)| {
                (pts[i][0] - pts[perm[j]][0]).powi(2) + (pts[i][1] - pts[perm[j]][1]).powi(2)
            });
            let exact = assignment_oracle(&cost);
            assert_eq!(exact, 0.0);
            let eps = 1e-3;
            let w = vec![1.0 / n as f64; n];
            let r = sinkhorn(cost.view(), &w, &w, &cfg(eps)).unwrap();
            let bound = 10.0 * eps * (n as f64 + 1.0).ln();
            assert!(
                r.transport_cost >= 0.0 && r.transport_cost <= bound,
                "n={n}: cost {} above bound {bound}",
                r.transport_cost
            );
        }
    }

    #[test]
    fn zero_weight_entries_get_empty_rows() {
        let cost = array![[0.0, 2.0], [1.0, 0.5], [3.0, 0.1]];
        let a = [0.5, 0.0, 0.5];
        let b = [0.5, 0.5];
        let r = sinkhorn(cost.view(), &a, &b, &cfg(0.01)).unwrap();
        assert!(r.coupling.row(1).iter().all(|p| *p == 0.0));
        assert!(r.marginal_residual <= MARGINAL_TOLERANCE);
    }

    #[test]
    fn non_convergence_carries_the_residual() {
        let cost = array![[0.0, 1.0], [1.0, 0.0]];
        let a = [0.5, 0.5];
        let b = [0.5, 0.5];
        let tight = OtddConfig {
            entropic_epsilon: Some(1e-6),
            max_iterations: 1,
            ..Default::default()
        };
        match sinkhorn(cost.view(), &a, &b, &tight) {
            Err(Error::NotConverged { residual, .. }) => assert!(residual.is_finite()),
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn invalid_weights_are_rejected() {
        let cost = Array2::zeros((2, 2));
        assert!(sinkhorn(cost.view(), &[0.7, 0.7], &[0.5, 0.5], &cfg(0.1)).is_err());
        assert!(sinkhorn(cost.view(), &[-0.5, 1.5], &[0.5, 0.5], &cfg(0.1)).is_err());
    }
}
