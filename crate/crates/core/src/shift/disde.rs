//! Decomposition of a model's source-to-target generalization gap into
//! covariate-shift and concept-shift terms.
//!
//! Given per-sample losses of a fixed source-trained model on source (P)
//! and target (Q) samples, the gap `E_Q[loss] - E_P[loss]` telescopes into
//! three terms evaluated on an overlap region S_X: a P-side covariate term,
//! a conditional-loss (concept) term, and a Q-side covariate term. S_X is
//! the set of pooled samples whose domain-classifier propensity lies in
//! `[eta, 1 - eta]`; conditional losses are estimated by k-nearest-neighbor
//! averaging on standardized features.

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::models::{logreg_fit_matrix, logreg_predict_matrix, LogRegConfig};

#[derive(Debug, Clone)]
pub struct DisdeConfig {
    /// Propensity trim: the overlap keeps samples in `[eta, 1 - eta]`.
    pub eta: f64,
    pub k_neighbors: usize,
}

impl Default for DisdeConfig {
    fn default() -> Self {
        DisdeConfig {
            eta: 0.1,
            k_neighbors: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DisdeReport {
    /// Covariate term on the P side: `E_Sx[R_P] - E_P[R_P]`.
    pub term_1: f64,
    /// Concept term: `E_Sx[R_Q - R_P]`.
    pub term_2: f64,
    /// Covariate term on the Q side: `E_Q[R_Q] - E_Sx[R_Q]`.
    pub term_3: f64,
    /// Sum of the three terms; equals the empirical loss gap.
    pub total_gap: f64,
    pub overlap_fraction: f64,
    pub eta: f64,
    pub k_neighbors: usize,
}

/// Column-standardize the pooled matrix (population statistics, constant
/// columns mapped to zero).
fn standardize_pooled(x: ArrayView2<f64>) -> Array2<f64> {
    let n = x.nrows() as f64;
    let mean = x.mean_axis(Axis(0)).expect("non-empty");
    let mut out = x.to_owned();
    for j in 0..x.ncols() {
        let var = x.column(j).iter().map(|v| (v - mean[j]).powi(2)).sum::<f64>() / n;
        let std = if var > 0.0 { var.sqrt() } else { 1.0 };
        out.column_mut(j).mapv_inplace(|v| (v - mean[j]) / std);
    }
    out
}

/// Mean of the k nearest losses (Euclidean distance on standardized
/// features, ties broken on the lower row index).
fn knn_loss_mean(query: &[f64], bank: &Array2<f64>, losses: &[f64], k: usize) -> f64 {
    let mut order: Vec<usize> = (0..bank.nrows()).collect();
    let dist = |row: usize| -> f64 {
        bank.row(row)
            .iter()
            .zip(query)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    };
    let dists: Vec<f64> = (0..bank.nrows()).map(dist).collect();
    order.sort_by(|&a, &b| {
        dists[a]
            .partial_cmp(&dists[b])
            .expect("finite distances")
            .then(a.cmp(&b))
    });
    order[..k].iter().map(|&i| losses[i]).sum::<f64>() / k as f64
}

/// Estimate the decomposition from per-sample losses and feature matrices.
/// Errors when the overlap region is empty (the message carries a 10-bin
/// propensity histogram) or when `k` exceeds either domain size.
pub fn disde(
    losses_p: &[f64],
    x_p: ArrayView2<f64>,
    losses_q: &[f64],
    x_q: ArrayView2<f64>,
    cfg: &DisdeConfig,
) -> Result<DisdeReport> {
    let (n_p, n_q) = (x_p.nrows(), x_q.nrows());
    if n_p == 0 || n_q == 0 {
        return Err(Error::EmptyInput);
    }
    if losses_p.len() != n_p || losses_q.len() != n_q {
        return Err(Error::InvalidInput(
            "loss vectors do not align with feature rows".into(),
        ));
    }
    if x_p.ncols() != x_q.ncols() {
        return Err(Error::InvalidInput("feature dimensions differ".into()));
    }
    if !(cfg.eta > 0.0 && cfg.eta < 0.5) {
        return Err(Error::InvalidInput(format!(
            "eta {} outside (0, 0.5)",
            cfg.eta
        )));
    }
    if cfg.k_neighbors == 0 || cfg.k_neighbors > n_p.min(n_q) {
        return Err(Error::InvalidInput(format!(
            "k={} outside 1..={}",
            cfg.k_neighbors,
            n_p.min(n_q)
        )));
    }

    let mut pooled = Array2::zeros((n_p + n_q, x_p.ncols()));
    pooled.slice_mut(ndarray::s![..n_p, ..]).assign(&x_p);
    pooled.slice_mut(ndarray::s![n_p.., ..]).assign(&x_q);
    let pooled = standardize_pooled(pooled.view());
    let p_std = pooled.slice(ndarray::s![..n_p, ..]).to_owned();
    let q_std = pooled.slice(ndarray::s![n_p.., ..]).to_owned();

    // Domain classifier: propensity of belonging to the target domain Q.
    let domain_labels: Vec<bool> = (0..n_p + n_q).map(|i| i >= n_p).collect();
    let params = logreg_fit_matrix(pooled.view(), &domain_labels, &LogRegConfig::default())?;
    let propensity = logreg_predict_matrix(&params, pooled.view());

    let overlap: Vec<usize> = (0..n_p + n_q)
        .filter(|&i| propensity[i] >= cfg.eta && propensity[i] <= 1.0 - cfg.eta)
        .collect();
    if overlap.is_empty() {
        let mut histogram = vec![0usize; 10];
        for p in &propensity {
            histogram[((p * 10.0) as usize).min(9)] += 1;
        }
        return Err(Error::EmptyOverlap { eta: cfg.eta, histogram });
    }

    let mean_p = losses_p.iter().sum::<f64>() / n_p as f64;
    let mean_q = losses_q.iter().sum::<f64>() / n_q as f64;

    let mut sum_rp = 0.0;
    let mut sum_rq = 0.0;
    for &i in &overlap {
        let query: Vec<f64> = pooled.row(i).to_vec();
        sum_rp += knn_loss_mean(&query, &p_std, losses_p, cfg.k_neighbors);
        sum_rq += knn_loss_mean(&query, &q_std, losses_q, cfg.k_neighbors);
    }
    let sx = overlap.len() as f64;
    let mean_sx_rp = sum_rp / sx;
    let mean_sx_rq = sum_rq / sx;

    let term_1 = mean_sx_rp - mean_p;
    let term_2 = mean_sx_rq - mean_sx_rp;
    let term_3 = mean_q - mean_sx_rq;
    Ok(DisdeReport {
        term_1,
        term_2,
        term_3,
        total_gap: term_1 + term_2 + term_3,
        overlap_fraction: sx / (n_p + n_q) as f64,
        eta: cfg.eta,
        k_neighbors: cfg.k_neighbors,
    })
}
