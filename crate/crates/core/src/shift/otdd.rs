//! Optimal-transport dataset distance under a Gaussian approximation.
//!
//! The ground cost between labeled points combines squared Euclidean
//! feature distance with the squared 2-Wasserstein distance between the
//! class-conditional Gaussian fits of the two labels:
//! `d((x,y),(x',y'))^2 = ||x - x'||^2 + W2^2(N_y, N_y')`.
//! The dataset distance is the square root of the entropic transport cost
//! under uniform marginals.

use std::collections::BTreeMap;

use ndarray::{Array2, Axis};

use crate::data::{stratified_subsample_by, ColumnKind, Dataset};
use crate::error::{Error, Result};
use crate::scenario::derive_seed;

use super::{gaussian_summary, gaussian_w2, sinkhorn, GaussianSummary, OtddConfig};

fn class_conditional_summaries(
    ds: &Dataset,
    side: &str,
) -> Result<BTreeMap<u32, GaussianSummary>> {
    let codes = ds.targets().as_classes()?;
    let mut by_class: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &c) in codes.iter().enumerate() {
        by_class.entry(c).or_default().push(i);
    }
    let mut out = BTreeMap::new();
    for (class, rows) in by_class {
        if rows.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "class '{}' has {} sample(s) on the {side} side; need at least 2 for a class-conditional Gaussian",
                ds.class_name(class),
                rows.len()
            )));
        }
        let x = ds.features().select(Axis(0), &rows);
        out.insert(class, gaussian_summary(x.view())?);
    }
    Ok(out)
}

/// Dataset distance between two classification datasets with standardized
/// numeric features. Symmetric under swapping inputs up to solver
/// tolerance; the self-distance is bounded by the entropic bias.
pub fn otdd(ds_a: &Dataset, ds_b: &Dataset, cfg: &OtddConfig) -> Result<f64> {
    if cfg.subsample_cap < 2 {
        return Err(Error::InvalidInput(format!(
            "subsample cap {} below 2",
            cfg.subsample_cap
        )));
    }
    for (side, ds) in [("left", ds_a), ("right", ds_b)] {
        if !ds.schema().task.is_classification() {
            return Err(Error::InvalidInput(format!(
                "{side} dataset is not a classification dataset"
            )));
        }
        if let Some(col) = ds
            .schema()
            .columns
            .iter()
            .find(|c| c.kind != ColumnKind::Numeric)
        {
            return Err(Error::InvalidInput(format!(
                "{side} dataset has categorical column '{}'; the ground cost needs numeric features",
                col.name
            )));
        }
    }

    let a = stratified_subsample_by(ds_a, cfg.subsample_cap, derive_seed(cfg.seed, 0), true)?;
    let b = stratified_subsample_by(ds_b, cfg.subsample_cap, derive_seed(cfg.seed, 1), true)?;

    let summaries_a = class_conditional_summaries(&a, "left")?;
    let summaries_b = class_conditional_summaries(&b, "right")?;
    let mut label_cost: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for (&ca, ga) in &summaries_a {
        for (&cb, gb) in &summaries_b {
            label_cost.insert((ca, cb), gaussian_w2(ga, gb)?);
        }
    }

    let xa = a.features();
    let xb = b.features();
    let ya = a.targets().as_classes()?;
    let yb = b.targets().as_classes()?;
    let cost = Array2::from_shape_fn((a.n_rows(), b.n_rows()), |(i, j)| {
        let feat: f64 = xa
            .row(i)
            .iter()
            .zip(xb.row(j).iter())
            .map(|(p, q)| (p - q) * (p - q))
            .sum();
        feat + label_cost[&(ya[i], yb[j])]
    });

    let wa = vec![1.0 / a.n_rows() as f64; a.n_rows()];
    let wb = vec![1.0 / b.n_rows() as f64; b.n_rows()];
    let result = sinkhorn(cost.view(), &wa, &wb, cfg)?;
    Ok(result.transport_cost.max(0.0).sqrt())
}
