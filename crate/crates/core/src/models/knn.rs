//! k-nearest-neighbor classification and regression.

use ndarray::Array2;

use crate::data::{apply_standardizer, fit_standardizer, Dataset, Standardizer, Targets, Task};
use crate::error::{Error, Result};
use crate::metrics::PredictionSet;

use super::id_order_key;

#[derive(Debug, Clone)]
pub struct KnnModel {
    standardizer: Standardizer,
    train_x: Array2<f64>,
    targets: Targets,
    train_ids: Vec<String>,
    /// Observed class codes, ascending (classification only).
    classes: Vec<u32>,
    k: usize,
    task: Task,
}

pub fn knn_fit(train: &Dataset, k: usize) -> Result<KnnModel> {
    if k == 0 || k > train.n_rows() {
        return Err(Error::InvalidInput(format!(
            "k={k} outside 1..={}",
            train.n_rows()
        )));
    }
    let standardizer = fit_standardizer(train)?;
    let standardized = apply_standardizer(&standardizer, train)?;
    let task = train.schema().task;
    let classes = if task.is_classification() {
        train.observed_classes()?
    } else {
        Vec::new()
    };
    Ok(KnnModel {
        standardizer,
        train_x: standardized.features().to_owned(),
        targets: train.targets().clone(),
        train_ids: train.sample_ids().to_vec(),
        classes,
        k,
        task,
    })
}

/// Class probabilities are neighbor vote fractions; regression predictions
/// are neighbor means. Distance ties break on the smaller sample id.
pub fn knn_predict_proba(model: &KnnModel, ds: &Dataset) -> Result<PredictionSet> {
    let standardized = apply_standardizer(&model.standardizer, ds)?;
    let x = standardized.features();
    let n_train = model.train_x.nrows();

    let mut order: Vec<usize> = (0..n_train).collect();
    let mut neighbor_rows: Vec<Vec<usize>> = Vec::with_capacity(x.nrows());
    for row in x.rows() {
        let dists: Vec<f64> = model
            .train_x
            .rows()
            .into_iter()
            .map(|t| {
                row.iter()
                    .zip(t.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
            })
            .collect();
        if dists.iter().any(|d| d.is_nan()) {
            return Err(Error::InvalidInput(
                "distance is NaN; impute missing values before prediction".into(),
            ));
        }
        order.sort_by(|&a, &b| {
            dists[a]
                .partial_cmp(&dists[b])
                .expect("finite distances")
                .then_with(|| id_order_key(&model.train_ids[a]).cmp(&id_order_key(&model.train_ids[b])))
        });
        neighbor_rows.push(order[..model.k].to_vec());
    }

    let ids = ds.sample_ids().to_vec();
    match (&model.targets, model.task) {
        (Targets::Classes(codes), _) => {
            let k = model.classes.len();
            let mut probs = Array2::zeros((x.nrows(), k));
            for (i, neigh) in neighbor_rows.iter().enumerate() {
                for &t in neigh {
                    let j = model
                        .classes
                        .binary_search(&codes[t])
                        .expect("train class known");
                    probs[[i, j]] += 1.0 / model.k as f64;
                }
            }
            PredictionSet::class_probs(ids, probs, model.classes.clone())
        }
        (Targets::Values(values), _) => {
            let preds = neighbor_rows
                .iter()
                .map(|neigh| neigh.iter().map(|&t| values[t]).sum::<f64>() / model.k as f64)
                .collect();
            PredictionSet::regression(ids, preds)
        }
    }
}
