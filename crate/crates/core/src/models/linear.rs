//! Logistic regression by full-batch gradient descent on log loss.
//!
//! Zero initialization and full-batch updates make training deterministic
//! without any random state. Training stops when the gradient norm drops
//! to 1e-6 or the epoch cap is hit.

use ndarray::{Array1, Array2, ArrayView2};

use crate::data::{apply_standardizer, fit_standardizer, Dataset, Standardizer};
use crate::error::{Error, Result};
use crate::metrics::PredictionSet;

pub const GRADIENT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct LogRegConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig {
            learning_rate: 0.5,
            max_epochs: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearParams {
    pub weights: Array1<f64>,
    pub bias: f64,
    pub epochs_run: usize,
    pub final_gradient_norm: f64,
}

#[derive(Debug, Clone)]
pub struct LogRegModel {
    standardizer: Standardizer,
    params: LinearParams,
    /// [negative, positive] class codes, ascending.
    classes: [u32; 2],
}

impl LogRegModel {
    pub fn params(&self) -> &LinearParams {
        &self.params
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Fit on a raw feature matrix with boolean labels (true = positive).
pub fn logreg_fit_matrix(x: ArrayView2<f64>, y: &[bool], cfg: &LogRegConfig) -> Result<LinearParams> {
    let n = x.nrows();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if y.len() != n {
        return Err(Error::InvalidInput("labels do not match row count".into()));
    }
    let y: Vec<f64> = y.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let mut w = Array1::<f64>::zeros(x.ncols());
    let mut b = 0.0f64;
    let mut epochs_run = 0;
    let mut grad_norm = f64::INFINITY;
    for epoch in 0..cfg.max_epochs {
        let z = x.dot(&w) + b;
        let p = z.mapv(sigmoid);
        let residual = &p - &Array1::from_vec(y.clone());
        let gw = x.t().dot(&residual) / n as f64;
        let gb = residual.sum() / n as f64;
        grad_norm = (gw.dot(&gw) + gb * gb).sqrt();
        if !grad_norm.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        epochs_run = epoch;
        if grad_norm <= GRADIENT_TOLERANCE {
            break;
        }
        w = w - cfg.learning_rate * &gw;
        b -= cfg.learning_rate * gb;
    }
    Ok(LinearParams {
        weights: w,
        bias: b,
        epochs_run,
        final_gradient_norm: grad_norm,
    })
}

/// Positive-class probabilities for a raw feature matrix.
pub fn logreg_predict_matrix(params: &LinearParams, x: ArrayView2<f64>) -> Vec<f64> {
    (x.dot(&params.weights) + params.bias)
        .mapv(sigmoid)
        .to_vec()
}

pub fn logreg_fit(train: &Dataset, cfg: &LogRegConfig) -> Result<LogRegModel> {
    if !train.schema().task.is_classification() {
        return Err(Error::InvalidInput(
            "logistic regression needs classification targets".into(),
        ));
    }
    let classes = train.observed_classes()?;
    if classes.len() != 2 {
        return Err(Error::InvalidInput(format!(
            "logistic regression needs exactly 2 observed classes, found {}",
            classes.len()
        )));
    }
    let standardizer = fit_standardizer(train)?;
    let standardized = apply_standardizer(&standardizer, train)?;
    let labels: Vec<bool> = train
        .targets()
        .as_classes()?
        .iter()
        .map(|&c| c == classes[1])
        .collect();
    let params = logreg_fit_matrix(standardized.features(), &labels, cfg)?;
    Ok(LogRegModel {
        standardizer,
        params,
        classes: [classes[0], classes[1]],
    })
}

pub fn logreg_predict_proba(model: &LogRegModel, ds: &Dataset) -> Result<PredictionSet> {
    let standardized = apply_standardizer(&model.standardizer, ds)?;
    let pos = logreg_predict_matrix(&model.params, standardized.features());
    let mut probs = Array2::zeros((pos.len(), 2));
    for (i, p) in pos.iter().enumerate() {
        probs[[i, 0]] = 1.0 - p;
        probs[[i, 1]] = *p;
    }
    PredictionSet::class_probs(ds.sample_ids().to_vec(), probs, model.classes.to_vec())
}
