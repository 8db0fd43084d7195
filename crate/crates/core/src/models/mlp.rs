//! One-hidden-layer MLP trained by mini-batch gradient descent.
//!
//! Classification uses a softmax head with cross-entropy, regression a
//! scalar head with squared error. Initialization and batch order derive
//! from the config seed, so two fits with the same seed produce identical
//! weights. The post-activation hidden layer doubles as the embedding fed
//! to the Frechet dataset distance.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{apply_standardizer, fit_standardizer, Dataset, Standardizer, Task};
use crate::error::{Error, Result};
use crate::metrics::PredictionSet;

#[derive(Debug, Clone)]
pub struct MlpConfig {
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden_dim: 32,
            learning_rate: 0.01,
            epochs: 200,
            batch_size: 64,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
}

impl MlpParams {
    fn step(&mut self, grads: &MlpParams, lr: f64) {
        self.w1.scaled_add(-lr, &grads.w1);
        self.b1.scaled_add(-lr, &grads.b1);
        self.w2.scaled_add(-lr, &grads.w2);
        self.b2.scaled_add(-lr, &grads.b2);
    }

    fn finite(&self) -> bool {
        self.w1.iter().all(|v| v.is_finite())
            && self.b1.iter().all(|v| v.is_finite())
            && self.w2.iter().all(|v| v.is_finite())
            && self.b2.iter().all(|v| v.is_finite())
    }
}

/// Targets for one batch in the dense output space of the network.
pub enum MlpTargetBatch<'a> {
    /// Indices into 0..n_classes (not raw class codes).
    Classes {
        indices: &'a [usize],
        n_classes: usize,
    },
    Values(&'a [f64]),
}

fn relu_forward(params: &MlpParams, x: ArrayView2<f64>) -> (Array2<f64>, Array2<f64>) {
    let z1 = &x.dot(&params.w1) + &params.b1;
    let h = z1.mapv(|v| v.max(0.0));
    let z2 = &h.dot(&params.w2) + &params.b2;
    (h, z2)
}

fn softmax_rows(z: &Array2<f64>) -> Array2<f64> {
    let mut out = z.clone();
    for mut row in out.rows_mut() {
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - m).exp());
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }
    out
}

/// Mean loss over the batch and its analytic gradients. Exposed so the
/// analytic gradients can be validated against finite differences.
pub fn mlp_loss_and_gradients(
    params: &MlpParams,
    x: ArrayView2<f64>,
    y: &MlpTargetBatch,
) -> (f64, MlpParams) {
    let n = x.nrows() as f64;
    let (h, z2) = relu_forward(params, x);

    // dL/dz2 and the batch loss, per head
    let (loss, dz2) = match y {
        MlpTargetBatch::Classes { indices, n_classes } => {
            debug_assert_eq!(z2.ncols(), *n_classes);
            let mut loss = 0.0;
            let mut dz2 = softmax_rows(&z2);
            for (i, &c) in indices.iter().enumerate() {
                let row = z2.row(i);
                let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lse = m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
                loss -= row[c] - lse;
                dz2[[i, c]] -= 1.0;
            }
            dz2.mapv_inplace(|v| v / n);
            (loss / n, dz2)
        }
        MlpTargetBatch::Values(values) => {
            debug_assert_eq!(z2.ncols(), 1);
            let mut loss = 0.0;
            let mut dz2 = Array2::zeros(z2.dim());
            for (i, &t) in values.iter().enumerate() {
                let r = z2[[i, 0]] - t;
                loss += r * r;
                dz2[[i, 0]] = 2.0 * r / n;
            }
            (loss / n, dz2)
        }
    };

    let gw2 = h.t().dot(&dz2);
    let gb2 = dz2.sum_axis(Axis(0));
    let dh = dz2.dot(&params.w2.t());
    // rectifier subgradient: 0 at inactive units
    let dz1 = &dh * &h.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
    let gw1 = x.t().dot(&dz1);
    let gb1 = dz1.sum_axis(Axis(0));

    (
        loss,
        MlpParams {
            w1: gw1,
            b1: gb1,
            w2: gw2,
            b2: gb2,
        },
    )
}

#[derive(Debug, Clone)]
pub struct MlpModel {
    standardizer: Standardizer,
    params: MlpParams,
    /// Observed class codes, ascending (classification only).
    classes: Vec<u32>,
    task: Task,
    train_loss: Vec<f64>,
}

impl MlpModel {
    pub fn params(&self) -> &MlpParams {
        &self.params
    }

    /// Full-training-set loss recorded after each epoch.
    pub fn train_loss(&self) -> &[f64] {
        &self.train_loss
    }
}

fn xavier_init(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-bound..bound))
}

pub fn mlp_fit(train: &Dataset, cfg: &MlpConfig) -> Result<MlpModel> {
    if cfg.hidden_dim == 0 {
        return Err(Error::InvalidInput("hidden dim must be at least 1".into()));
    }
    let standardizer = fit_standardizer(train)?;
    let x = apply_standardizer(&standardizer, train)?.features().to_owned();
    if x.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidInput(
            "training features contain missing values; impute first".into(),
        ));
    }
    let task = train.schema().task;

    let (classes, dense_targets, out_dim): (Vec<u32>, Vec<usize>, usize) = match task {
        Task::Binary | Task::Multiclass => {
            let classes = train.observed_classes()?;
            let codes = train.targets().as_classes()?;
            let dense = codes
                .iter()
                .map(|c| classes.binary_search(c).expect("observed class"))
                .collect();
            let k = classes.len();
            (classes, dense, k)
        }
        Task::Regression => (Vec::new(), Vec::new(), 1),
    };
    let values: Vec<f64> = match task {
        Task::Regression => train.targets().as_values()?.to_vec(),
        _ => Vec::new(),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = MlpParams {
        w1: xavier_init(&mut rng, x.ncols(), cfg.hidden_dim),
        b1: Array1::zeros(cfg.hidden_dim),
        w2: xavier_init(&mut rng, cfg.hidden_dim, out_dim),
        b2: Array1::zeros(out_dim),
    };

    let n = x.nrows();
    let batch = cfg.batch_size.max(1).min(n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut train_loss = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch) {
            let xb = x.select(Axis(0), chunk);
            let (loss, grads) = match task {
                Task::Regression => {
                    let yb: Vec<f64> = chunk.iter().map(|&i| values[i]).collect();
                    mlp_loss_and_gradients(&params, xb.view(), &MlpTargetBatch::Values(&yb))
                }
                _ => {
                    let yb: Vec<usize> = chunk.iter().map(|&i| dense_targets[i]).collect();
                    mlp_loss_and_gradients(
                        &params,
                        xb.view(),
                        &MlpTargetBatch::Classes {
                            indices: &yb,
                            n_classes: out_dim,
                        },
                    )
                }
            };
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch });
            }
            params.step(&grads, cfg.learning_rate);
            if !params.finite() {
                return Err(Error::NonFiniteLoss { epoch });
            }
        }
        let (epoch_loss, _) = match task {
            Task::Regression => {
                mlp_loss_and_gradients(&params, x.view(), &MlpTargetBatch::Values(&values))
            }
            _ => mlp_loss_and_gradients(
                &params,
                x.view(),
                &MlpTargetBatch::Classes {
                    indices: &dense_targets,
                    n_classes: out_dim,
                },
            ),
        };
        train_loss.push(epoch_loss);
    }

    Ok(MlpModel {
        standardizer,
        params,
        classes,
        task,
        train_loss,
    })
}

pub fn mlp_predict_proba(model: &MlpModel, ds: &Dataset) -> Result<PredictionSet> {
    let x = apply_standardizer(&model.standardizer, ds)?.features().to_owned();
    let (_, z2) = relu_forward(&model.params, x.view());
    match model.task {
        Task::Regression => {
            PredictionSet::regression(ds.sample_ids().to_vec(), z2.column(0).to_vec())
        }
        _ => {
            let probs = softmax_rows(&z2);
            PredictionSet::class_probs(ds.sample_ids().to_vec(), probs, model.classes.clone())
        }
    }
}

/// Post-activation hidden vectors, shape (n, hidden_dim).
pub fn mlp_activations(model: &MlpModel, ds: &Dataset) -> Result<Array2<f64>> {
    let x = apply_standardizer(&model.standardizer, ds)?.features().to_owned();
    let (h, _) = relu_forward(&model.params, x.view());
    Ok(h)
}
