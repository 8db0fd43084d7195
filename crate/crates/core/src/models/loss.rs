//! Per-sample losses of a fixed model, the raw material for the
//! generalization-gap decomposition.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics::PredictionSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    ZeroOne,
    Log,
    Squared,
}

impl std::str::FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero_one" => Ok(LossKind::ZeroOne),
            "log" => Ok(LossKind::Log),
            "squared" => Ok(LossKind::Squared),
            other => Err(Error::InvalidInput(format!("unknown loss '{other}'"))),
        }
    }
}

/// Elementwise loss vector aligned with the prediction rows.
pub fn per_sample_loss(
    preds: &PredictionSet,
    truth: &Dataset,
    loss: LossKind,
) -> Result<Vec<f64>> {
    if preds.sample_ids() != truth.sample_ids() {
        return Err(Error::IdMismatch(
            "prediction ids do not match dataset ids".into(),
        ));
    }
    match loss {
        LossKind::ZeroOne => {
            let y = truth.targets().as_classes()?;
            let yhat = preds.predicted_classes()?;
            Ok(y.iter()
                .zip(yhat)
                .map(|(&t, p)| if t == p { 0.0 } else { 1.0 })
                .collect())
        }
        LossKind::Log => {
            let y = truth.targets().as_classes()?;
            let (probs, class_order) = preds.probs()?;
            let mut out = Vec::with_capacity(y.len());
            for (i, &t) in y.iter().enumerate() {
                let p = class_order
                    .iter()
                    .position(|&c| c == t)
                    .map(|j| probs[[i, j]])
                    .unwrap_or(0.0);
                out.push(-p.max(1e-15).ln());
            }
            Ok(out)
        }
        LossKind::Squared => {
            let y = truth.targets().as_values()?;
            let v = preds.values()?;
            Ok(y.iter().zip(v).map(|(t, p)| (t - p) * (t - p)).collect())
        }
    }
}
