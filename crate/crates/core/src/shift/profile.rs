//! Assembly of the full shift profile for a changing-data-distribution
//! scenario.

use ndarray::ArrayView2;

use crate::data::{apply_standardizer, fit_standardizer, Task};
use crate::error::{Error, Result};
use crate::scenario::CddScenario;

use super::{disde, fdd, otdd, DisdeConfig, DisdeReport, OtddConfig};

/// Squared distance between binary class priors: `(mean(y_a) - mean(y_b))^2`.
/// Targets must be coded {0, 1}.
pub fn label_shift(y_train: &[u32], y_test: &[u32]) -> Result<f64> {
    if y_train.is_empty() || y_test.is_empty() {
        return Err(Error::EmptyInput);
    }
    if y_train.iter().chain(y_test).any(|&c| c > 1) {
        return Err(Error::InvalidInput(
            "label shift is defined for binary targets coded {0, 1}".into(),
        ));
    }
    let mean = |codes: &[u32]| codes.iter().map(|&c| c as f64).sum::<f64>() / codes.len() as f64;
    Ok((mean(y_train) - mean(y_test)).powi(2))
}

/// The three shift magnitudes plus the dominant-pattern label derived from
/// the loss-gap decomposition.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ShiftProfile {
    /// Covariate shift: dataset distance between train and OOD test.
    pub delta_x: f64,
    /// Concept shift: Frechet distance between classifier activations.
    pub delta_y_given_x: f64,
    /// Label shift between the binary class priors.
    pub delta_y: f64,
    /// "Y|X-dominant" when |term_2| exceeds |term_1 + term_3|, else
    /// "X-dominant".
    pub dominant_pattern: String,
    pub disde: DisdeReport,
    pub provenance: String,
}

/// Everything the profile needs beyond the scenario itself: classifier
/// activations on the train and OOD parts, and per-sample losses of the
/// evaluated model on the ID and OOD test parts.
pub struct ShiftProfileInputs<'a> {
    pub scenario: &'a CddScenario,
    pub train_embeddings: ArrayView2<'a, f64>,
    pub ood_embeddings: ArrayView2<'a, f64>,
    pub id_losses: &'a [f64],
    pub ood_losses: &'a [f64],
}

pub fn shift_profile(
    inputs: &ShiftProfileInputs,
    otdd_cfg: &OtddConfig,
    disde_cfg: &DisdeConfig,
) -> Result<ShiftProfile> {
    let scenario = inputs.scenario;
    if scenario.train.schema().task != Task::Binary {
        return Err(Error::InvalidInput(
            "shift profile is defined for binary classification scenarios".into(),
        ));
    }

    // Delta_x: OTDD between train and OOD test on train-standardized features.
    let standardizer = fit_standardizer(&scenario.train)?;
    let train_std = apply_standardizer(&standardizer, &scenario.train)?;
    let ood_std = apply_standardizer(&standardizer, &scenario.ood_test)?;
    let delta_x = otdd(&train_std, &ood_std, otdd_cfg)?;

    // Delta_{y|x}: Frechet distance between activation sets.
    let delta_y_given_x = fdd(inputs.train_embeddings, inputs.ood_embeddings)?;

    // Delta_y: prior shift between train and OOD targets.
    let delta_y = label_shift(
        scenario.train.targets().as_classes()?,
        scenario.ood_test.targets().as_classes()?,
    )?;

    // Decomposition on ID (source sample) vs OOD (target sample).
    let id_std = apply_standardizer(&standardizer, &scenario.id_test)?;
    let report = disde(
        inputs.id_losses,
        id_std.features(),
        inputs.ood_losses,
        ood_std.features(),
        disde_cfg,
    )?;
    let dominant_pattern = if report.term_2.abs() > (report.term_1 + report.term_3).abs() {
        "Y|X-dominant".to_string()
    } else {
        "X-dominant".to_string()
    };

    Ok(ShiftProfile {
        delta_x,
        delta_y_given_x,
        delta_y,
        dominant_pattern,
        disde: report,
        provenance: format!(
            "{}; otdd(eps={:?}, cap={}, seed={}); disde(eta={}, k={})",
            scenario.provenance,
            otdd_cfg.entropic_epsilon,
            otdd_cfg.subsample_cap,
            otdd_cfg.seed,
            disde_cfg.eta,
            disde_cfg.k_neighbors
        ),
    })
}
