//! Novelty-detection scoring for the emerging-new-classes protocol.
//!
//! Confidence is the maximum predicted probability. Two views are emitted:
//! the continuous ranking score `1 - confidence` (novel = positive) feeding
//! ROC-AUC/AUPR, and the hard uncertainty-interval rule reported as a
//! proportion.

use crate::error::{Error, Result};
use crate::scenario::EncRun;

use super::{aupr, roc_auc, NoveltyConfig, PredictionSet};

/// Per-sample novelty ranking score: `1 - max_c p(c|x)`. Higher means more
/// novel.
pub fn novelty_score(preds: &PredictionSet) -> Result<Vec<f64>> {
    Ok(preds.max_probs()?.into_iter().map(|p| 1.0 - p).collect())
}

/// Fraction of rows whose maximum probability lies inside the closed
/// interval `[theta_min, theta_max]`.
pub fn uncertainty_proportion(preds: &PredictionSet, cfg: &NoveltyConfig) -> Result<f64> {
    let maxes = preds.max_probs()?;
    let inside = maxes
        .iter()
        .filter(|p| **p >= cfg.theta_min && **p <= cfg.theta_max)
        .count();
    Ok(inside as f64 / maxes.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncRunMetrics {
    /// Name of the class treated as novel ("mean" for the averages row).
    pub held_out_class: String,
    pub roc_auc: f64,
    pub aupr: f64,
    /// One proportion per requested uncertainty interval.
    pub uncertainty: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncReport {
    pub runs: Vec<EncRunMetrics>,
    /// Unweighted mean across runs.
    pub mean: EncRunMetrics,
}

/// Score every leave-one-class-out run and average across runs.
///
/// Each prediction set must align 1:1 (same ids, same order) with its run's
/// detection test set. Novel samples are the positive class.
pub fn enc_evaluate(
    pairs: &[(&EncRun, &PredictionSet)],
    intervals: &[NoveltyConfig],
) -> Result<EncReport> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut runs = Vec::with_capacity(pairs.len());
    for (run, preds) in pairs {
        if preds.sample_ids() != run.detection_test.sample_ids() {
            return Err(Error::IdMismatch(format!(
                "predictions do not match detection test ids for run excluding '{}'",
                run.detection_test.class_name(run.held_out_class)
            )));
        }
        let scores = novelty_score(preds)?;
        let auc = roc_auc(&run.novelty, &scores)?;
        let pr = aupr(&run.novelty, &scores)?;
        let uncertainty = intervals
            .iter()
            .map(|cfg| uncertainty_proportion(preds, cfg))
            .collect::<Result<Vec<f64>>>()?;
        runs.push(EncRunMetrics {
            held_out_class: run
                .detection_test
                .class_name(run.held_out_class)
                .to_string(),
            roc_auc: auc,
            aupr: pr,
            uncertainty,
        });
    }
    let k = runs.len() as f64;
    let mean = EncRunMetrics {
        held_out_class: "mean".into(),
        roc_auc: runs.iter().map(|r| r.roc_auc).sum::<f64>() / k,
        aupr: runs.iter().map(|r| r.aupr).sum::<f64>() / k,
        uncertainty: (0..intervals.len())
            .map(|i| runs.iter().map(|r| r.uncertainty[i]).sum::<f64>() / k)
            .collect(),
    };
    Ok(EncReport { runs, mean })
}
