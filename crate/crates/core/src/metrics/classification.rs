//! Hard-label classification metrics.

use crate::error::{Error, Result};

fn check_pair(y_true: &[u32], y_pred: &[u32]) -> Result<()> {
    if y_true.is_empty() {
        return Err(Error::EmptyInput);
    }
    if y_true.len() != y_pred.len() {
        return Err(Error::InvalidInput(format!(
            "label vectors differ in length: {} vs {}",
            y_true.len(),
            y_pred.len()
        )));
    }
    Ok(())
}

/// Fraction of exactly correct predictions.
pub fn accuracy(y_true: &[u32], y_pred: &[u32]) -> Result<f64> {
    check_pair(y_true, y_pred)?;
    let correct = y_true.iter().zip(y_pred).filter(|(t, p)| t == p).count();
    Ok(correct as f64 / y_true.len() as f64)
}

/// Unweighted mean of per-class recalls over classes present in `y_true`.
/// Classes appearing only in `y_pred` are ignored.
pub fn balanced_accuracy(y_true: &[u32], y_pred: &[u32]) -> Result<f64> {
    check_pair(y_true, y_pred)?;
    let mut per_class: std::collections::BTreeMap<u32, (usize, usize)> = Default::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        let entry = per_class.entry(t).or_insert((0, 0));
        entry.1 += 1;
        if t == p {
            entry.0 += 1;
        }
    }
    let recalls: Vec<f64> = per_class
        .values()
        .map(|&(hit, total)| hit as f64 / total as f64)
        .collect();
    Ok(recalls.iter().sum::<f64>() / recalls.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum F1Averaging {
    /// Two classes with a designated positive class.
    Binary { positive: u32 },
    /// Unweighted mean of per-class F1 over classes present in `y_true`.
    Macro,
}

fn f1_one_vs_rest(y_true: &[u32], y_pred: &[u32], positive: u32) -> f64 {
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t == positive, p == positive) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => {}
        }
    }
    // Undefined precision or recall contributes 0 to the harmonic mean.
    let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
    let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Harmonic mean of precision and recall (binary), or the unweighted mean
/// of per-class F1 scores (macro).
pub fn f1(y_true: &[u32], y_pred: &[u32], averaging: F1Averaging) -> Result<f64> {
    check_pair(y_true, y_pred)?;
    match averaging {
        F1Averaging::Binary { positive } => Ok(f1_one_vs_rest(y_true, y_pred, positive)),
        F1Averaging::Macro => {
            let mut classes: Vec<u32> = y_true.to_vec();
            classes.sort_unstable();
            classes.dedup();
            let sum: f64 = classes
                .iter()
                .map(|&c| f1_one_vs_rest(y_true, y_pred, c))
                .sum();
            Ok(sum / classes.len() as f64)
        }
    }
}
