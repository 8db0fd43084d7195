//! Threshold-free ranking metrics: ROC-AUC and area under the
//! precision-recall curve.

use ndarray::Array2;

use crate::error::{Error, Result};

fn check_scores(y_true: &[bool], scores: &[f64]) -> Result<(usize, usize)> {
    if y_true.is_empty() {
        return Err(Error::EmptyInput);
    }
    if y_true.len() != scores.len() {
        return Err(Error::InvalidInput(format!(
            "labels and scores differ in length: {} vs {}",
            y_true.len(),
            scores.len()
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidInput("scores must be finite".into()));
    }
    let n_pos = y_true.iter().filter(|&&y| y).count();
    let n_neg = y_true.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedAuc);
    }
    Ok((n_pos, n_neg))
}

/// ROC-AUC as the Mann-Whitney rank statistic: the probability that a
/// random positive outscores a random negative, with ties counting half.
pub fn roc_auc(y_true: &[bool], scores: &[f64]) -> Result<f64> {
    let (n_pos, n_neg) = check_scores(y_true, scores)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite scores"));

    // Mean rank (1-based) within each tied-score group.
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let mean_rank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            if y_true[idx] {
                rank_sum_pos += mean_rank;
            }
        }
        i = j;
    }
    let n_pos_f = n_pos as f64;
    Ok((rank_sum_pos - n_pos_f * (n_pos_f + 1.0) / 2.0) / (n_pos_f * n_neg as f64))
}

/// Area under the precision-recall curve by step-wise summation at every
/// distinct score threshold (no interpolation). Positives are the class
/// flagged `true`.
pub fn aupr(y_true: &[bool], scores: &[f64]) -> Result<f64> {
    let (n_pos, _) = check_scores(y_true, scores)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).expect("finite scores"));

    let mut area = 0.0f64;
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut prev_recall = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        // Tied scores enter as one threshold step.
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if y_true[order[j]] {
                tp += 1;
            } else {
                fp += 1;
            }
            j += 1;
        }
        let recall = tp as f64 / n_pos as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    Ok(area)
}

fn ovr_macro(
    y_true: &[u32],
    probs: &Array2<f64>,
    class_order: &[u32],
    metric: fn(&[bool], &[f64]) -> Result<f64>,
) -> Result<f64> {
    if y_true.len() != probs.nrows() {
        return Err(Error::InvalidInput(
            "labels and probability rows differ in length".into(),
        ));
    }
    let mut values = Vec::new();
    for (j, &class) in class_order.iter().enumerate() {
        let labels: Vec<bool> = y_true.iter().map(|&c| c == class).collect();
        let n_pos = labels.iter().filter(|&&b| b).count();
        if n_pos == 0 || n_pos == labels.len() {
            continue; // one-vs-rest undefined for this class
        }
        values.push(metric(&labels, &probs.column(j).to_vec())?);
    }
    if values.is_empty() {
        return Err(Error::UndefinedAuc);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Macro one-vs-rest ROC-AUC over classes with both positives and negatives.
pub fn roc_auc_ovr_macro(y_true: &[u32], probs: &Array2<f64>, class_order: &[u32]) -> Result<f64> {
    ovr_macro(y_true, probs, class_order, roc_auc)
}

/// Macro one-vs-rest AUPR over classes with both positives and negatives.
pub fn aupr_ovr_macro(y_true: &[u32], probs: &Array2<f64>, class_order: &[u32]) -> Result<f64> {
    ovr_macro(y_true, probs, class_order, aupr)
}
