//! Scalar performance metrics, novelty-detection scoring, the
//! performance-gap statistic, and rank aggregation.

mod classification;
mod novelty;
mod rank;
mod ranking;
mod regression;

pub use classification::{accuracy, balanced_accuracy, f1, F1Averaging};
pub use novelty::{enc_evaluate, novelty_score, uncertainty_proportion, EncReport, EncRunMetrics};
pub use rank::{mean_ranks, rank_cell};
pub use ranking::{aupr, aupr_ovr_macro, roc_auc, roc_auc_ovr_macro};
pub use regression::rmse;

use ndarray::Array2;

use crate::data::{Dataset, Task};
use crate::error::{Error, Result};

/// Per-sample model outputs keyed to sample ids: row-stochastic class
/// probabilities for classification, real values for regression.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    sample_ids: Vec<String>,
    output: PredictionOutput,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PredictionOutput {
    ClassProbs {
        /// One row per sample; rows sum to 1 within 1e-6.
        probs: Array2<f64>,
        /// Class code for each probability column.
        class_order: Vec<u32>,
    },
    Regression(Vec<f64>),
}

impl PredictionSet {
    pub fn class_probs(
        sample_ids: Vec<String>,
        probs: Array2<f64>,
        class_order: Vec<u32>,
    ) -> Result<Self> {
        if probs.nrows() != sample_ids.len() {
            return Err(Error::InvalidInput(
                "probability rows do not align 1:1 with sample ids".into(),
            ));
        }
        if probs.ncols() != class_order.len() {
            return Err(Error::InvalidInput(
                "one probability column required per class".into(),
            ));
        }
        for (i, row) in probs.rows().into_iter().enumerate() {
            let sum: f64 = row.sum();
            if (sum - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidInput(format!(
                    "probability row {i} sums to {sum}, not 1"
                )));
            }
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::InvalidInput(format!(
                    "probability row {i} has entries outside [0,1]"
                )));
            }
        }
        Ok(PredictionSet {
            sample_ids,
            output: PredictionOutput::ClassProbs { probs, class_order },
        })
    }

    pub fn regression(sample_ids: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if values.len() != sample_ids.len() {
            return Err(Error::InvalidInput(
                "values do not align 1:1 with sample ids".into(),
            ));
        }
        Ok(PredictionSet {
            sample_ids,
            output: PredictionOutput::Regression(values),
        })
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn output(&self) -> &PredictionOutput {
        &self.output
    }

    pub fn probs(&self) -> Result<(&Array2<f64>, &[u32])> {
        match &self.output {
            PredictionOutput::ClassProbs { probs, class_order } => Ok((probs, class_order)),
            PredictionOutput::Regression(_) => Err(Error::InvalidInput(
                "expected class probabilities, found regression values".into(),
            )),
        }
    }

    pub fn values(&self) -> Result<&[f64]> {
        match &self.output {
            PredictionOutput::Regression(v) => Ok(v),
            PredictionOutput::ClassProbs { .. } => Err(Error::InvalidInput(
                "expected regression values, found class probabilities".into(),
            )),
        }
    }

    /// Argmax class per row; probability ties break on the earliest column.
    pub fn predicted_classes(&self) -> Result<Vec<u32>> {
        let (probs, class_order) = self.probs()?;
        Ok(probs
            .rows()
            .into_iter()
            .map(|row| {
                let mut best = 0usize;
                for (j, p) in row.iter().enumerate() {
                    if *p > row[best] {
                        best = j;
                    }
                }
                class_order[best]
            })
            .collect())
    }

    /// Maximum predicted probability per row (the confidence score).
    pub fn max_probs(&self) -> Result<Vec<f64>> {
        let (probs, _) = self.probs()?;
        Ok(probs
            .rows()
            .into_iter()
            .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect())
    }

    /// Probability column for a given class code.
    pub fn prob_of_class(&self, code: u32) -> Result<Vec<f64>> {
        let (probs, class_order) = self.probs()?;
        let j = class_order
            .iter()
            .position(|&c| c == code)
            .ok_or_else(|| Error::InvalidInput(format!("class code {code} not in class order")))?;
        Ok(probs.column(j).to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Accuracy,
    BalancedAccuracy,
    F1,
    RocAuc,
    Aupr,
    Rmse,
}

impl Objective {
    pub const CLASSIFICATION_DEFAULTS: [Objective; 4] = [
        Objective::Accuracy,
        Objective::RocAuc,
        Objective::F1,
        Objective::BalancedAccuracy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Objective::Accuracy => "accuracy",
            Objective::BalancedAccuracy => "balanced_accuracy",
            Objective::F1 => "f1",
            Objective::RocAuc => "roc_auc",
            Objective::Aupr => "aupr",
            Objective::Rmse => "rmse",
        }
    }

    pub fn applies_to(self, task: Task) -> bool {
        match self {
            Objective::Rmse => task == Task::Regression,
            _ => task.is_classification(),
        }
    }

    pub fn higher_is_better(self) -> bool {
        !matches!(self, Objective::Rmse)
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "accuracy" => Ok(Objective::Accuracy),
            "balanced_accuracy" => Ok(Objective::BalancedAccuracy),
            "f1" => Ok(Objective::F1),
            "roc_auc" => Ok(Objective::RocAuc),
            "aupr" => Ok(Objective::Aupr),
            "rmse" => Ok(Objective::Rmse),
            other => Err(Error::InvalidInput(format!("unknown objective '{other}'"))),
        }
    }
}

/// Evaluate one objective against ground truth. Binary tasks take class
/// code 1 as the positive class; multiclass F1 is macro-averaged and
/// multiclass ROC-AUC / AUPR are macro one-vs-rest.
pub fn evaluate(objective: Objective, preds: &PredictionSet, truth: &Dataset) -> Result<f64> {
    if preds.sample_ids() != truth.sample_ids() {
        return Err(Error::IdMismatch(
            "prediction ids do not match dataset ids".into(),
        ));
    }
    let task = truth.schema().task;
    if !objective.applies_to(task) {
        return Err(Error::InvalidInput(format!(
            "objective {} does not apply to {:?} tasks",
            objective.name(),
            task
        )));
    }
    match objective {
        Objective::Accuracy => accuracy(truth.targets().as_classes()?, &preds.predicted_classes()?),
        Objective::BalancedAccuracy => {
            balanced_accuracy(truth.targets().as_classes()?, &preds.predicted_classes()?)
        }
        Objective::F1 => {
            let y = truth.targets().as_classes()?;
            let yhat = preds.predicted_classes()?;
            match task {
                Task::Binary => f1(y, &yhat, F1Averaging::Binary { positive: 1 }),
                _ => f1(y, &yhat, F1Averaging::Macro),
            }
        }
        Objective::RocAuc => {
            let y = truth.targets().as_classes()?;
            match task {
                Task::Binary => {
                    let labels: Vec<bool> = y.iter().map(|&c| c == 1).collect();
                    roc_auc(&labels, &preds.prob_of_class(1)?)
                }
                _ => {
                    let (probs, class_order) = preds.probs()?;
                    roc_auc_ovr_macro(y, probs, class_order)
                }
            }
        }
        Objective::Aupr => {
            let y = truth.targets().as_classes()?;
            match task {
                Task::Binary => {
                    let labels: Vec<bool> = y.iter().map(|&c| c == 1).collect();
                    aupr(&labels, &preds.prob_of_class(1)?)
                }
                _ => {
                    let (probs, class_order) = preds.probs()?;
                    aupr_ovr_macro(y, probs, class_order)
                }
            }
        }
        Objective::Rmse => rmse(truth.targets().as_values()?, preds.values()?),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapMode {
    /// `metric_i - metric_0`, the convention of shift tables.
    Absolute,
    /// `(metric_i - metric_0) / metric_0`, the percentage-gap convention.
    Relative,
}

/// Performance gap between an unshifted reference metric and a shifted one.
pub fn performance_gap(metric_0: f64, metric_i: f64, mode: GapMode) -> Result<f64> {
    match mode {
        GapMode::Absolute => Ok(metric_i - metric_0),
        GapMode::Relative => {
            if metric_0 == 0.0 {
                return Err(Error::InvalidInput(
                    "relative gap undefined: reference metric is 0".into(),
                ));
            }
            Ok((metric_i - metric_0) / metric_0)
        }
    }
}

/// Low-confidence interval for the hard novelty decision rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoveltyConfig {
    pub theta_min: f64,
    pub theta_max: f64,
}

impl NoveltyConfig {
    pub fn new(theta_min: f64, theta_max: f64) -> Result<Self> {
        if !(0.0 <= theta_min && theta_min < theta_max && theta_max <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "invalid uncertainty interval [{theta_min}, {theta_max}]"
            )));
        }
        Ok(NoveltyConfig { theta_min, theta_max })
    }

    /// The three reported uncertainty intervals.
    pub fn reported_intervals() -> [NoveltyConfig; 3] {
        [
            NoveltyConfig { theta_min: 0.4, theta_max: 0.6 },
            NoveltyConfig { theta_min: 0.45, theta_max: 0.55 },
            NoveltyConfig { theta_min: 0.49, theta_max: 0.51 },
        ]
    }
}

impl Default for NoveltyConfig {
    fn default() -> Self {
        NoveltyConfig { theta_min: 0.4, theta_max: 0.6 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn class_probs_validates_row_sums() {
        let ids = vec!["a".to_string(), "b".to_string()];
        let bad = PredictionSet::class_probs(ids.clone(), array![[0.9, 0.3], [0.5, 0.5]], vec![0, 1]);
        assert!(bad.is_err());
        let ok = PredictionSet::class_probs(ids, array![[0.9, 0.1], [0.5, 0.5]], vec![0, 1]);
        assert!(ok.is_ok());
    }

    #[test]
    fn gap_reproduces_shift_table_cell() {
        let abs = performance_gap(0.838, 0.764, GapMode::Absolute).unwrap();
        assert!((abs - (-0.074)).abs() < 1e-12);
        let rel = performance_gap(0.838, 0.764, GapMode::Relative).unwrap();
        assert!((rel - (-0.0883)).abs() < 1e-4);
        assert!(performance_gap(0.0, 0.5, GapMode::Relative).is_err());
    }

    #[test]
    fn gap_modes_agree_on_sign_and_zero() {
        for (m0, m1) in [(0.5, 0.5), (0.9, 0.7), (0.2, 0.6)] {
            let a = performance_gap(m0, m1, GapMode::Absolute).unwrap();
            let r = performance_gap(m0, m1, GapMode::Relative).unwrap();
            assert_eq!(a == 0.0, r == 0.0);
            if a != 0.0 {
                assert_eq!(a.signum(), r.signum());
            }
        }
        assert_eq!(performance_gap(0.7, 0.7, GapMode::Absolute).unwrap(), 0.0);
        assert_eq!(performance_gap(0.7, 0.7, GapMode::Relative).unwrap(), 0.0);
    }

    #[test]
    fn novelty_interval_is_validated() {
        assert!(NoveltyConfig::new(0.6, 0.4).is_err());
        assert!(NoveltyConfig::new(-0.1, 0.5).is_err());
        assert!(NoveltyConfig::new(0.4, 0.6).is_ok());
    }

    #[test]
    fn predicted_classes_break_ties_on_earliest_column() {
        let preds = PredictionSet::class_probs(
            vec!["a".to_string()],
            array![[0.5, 0.5]],
            vec![3, 7],
        )
        .unwrap();
        assert_eq!(preds.predicted_classes().unwrap(), vec![3]);
    }
}
