//! Train-fitted standardization and imputation statistics.

use crate::error::{Error, Result};

use super::{Column, ColumnKind, Dataset};

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnStat {
    Numeric {
        mean: f64,
        /// Population standard deviation; 1.0 when the column is constant.
        stddev: f64,
        constant: bool,
    },
    Categorical {
        /// Most frequent code; distance ties break on the smaller code.
        mode: u32,
    },
}

/// Per-column statistics fitted on a training set: (mean, stddev) for
/// numeric columns, mode code for categorical ones. Statistics ignore
/// missing entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    columns: Vec<Column>,
    stats: Vec<ColumnStat>,
}

impl Standardizer {
    pub fn stats(&self) -> &[ColumnStat] {
        &self.stats
    }

    fn check_schema(&self, ds: &Dataset) -> Result<()> {
        if self.columns != ds.schema().columns {
            return Err(Error::Schema(
                "dataset feature columns do not match the fitted statistics".into(),
            ));
        }
        Ok(())
    }
}

pub fn fit_standardizer(train: &Dataset) -> Result<Standardizer> {
    if train.n_rows() == 0 {
        return Err(Error::EmptyInput);
    }
    let mut stats = Vec::with_capacity(train.n_features());
    for (j, col) in train.schema().columns.iter().enumerate() {
        let column = train.feature_column(j);
        match col.kind {
            ColumnKind::Numeric => {
                let observed: Vec<f64> = column.iter().copied().filter(|v| !v.is_nan()).collect();
                if observed.is_empty() {
                    return Err(Error::InvalidInput(format!(
                        "column '{}' has no observed values",
                        col.name
                    )));
                }
                let n = observed.len() as f64;
                let mean = observed.iter().sum::<f64>() / n;
                let var = observed.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                let constant = var <= 0.0;
                stats.push(ColumnStat::Numeric {
                    mean,
                    stddev: if constant { 1.0 } else { var.sqrt() },
                    constant,
                });
            }
            ColumnKind::Categorical => {
                let mut counts: std::collections::BTreeMap<u32, usize> = Default::default();
                for v in column.iter().filter(|v| !v.is_nan()) {
                    *counts.entry(*v as u32).or_insert(0) += 1;
                }
                let mode = counts
                    .iter()
                    .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                    .map(|(&code, _)| code)
                    .ok_or_else(|| {
                        Error::InvalidInput(format!(
                            "column '{}' has no observed values",
                            col.name
                        ))
                    })?;
                stats.push(ColumnStat::Categorical { mode });
            }
        }
    }
    Ok(Standardizer {
        columns: train.schema().columns.clone(),
        stats,
    })
}

/// Map numeric columns to `(x - mean) / stddev` using train statistics;
/// categorical columns pass through unchanged. Missing entries stay missing.
pub fn apply_standardizer(s: &Standardizer, ds: &Dataset) -> Result<Dataset> {
    s.check_schema(ds)?;
    let mut features = ds.features().to_owned();
    for (j, stat) in s.stats.iter().enumerate() {
        if let ColumnStat::Numeric { mean, stddev, .. } = stat {
            features
                .column_mut(j)
                .mapv_inplace(|v| (v - mean) / stddev);
        }
    }
    Ok(ds.with_features(features))
}

/// Imputation model backed by the same train statistics as the standardizer.
#[derive(Debug, Clone, PartialEq)]
pub struct Imputer(Standardizer);

impl Imputer {
    pub fn standardizer(&self) -> &Standardizer {
        &self.0
    }
}

pub fn fit_imputer(train: &Dataset) -> Result<Imputer> {
    Ok(Imputer(fit_standardizer(train)?))
}

/// Fill each named column entirely with its train mean (numeric) or train
/// mode (categorical). Row order and schema are preserved.
pub fn impute(model: &Imputer, ds: &Dataset, missing_columns: &[&str]) -> Result<Dataset> {
    model.0.check_schema(ds)?;
    let mut out = ds.clone();
    for name in missing_columns {
        let j = ds
            .schema()
            .feature_index(name)
            .ok_or_else(|| Error::Schema(format!("column '{name}' not in train schema")))?;
        let fill = match &model.0.stats[j] {
            ColumnStat::Numeric { mean, .. } => *mean,
            ColumnStat::Categorical { mode } => *mode as f64,
        };
        out = out.with_constant_column(j, fill);
    }
    Ok(out)
}

/// Replace missing entries (NaN) with the train mean / mode, leaving
/// observed values untouched.
pub fn fill_missing(model: &Imputer, ds: &Dataset) -> Result<Dataset> {
    model.0.check_schema(ds)?;
    let mut features = ds.features().to_owned();
    for (j, stat) in model.0.stats.iter().enumerate() {
        let fill = match stat {
            ColumnStat::Numeric { mean, .. } => *mean,
            ColumnStat::Categorical { mode } => *mode as f64,
        };
        features
            .column_mut(j)
            .mapv_inplace(|v| if v.is_nan() { fill } else { v });
    }
    Ok(ds.with_features(features))
}
