//! Tabular datasets: schema, ingestion, standardization, imputation
//! statistics, and seeded stratified sampling/splitting.
//!
//! A [`Dataset`] stores features as an `n x m` matrix of `f64`. Numeric
//! columns hold their values directly; categorical columns hold interned
//! codes whose dictionary maps each code back to exactly one original
//! string. Missing entries are `NaN`. All types are immutable after
//! construction and every randomized operation takes an explicit seed, so
//! datasets are safe to share across concurrent workers.

mod load;
pub(crate) mod sample;
mod standardize;

pub use load::{load_table, write_table, SchemaHints};
pub use sample::{split_holdout, stratified_subsample, stratified_subsample_by};
pub use standardize::{
    apply_standardizer, fill_missing, fit_imputer, fit_standardizer, impute, ColumnStat, Imputer,
    Standardizer,
};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Binary,
    Multiclass,
    Regression,
}

impl Task {
    pub fn is_classification(self) -> bool {
        !matches!(self, Task::Regression)
    }
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(Task::Binary),
            "multiclass" => Ok(Task::Multiclass),
            "regression" => Ok(Task::Regression),
            other => Err(Error::InvalidInput(format!("unknown task '{other}'"))),
        }
    }
}

/// Split tag carried by the optional split column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    IdTest,
    OodTest,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::IdTest => "id_test",
            Split::OodTest => "ood_test",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "id_test" => Ok(Split::IdTest),
            "ood_test" => Ok(Split::OodTest),
            other => Err(Error::Table(format!(
                "split value '{other}' is not one of train/id_test/ood_test"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSchema {
    /// Feature columns, ordered. The target is not listed here.
    pub columns: Vec<Column>,
    pub target: String,
    pub task: Task,
    pub id_column: Option<String>,
    pub split_column: Option<String>,
}

impl DatasetSchema {
    fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for c in &self.columns {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::Schema(format!("duplicate column name '{}'", c.name)));
            }
        }
        if seen.contains(self.target.as_str()) {
            return Err(Error::Schema(format!(
                "target '{}' is also listed among feature columns",
                self.target
            )));
        }
        Ok(())
    }

    pub fn feature_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// True when both schemas have the same feature columns (names and
    /// kinds, in order), target name, and task.
    pub fn same_features(&self, other: &DatasetSchema) -> bool {
        self.columns == other.columns && self.target == other.target && self.task == other.task
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    /// Class codes indexing into `Dataset::class_names`.
    Classes(Vec<u32>),
    Values(Vec<f64>),
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::Classes(v) => v.len(),
            Targets::Values(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_classes(&self) -> Result<&[u32]> {
        match self {
            Targets::Classes(v) => Ok(v),
            Targets::Values(_) => Err(Error::InvalidInput(
                "expected classification targets, found regression values".into(),
            )),
        }
    }

    pub fn as_values(&self) -> Result<&[f64]> {
        match self {
            Targets::Values(v) => Ok(v),
            Targets::Classes(_) => Err(Error::InvalidInput(
                "expected regression targets, found class codes".into(),
            )),
        }
    }

    fn select(&self, idx: &[usize]) -> Targets {
        match self {
            Targets::Classes(v) => Targets::Classes(idx.iter().map(|&i| v[i]).collect()),
            Targets::Values(v) => Targets::Values(idx.iter().map(|&i| v[i]).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: DatasetSchema,
    features: Array2<f64>,
    /// Per feature column: dictionary mapping code -> original string.
    /// Empty for numeric columns.
    cat_values: Vec<Vec<String>>,
    targets: Targets,
    /// Class dictionary for classification targets (code -> label).
    class_names: Vec<String>,
    sample_ids: Vec<String>,
    splits: Option<Vec<Split>>,
}

impl Dataset {
    pub fn new(
        schema: DatasetSchema,
        features: Array2<f64>,
        cat_values: Vec<Vec<String>>,
        targets: Targets,
        class_names: Vec<String>,
        sample_ids: Vec<String>,
        splits: Option<Vec<Split>>,
    ) -> Result<Self> {
        schema.validate()?;
        let n = features.nrows();
        if schema.columns.len() != features.ncols() {
            return Err(Error::Schema(format!(
                "schema lists {} feature columns but matrix has {}",
                schema.columns.len(),
                features.ncols()
            )));
        }
        if cat_values.len() != schema.columns.len() {
            return Err(Error::Schema(
                "one category dictionary required per feature column".into(),
            ));
        }
        if targets.len() != n || sample_ids.len() != n {
            return Err(Error::Schema(format!(
                "row count {} does not match target count {} / id count {}",
                n,
                targets.len(),
                sample_ids.len()
            )));
        }
        if let Some(s) = &splits {
            if s.len() != n {
                return Err(Error::Schema("split tag count does not match row count".into()));
            }
        }
        match (&targets, schema.task) {
            (Targets::Values(_), Task::Regression) => {}
            (Targets::Classes(codes), Task::Binary | Task::Multiclass) => {
                let distinct: std::collections::HashSet<u32> = codes.iter().copied().collect();
                if !codes.is_empty() && distinct.len() < 2 && schema.task == Task::Binary {
                    // A derived subset (e.g. one class held out) may observe a
                    // single class; only a freshly loaded table enforces >= 2.
                }
                if let Some(&max) = codes.iter().max() {
                    if (max as usize) >= class_names.len() {
                        return Err(Error::Schema(format!(
                            "class code {max} has no entry in the class dictionary"
                        )));
                    }
                }
            }
            _ => {
                return Err(Error::Schema(
                    "target representation does not match task kind".into(),
                ))
            }
        }
        Ok(Dataset {
            schema,
            features,
            cat_values,
            targets,
            class_names,
            sample_ids,
            splits,
        })
    }

    /// Convenience constructor for all-numeric data with generated row ids.
    pub fn from_numeric(
        feature_names: &[&str],
        features: Array2<f64>,
        targets: Targets,
        task: Task,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let columns = feature_names
            .iter()
            .map(|n| Column {
                name: (*n).to_string(),
                kind: ColumnKind::Numeric,
            })
            .collect();
        let schema = DatasetSchema {
            columns,
            target: "target".into(),
            task,
            id_column: None,
            split_column: None,
        };
        let n = features.nrows();
        let cat_values = vec![Vec::new(); feature_names.len()];
        let ids = (0..n).map(|i| i.to_string()).collect();
        Dataset::new(schema, features, cat_values, targets, class_names, ids, None)
    }

    pub fn schema(&self) -> &DatasetSchema {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn feature_column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.features.column(j)
    }

    pub fn targets(&self) -> &Targets {
        &self.targets
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_name(&self, code: u32) -> &str {
        &self.class_names[code as usize]
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn splits(&self) -> Option<&[Split]> {
        self.splits.as_deref()
    }

    pub fn category_dict(&self, j: usize) -> &[String] {
        &self.cat_values[j]
    }

    /// Distinct class codes observed in the targets, ascending.
    pub fn observed_classes(&self) -> Result<Vec<u32>> {
        let codes = self.targets.as_classes()?;
        let mut distinct: Vec<u32> = codes.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        Ok(distinct)
    }

    /// Count of rows per observed class code.
    pub fn class_counts(&self) -> Result<Vec<(u32, usize)>> {
        let codes = self.targets.as_classes()?;
        let mut counts: std::collections::BTreeMap<u32, usize> = std::collections::BTreeMap::new();
        for &c in codes {
            *counts.entry(c).or_insert(0) += 1;
        }
        Ok(counts.into_iter().collect())
    }

    /// Subset of rows, preserving the given index order.
    pub fn select_rows(&self, idx: &[usize]) -> Dataset {
        let features = self.features.select(Axis(0), idx);
        Dataset {
            schema: self.schema.clone(),
            features,
            cat_values: self.cat_values.clone(),
            targets: self.targets.select(idx),
            class_names: self.class_names.clone(),
            sample_ids: idx.iter().map(|&i| self.sample_ids[i].clone()).collect(),
            splits: self
                .splits
                .as_ref()
                .map(|s| idx.iter().map(|&i| s[i]).collect()),
        }
    }

    /// Restrict to the named feature columns, in the given order.
    pub fn select_columns(&self, names: &[&str]) -> Result<Dataset> {
        let mut idx = Vec::with_capacity(names.len());
        for name in names {
            let j = self
                .schema
                .feature_index(name)
                .ok_or_else(|| Error::Schema(format!("feature column '{name}' missing")))?;
            idx.push(j);
        }
        let features = self.features.select(Axis(1), &idx);
        let columns = idx.iter().map(|&j| self.schema.columns[j].clone()).collect();
        let cat_values = idx.iter().map(|&j| self.cat_values[j].clone()).collect();
        Ok(Dataset {
            schema: DatasetSchema {
                columns,
                ..self.schema.clone()
            },
            features,
            cat_values,
            targets: self.targets.clone(),
            class_names: self.class_names.clone(),
            sample_ids: self.sample_ids.clone(),
            splits: self.splits.clone(),
        })
    }

    /// Replace every entry of feature column `j` with `value`.
    pub fn with_constant_column(&self, j: usize, value: f64) -> Dataset {
        let mut out = self.clone();
        out.features.column_mut(j).fill(value);
        out
    }

    pub(crate) fn with_features(&self, features: Array2<f64>) -> Dataset {
        debug_assert_eq!(features.dim(), self.features.dim());
        Dataset {
            features,
            ..self.clone()
        }
    }

    /// Same data with the id column named, so written tables carry ids.
    pub fn with_id_column(&self, name: &str) -> Dataset {
        let mut out = self.clone();
        out.schema.id_column = Some(name.to_string());
        out
    }

    /// Append a numeric column; the caller guarantees the name is fresh.
    pub fn push_numeric_column(&self, name: &str, values: Array1<f64>) -> Result<Dataset> {
        if self.schema.feature_index(name).is_some() || self.schema.target == name {
            return Err(Error::Schema(format!("column '{name}' already exists")));
        }
        if values.len() != self.n_rows() {
            return Err(Error::Schema("new column length does not match row count".into()));
        }
        let mut features = Array2::zeros((self.n_rows(), self.n_features() + 1));
        features
            .slice_mut(ndarray::s![.., ..self.n_features()])
            .assign(&self.features);
        features.column_mut(self.n_features()).assign(&values);
        let mut schema = self.schema.clone();
        schema.columns.push(Column {
            name: name.to_string(),
            kind: ColumnKind::Numeric,
        });
        let mut cat_values = self.cat_values.clone();
        cat_values.push(Vec::new());
        Ok(Dataset {
            schema,
            features,
            cat_values,
            ..self.clone()
        })
    }

    /// Strata used for stratified subsampling: (class x split) for
    /// classification, (split) for regression. `class_only` drops the
    /// split component for classification tasks.
    pub(crate) fn stratum_keys(&self, class_only: bool) -> Vec<(u32, u8)> {
        let split_tag = |i: usize| -> u8 {
            match self.splits.as_ref().map(|s| s[i]) {
                None => 0,
                Some(Split::Train) => 0,
                Some(Split::IdTest) => 1,
                Some(Split::OodTest) => 2,
            }
        };
        (0..self.n_rows())
            .map(|i| {
                let class = match &self.targets {
                    Targets::Classes(c) => c[i],
                    Targets::Values(_) => 0,
                };
                let split = if class_only { 0 } else { split_tag(i) };
                (class, split)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn schema_rejects_duplicate_columns() {
        let schema = DatasetSchema {
            columns: vec![
                Column { name: "a".into(), kind: ColumnKind::Numeric },
                Column { name: "a".into(), kind: ColumnKind::Numeric },
            ],
            target: "y".into(),
            task: Task::Binary,
            id_column: None,
            split_column: None,
        };
        assert!(schema.validate().is_err());
    }

    #[test]
    fn schema_rejects_target_among_features() {
        let schema = DatasetSchema {
            columns: vec![Column { name: "y".into(), kind: ColumnKind::Numeric }],
            target: "y".into(),
            task: Task::Regression,
            id_column: None,
            split_column: None,
        };
        assert!(schema.validate().is_err());
    }

    #[test]
    fn new_rejects_row_count_mismatch() {
        let features = array![[1.0, 2.0], [3.0, 4.0]];
        let err = Dataset::from_numeric(
            &["a", "b"],
            features,
            Targets::Classes(vec![0]),
            Task::Binary,
            vec!["n".into(), "p".into()],
        );
        assert!(err.is_err());
    }

    #[test]
    fn select_rows_preserves_order_and_ids() {
        let ds = Dataset::from_numeric(
            &["a"],
            array![[0.0], [1.0], [2.0], [3.0]],
            Targets::Classes(vec![0, 1, 0, 1]),
            Task::Binary,
            vec!["n".into(), "p".into()],
        )
        .unwrap();
        let sub = ds.select_rows(&[2, 0]);
        assert_eq!(sub.sample_ids(), &["2".to_string(), "0".to_string()]);
        assert_eq!(sub.features()[[0, 0]], 2.0);
        assert_eq!(sub.features()[[1, 0]], 0.0);
    }

    #[test]
    fn push_numeric_column_rejects_collisions() {
        let ds = Dataset::from_numeric(
            &["a"],
            array![[0.0], [1.0]],
            Targets::Values(vec![0.0, 1.0]),
            Task::Regression,
            vec![],
        )
        .unwrap();
        assert!(ds.push_numeric_column("a", array![1.0, 2.0]).is_err());
        let bigger = ds.push_numeric_column("b", array![5.0, 6.0]).unwrap();
        assert_eq!(bigger.n_features(), 2);
        assert_eq!(bigger.features()[[1, 1]], 6.0);
    }
}
