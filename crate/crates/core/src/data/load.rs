//! Delimiter-separated table ingestion with schema inference, plus the
//! matching writer used by scenario export.

use std::collections::HashSet;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

use super::{Column, ColumnKind, Dataset, DatasetSchema, Split, Targets, Task};

/// Overrides for schema inference, typically read from a TOML config file.
///
/// Documented keys: `target`, `task`, `id_column`, `split_column`,
/// `categorical` (list of column names), `delimiter`.
#[derive(Debug, Clone, Default, serde::Deserialize)]
pub struct SchemaHints {
    pub target: Option<String>,
    pub task: Option<Task>,
    pub id_column: Option<String>,
    pub split_column: Option<String>,
    #[serde(default)]
    pub categorical: Vec<String>,
    pub delimiter: Option<char>,
}

impl SchemaHints {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| Error::InvalidInput(format!("bad hints file: {e}")))
    }
}

fn is_missing(raw: &str) -> bool {
    matches!(raw.trim(), "" | "NA" | "?")
}

fn parse_numeric(raw: &str) -> Option<f64> {
    raw.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Load a delimiter-separated table with a mandatory header row.
///
/// A column is categorical if any non-missing value fails numeric parsing
/// or if hinted. The target defaults to the last column. Task inference:
/// non-numeric target -> binary (2 distinct values) or multiclass;
/// numeric target -> binary (<= 2 distinct), multiclass (<= 10 distinct,
/// all integer-coded), else regression.
pub fn load_table(path: &Path, hints: &SchemaHints) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let delimiter = hints.delimiter.unwrap_or(',') as u8;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .from_reader(file);

    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.is_empty() {
        return Err(Error::Table("empty table: no header row".into()));
    }
    let mut seen = HashSet::new();
    for name in &header {
        if !seen.insert(name.as_str()) {
            return Err(Error::Table(format!("duplicate header column '{name}'")));
        }
    }

    let mut records: Vec<csv::StringRecord> = Vec::new();
    for rec in reader.records() {
        records.push(rec?);
    }
    if records.is_empty() {
        return Err(Error::Table("empty table: header but no data rows".into()));
    }

    // Default target: last column that is not the id or split column.
    let target_name = match hints.target.clone() {
        Some(t) => t,
        None => header
            .iter()
            .rev()
            .find(|h| Some(*h) != hints.id_column.as_ref() && Some(*h) != hints.split_column.as_ref())
            .ok_or_else(|| Error::Table("no target column candidate".into()))?
            .clone(),
    };
    let target_idx = header
        .iter()
        .position(|h| *h == target_name)
        .ok_or_else(|| Error::Table(format!("target column absent: '{target_name}'")))?;
    let id_idx = match &hints.id_column {
        Some(name) => Some(
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Table(format!("id column absent: '{name}'")))?,
        ),
        None => None,
    };
    let split_idx = match &hints.split_column {
        Some(name) => Some(
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Table(format!("split column absent: '{name}'")))?,
        ),
        None => None,
    };

    let feature_idx: Vec<usize> = (0..header.len())
        .filter(|&j| j != target_idx && Some(j) != id_idx && Some(j) != split_idx)
        .collect();

    let n = records.len();
    let cell = |rec: &csv::StringRecord, j: usize| -> Result<String> {
        rec.get(j)
            .map(|s| s.to_string())
            .ok_or_else(|| Error::Table(format!("row has fewer than {} fields", j + 1)))
    };

    // Column kinds: numeric unless hinted categorical or any value fails parsing.
    let mut kinds = Vec::with_capacity(feature_idx.len());
    for &j in &feature_idx {
        let hinted = hints.categorical.iter().any(|c| *c == header[j]);
        let mut observed = false;
        let mut numeric = true;
        for rec in &records {
            let raw = cell(rec, j)?;
            if is_missing(&raw) {
                continue;
            }
            observed = true;
            if numeric && parse_numeric(&raw).is_none() {
                numeric = false;
            }
        }
        if !observed {
            return Err(Error::Table(format!(
                "column '{}' has no observed values",
                header[j]
            )));
        }
        kinds.push(if numeric && !hinted {
            ColumnKind::Numeric
        } else {
            ColumnKind::Categorical
        });
    }

    // Feature matrix with interned categorical codes.
    let mut features = Array2::from_elem((n, feature_idx.len()), f64::NAN);
    let mut cat_values: Vec<Vec<String>> = vec![Vec::new(); feature_idx.len()];
    for (col, (&j, kind)) in feature_idx.iter().zip(&kinds).enumerate() {
        for (i, rec) in records.iter().enumerate() {
            let raw = cell(rec, j)?;
            if is_missing(&raw) {
                continue;
            }
            features[[i, col]] = match kind {
                ColumnKind::Numeric => parse_numeric(&raw).ok_or_else(|| {
                    Error::Table(format!("non-numeric value '{raw}' in numeric column"))
                })?,
                ColumnKind::Categorical => {
                    let trimmed = raw.trim().to_string();
                    let code = match cat_values[col].iter().position(|v| *v == trimmed) {
                        Some(c) => c,
                        None => {
                            cat_values[col].push(trimmed);
                            cat_values[col].len() - 1
                        }
                    };
                    code as f64
                }
            };
        }
    }

    // Target column: parse raw values, infer task if not hinted.
    let mut raw_targets = Vec::with_capacity(n);
    for (i, rec) in records.iter().enumerate() {
        let raw = cell(rec, target_idx)?;
        if is_missing(&raw) {
            return Err(Error::Table(format!("missing target value at data row {i}")));
        }
        raw_targets.push(raw.trim().to_string());
    }
    let target_numeric = raw_targets.iter().all(|r| parse_numeric(r).is_some());
    let distinct: HashSet<&str> = raw_targets.iter().map(|s| s.as_str()).collect();
    let task = match hints.task {
        Some(t) => t,
        None => {
            if !target_numeric {
                if distinct.len() <= 2 {
                    Task::Binary
                } else {
                    Task::Multiclass
                }
            } else if distinct.len() <= 2 {
                Task::Binary
            } else if distinct.len() <= 10
                && raw_targets
                    .iter()
                    .all(|r| parse_numeric(r).map(|v| v.fract() == 0.0).unwrap_or(false))
            {
                Task::Multiclass
            } else {
                Task::Regression
            }
        }
    };

    let (targets, class_names) = match task {
        Task::Regression => {
            if !target_numeric {
                return Err(Error::Table(
                    "regression target contains non-numeric values".into(),
                ));
            }
            let values = raw_targets
                .iter()
                .map(|r| parse_numeric(r).expect("checked numeric"))
                .collect();
            (Targets::Values(values), Vec::new())
        }
        Task::Binary | Task::Multiclass => {
            if distinct.len() < 2 {
                return Err(Error::Table(
                    "classification target has fewer than 2 distinct values".into(),
                ));
            }
            if task == Task::Binary && distinct.len() > 2 {
                return Err(Error::Table(format!(
                    "binary task but target has {} distinct values",
                    distinct.len()
                )));
            }
            let mut names: Vec<String> = Vec::new();
            let mut codes = Vec::with_capacity(n);
            for r in &raw_targets {
                let code = match names.iter().position(|v| v == r) {
                    Some(c) => c,
                    None => {
                        names.push(r.clone());
                        names.len() - 1
                    }
                };
                codes.push(code as u32);
            }
            (Targets::Classes(codes), names)
        }
    };

    let sample_ids = match id_idx {
        Some(j) => records
            .iter()
            .map(|rec| cell(rec, j).map(|s| s.trim().to_string()))
            .collect::<Result<Vec<_>>>()?,
        None => (0..n).map(|i| i.to_string()).collect(),
    };

    let splits = match split_idx {
        Some(j) => {
            let mut tags = Vec::with_capacity(n);
            for rec in &records {
                tags.push(Split::parse(cell(rec, j)?.trim())?);
            }
            Some(tags)
        }
        None => None,
    };

    let columns = feature_idx
        .iter()
        .zip(kinds)
        .map(|(&j, kind)| Column {
            name: header[j].clone(),
            kind,
        })
        .collect();
    let schema = DatasetSchema {
        columns,
        target: target_name,
        task,
        id_column: hints.id_column.clone(),
        split_column: hints.split_column.clone(),
    };
    Dataset::new(schema, features, cat_values, targets, class_names, sample_ids, splits)
}

/// Write a dataset back to the external table format. Categorical codes are
/// expanded to their original strings and missing entries to the empty
/// string, so loading the written file with matching hints reproduces
/// identical codes, targets, and ids.
pub fn write_table(ds: &Dataset, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = csv::Writer::from_writer(file);

    let schema = ds.schema();
    let mut header: Vec<String> = Vec::new();
    if let Some(idc) = &schema.id_column {
        header.push(idc.clone());
    }
    header.extend(schema.columns.iter().map(|c| c.name.clone()));
    header.push(schema.target.clone());
    if let Some(sc) = &schema.split_column {
        header.push(sc.clone());
    }
    w.write_record(&header)?;

    for i in 0..ds.n_rows() {
        let mut rec: Vec<String> = Vec::with_capacity(header.len());
        if schema.id_column.is_some() {
            rec.push(ds.sample_ids()[i].clone());
        }
        for (j, col) in schema.columns.iter().enumerate() {
            let v = ds.features()[[i, j]];
            if v.is_nan() {
                rec.push(String::new());
            } else {
                match col.kind {
                    ColumnKind::Numeric => rec.push(format!("{v}")),
                    ColumnKind::Categorical => rec.push(ds.category_dict(j)[v as usize].clone()),
                }
            }
        }
        match ds.targets() {
            Targets::Classes(codes) => rec.push(ds.class_name(codes[i]).to_string()),
            Targets::Values(vals) => rec.push(format!("{}", vals[i])),
        }
        if schema.split_column.is_some() {
            let tag = ds.splits().expect("split column implies split tags")[i];
            rec.push(tag.as_str().to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}
