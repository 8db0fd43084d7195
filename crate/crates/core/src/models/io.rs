//! External-model bridge: prediction and embedding files.
//!
//! Prediction format: header `id,value` for regression or
//! `id,p_<class1>,...,p_<classK>` for classification, with the class order
//! taken from the scenario manifest. Embedding format: `id,e_1,...,e_d`.

use std::collections::HashMap;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::metrics::PredictionSet;

/// What a prediction file must conform to: the scenario's sample ids (in
/// evaluation order) and, for classification, the class-name order.
#[derive(Debug, Clone)]
pub struct PredictionSchema<'a> {
    pub sample_ids: &'a [String],
    /// One entry per probability column; `None` for regression.
    pub class_names: Option<&'a [String]>,
}

/// Load and validate a prediction file against the expected schema. Rows
/// are reordered to the schema's id order. Probability rows with sums
/// within 1e-3 of 1 are renormalized; anything further off is an error.
pub fn load_predictions(path: &Path, schema: &PredictionSchema) -> Result<PredictionSet> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::Reader::from_reader(file);
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header.first().map(|h| h.as_str()) != Some("id") {
        return Err(Error::Table("prediction file must start with an 'id' column".into()));
    }

    match schema.class_names {
        Some(class_names) => {
            let expected: Vec<String> =
                class_names.iter().map(|c| format!("p_{c}")).collect();
            if header[1..] != expected[..] {
                return Err(Error::Table(format!(
                    "prediction columns {:?} do not match expected class order {:?}",
                    &header[1..],
                    expected
                )));
            }
        }
        None => {
            if header[1..] != ["value".to_string()] {
                return Err(Error::Table(
                    "regression prediction file needs columns id,value".into(),
                ));
            }
        }
    }

    let n_cols = header.len() - 1;
    let mut by_id: HashMap<String, Vec<f64>> = HashMap::new();
    let mut extras = Vec::new();
    let known: std::collections::HashSet<&String> = schema.sample_ids.iter().collect();
    for rec in reader.records() {
        let rec = rec?;
        let id = rec
            .get(0)
            .ok_or_else(|| Error::Table("row missing id field".into()))?
            .trim()
            .to_string();
        if !known.contains(&id) {
            extras.push(id);
            continue;
        }
        let mut row = Vec::with_capacity(n_cols);
        for j in 0..n_cols {
            let raw = rec
                .get(j + 1)
                .ok_or_else(|| Error::Table(format!("row '{id}' has too few fields")))?;
            let v: f64 = raw.trim().parse().map_err(|_| {
                Error::Table(format!("row '{id}' has non-numeric value '{raw}'"))
            })?;
            row.push(v);
        }
        if by_id.insert(id.clone(), row).is_some() {
            return Err(Error::Table(format!("duplicate prediction row for id '{id}'")));
        }
    }
    if !extras.is_empty() {
        return Err(Error::IdMismatch(format!(
            "ids not present in the scenario: {extras:?}"
        )));
    }
    let missing: Vec<&String> = schema
        .sample_ids
        .iter()
        .filter(|id| !by_id.contains_key(*id))
        .collect();
    if !missing.is_empty() {
        return Err(Error::IdMismatch(format!(
            "{} scenario ids missing from the prediction file (first: {:?})",
            missing.len(),
            missing.first()
        )));
    }

    match schema.class_names {
        Some(class_names) => {
            let mut probs = Array2::zeros((schema.sample_ids.len(), n_cols));
            for (i, id) in schema.sample_ids.iter().enumerate() {
                let row = &by_id[id];
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > 1e-3 {
                    return Err(Error::Table(format!(
                        "probability row for id '{id}' sums to {sum}, outside [0.999, 1.001]"
                    )));
                }
                if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                    return Err(Error::Table(format!(
                        "probability row for id '{id}' has entries outside [0,1]"
                    )));
                }
                for (j, p) in row.iter().enumerate() {
                    probs[[i, j]] = p / sum;
                }
            }
            let class_order = (0..class_names.len() as u32).collect();
            PredictionSet::class_probs(schema.sample_ids.to_vec(), probs, class_order)
        }
        None => {
            let values = schema
                .sample_ids
                .iter()
                .map(|id| by_id[id][0])
                .collect();
            PredictionSet::regression(schema.sample_ids.to_vec(), values)
        }
    }
}

/// Load an embedding file (`id,e_1,...,e_d`); returns ids and the matrix
/// in file order.
pub fn load_embeddings(path: &Path) -> Result<(Vec<String>, Array2<f64>)> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::Reader::from_reader(file);
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header.first().map(|h| h.as_str()) != Some("id") || header.len() < 2 {
        return Err(Error::Table(
            "embedding file needs columns id,e_1,...,e_d".into(),
        ));
    }
    let d = header.len() - 1;
    let mut ids = Vec::new();
    let mut rows: Vec<f64> = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        ids.push(
            rec.get(0)
                .ok_or_else(|| Error::Table("row missing id field".into()))?
                .trim()
                .to_string(),
        );
        for j in 0..d {
            let raw = rec
                .get(j + 1)
                .ok_or_else(|| Error::Table("embedding row has too few fields".into()))?;
            rows.push(raw.trim().parse().map_err(|_| {
                Error::Table(format!("non-numeric embedding value '{raw}'"))
            })?);
        }
    }
    if ids.is_empty() {
        return Err(Error::Table("embedding file has no data rows".into()));
    }
    let n = ids.len();
    let matrix = Array2::from_shape_vec((n, d), rows)
        .expect("row-major embedding values fill the matrix");
    Ok((ids, matrix))
}
