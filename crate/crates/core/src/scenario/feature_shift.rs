//! Decremental and incremental feature shift.
//!
//! Decremental shift never retrains a model: the shifted test set keeps the
//! full training schema with the selected columns replaced by train-imputed
//! constants, so a model trained on the full schema can still predict.
//! Incremental shift appends synthetic columns; truncating them back with
//! [`align_features`] restores the original bytes, which is what makes the
//! truncation guarantee checkable.

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{fit_imputer, impute, Dataset, DatasetSchema};
use crate::error::{Error, Result};

use super::{FeatureShiftSpec, ShiftMode};

/// Ceiling of `level * m` guarded against floating-point slop just above
/// an integer.
fn shifted_column_count(level: f64, m: usize) -> usize {
    ((level * m as f64) - 1e-9).ceil().max(0.0) as usize
}

/// Replace `ceil(level * m)` uniformly chosen feature columns of `test`
/// with train-imputed values. Level 0 returns the test set bit-identical.
pub fn decremental_shift(
    train: &Dataset,
    test: &Dataset,
    level: f64,
    seed: u64,
) -> Result<(Dataset, FeatureShiftSpec)> {
    if !(0.0..=1.0).contains(&level) {
        return Err(Error::InvalidInput(format!(
            "shift level {level} outside [0, 1]"
        )));
    }
    if !train.schema().same_features(test.schema()) {
        return Err(Error::Schema(
            "train and test feature schemas differ".into(),
        ));
    }
    let m = train.n_features();
    let k = shifted_column_count(level, m).min(m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, m, k).into_vec();
    picked.sort_unstable();
    let removed: Vec<String> = picked
        .iter()
        .map(|&j| train.schema().columns[j].name.clone())
        .collect();

    let shifted = if removed.is_empty() {
        test.clone()
    } else {
        let imputer = fit_imputer(train)?;
        let names: Vec<&str> = removed.iter().map(|s| s.as_str()).collect();
        impute(&imputer, test, &names)?
    };
    Ok((
        shifted,
        FeatureShiftSpec {
            level,
            removed,
            mode: ShiftMode::Decremental,
            n_new: 0,
            seed,
        },
    ))
}

fn fresh_name(schema: &DatasetSchema, base: &str) -> String {
    if schema.feature_index(base).is_none() && schema.target != base {
        return base.to_string();
    }
    let mut k = 1usize;
    loop {
        let candidate = format!("{base}_{k}");
        if schema.feature_index(&candidate).is_none() && schema.target != candidate {
            return candidate;
        }
        k += 1;
    }
}

/// Append `n_new` synthetic standard-normal feature columns with fresh
/// names; original columns are untouched. Name collisions get a
/// deterministic numeric suffix.
pub fn incremental_shift(test: &Dataset, n_new: usize, seed: u64) -> Result<(Dataset, FeatureShiftSpec)> {
    if n_new == 0 {
        return Err(Error::InvalidInput("n_new must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = test.clone();
    let mut added = Vec::with_capacity(n_new);
    for i in 0..n_new {
        let name = fresh_name(out.schema(), &format!("synth_{i}"));
        let values = Array1::from_iter((0..test.n_rows()).map(|_| standard_normal(&mut rng)));
        out = out.push_numeric_column(&name, values)?;
        added.push(name);
    }
    Ok((
        out,
        FeatureShiftSpec {
            level: 0.0,
            removed: added,
            mode: ShiftMode::Incremental,
            n_new,
            seed,
        },
    ))
}

// Box-Muller; two uniform draws per sample keep the stream deterministic.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Restrict `test` to the training feature columns, in training order.
/// Predictions on the aligned set equal predictions on the original
/// training schema, realizing truncation as a schema-level guarantee.
pub fn align_features(train_schema: &DatasetSchema, test: &Dataset) -> Result<Dataset> {
    let mut names = Vec::with_capacity(train_schema.columns.len());
    for col in &train_schema.columns {
        match test.schema().feature_index(&col.name) {
            Some(j) if test.schema().columns[j].kind == col.kind => names.push(col.name.as_str()),
            Some(_) => {
                return Err(Error::Schema(format!(
                    "feature column '{}' has a different kind in the test set",
                    col.name
                )))
            }
            None => {
                return Err(Error::Schema(format!(
                    "train feature column '{}' missing from test set",
                    col.name
                )))
            }
        }
    }
    test.select_columns(&names)
}
