//! Scenario export: one table file per dataset part plus a manifest that
//! is sufficient to regenerate the scenario bit-exactly.

use std::collections::BTreeMap;
use std::path::Path;

use crate::data::{write_table, Dataset};
use crate::error::{Error, Result};

use super::{CddScenario, EncRun, FeatureShiftSpec, ShiftMode};

#[derive(Debug)]
pub enum Scenario<'a> {
    Enc(&'a EncRun),
    FeatureShift {
        test: &'a Dataset,
        spec: &'a FeatureShiftSpec,
    },
    Cdd(&'a CddScenario),
}

/// Everything needed to regenerate the exported scenario and to key
/// external prediction files to it (ids and class order).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScenarioManifest {
    pub kind: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub removed_columns: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub held_out_class: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_new: Option<usize>,
    /// Column carrying sample ids in every exported table.
    pub id_column: String,
    /// Class label per probability column expected from prediction files.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class_order: Option<Vec<String>>,
    pub split_sizes: BTreeMap<String, usize>,
    /// Part name -> file name within the export directory.
    pub files: BTreeMap<String, String>,
}

impl ScenarioManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text)
            .map_err(|e| Error::InvalidInput(format!("bad manifest: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidInput(format!("manifest serialization: {e}")))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn id_column_name(ds: &Dataset) -> String {
    if let Some(name) = &ds.schema().id_column {
        return name.clone();
    }
    let mut candidate = "sample_id".to_string();
    let mut k = 1usize;
    while ds.schema().feature_index(&candidate).is_some() || ds.schema().target == candidate {
        candidate = format!("sample_id_{k}");
        k += 1;
    }
    candidate
}

fn write_part(ds: &Dataset, dir: &Path, part: &str, id_column: &str) -> Result<(String, usize)> {
    let file = format!("{part}.csv");
    write_table(&ds.with_id_column(id_column), &dir.join(&file))?;
    Ok((file, ds.n_rows()))
}

fn class_order(ds: &Dataset) -> Option<Vec<String>> {
    if ds.schema().task.is_classification() {
        Some(ds.class_names().to_vec())
    } else {
        None
    }
}

/// Write every dataset part of a scenario under `dir` plus `manifest.json`.
pub fn export_scenario(scenario: &Scenario, dir: &Path) -> Result<ScenarioManifest> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files = BTreeMap::new();
    let mut split_sizes = BTreeMap::new();
    let manifest = match scenario {
        Scenario::Enc(run) => {
            let id_column = id_column_name(&run.train);
            for (part, ds) in [("train", &run.train), ("detection_test", &run.detection_test)] {
                let (file, n) = write_part(ds, dir, part, &id_column)?;
                files.insert(part.to_string(), file);
                split_sizes.insert(part.to_string(), n);
            }
            ScenarioManifest {
                kind: "enc".into(),
                seed: run.seed,
                level: None,
                removed_columns: None,
                held_out_class: Some(
                    run.detection_test.class_name(run.held_out_class).to_string(),
                ),
                n_new: None,
                id_column,
                class_order: class_order(&run.detection_test),
                split_sizes,
                files,
            }
        }
        Scenario::FeatureShift { test, spec } => {
            let id_column = id_column_name(test);
            let (file, n) = write_part(test, dir, "test", &id_column)?;
            files.insert("test".into(), file);
            split_sizes.insert("test".into(), n);
            let (kind, level, n_new) = match spec.mode {
                ShiftMode::Decremental => ("decremental", Some(spec.level), None),
                ShiftMode::Incremental => ("incremental", None, Some(spec.n_new)),
            };
            ScenarioManifest {
                kind: kind.into(),
                seed: spec.seed,
                level,
                removed_columns: Some(spec.removed.clone()),
                held_out_class: None,
                n_new,
                id_column,
                class_order: class_order(test),
                split_sizes,
                files,
            }
        }
        Scenario::Cdd(s) => {
            let id_column = id_column_name(&s.train);
            for (part, ds) in [
                ("train", &s.train),
                ("id_test", &s.id_test),
                ("ood_test", &s.ood_test),
            ] {
                let (file, n) = write_part(ds, dir, part, &id_column)?;
                files.insert(part.to_string(), file);
                split_sizes.insert(part.to_string(), n);
            }
            ScenarioManifest {
                kind: "cdd".into(),
                seed: 0,
                level: None,
                removed_columns: None,
                held_out_class: None,
                n_new: None,
                id_column,
                class_order: class_order(&s.train),
                split_sizes,
                files,
            }
        }
    };
    manifest.write(&dir.join("manifest.json"))?;
    Ok(manifest)
}
