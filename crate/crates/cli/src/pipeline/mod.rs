//! Task orchestration: each task produces report tables and result
//! records; the orchestrator merges them, appends the cross-model rank
//! table when applicable, and writes all output files.

mod cdd;
mod enc;
mod feature;
mod vlo;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;

use openenv_core::data::{load_table, split_holdout, Dataset, Split, Task};
use openenv_core::error::Error;
use openenv_core::metrics::{Objective, PredictionSet};
use openenv_core::models::{
    knn_fit, knn_predict_proba, load_predictions, logreg_fit, logreg_predict_proba, mlp_fit,
    mlp_predict_proba, KnnModel, LogRegConfig, LogRegModel, MlpConfig, MlpModel, PredictionSchema,
};
use openenv_core::report::{
    emit_report, rank_report, write_results, ReportFormat, ReportTable, ResultRecord,
};

use crate::config::{ModelKind, RunConfig, TaskKind};
use crate::CliError;

pub(crate) struct TaskOutput {
    pub tables: Vec<ReportTable>,
    pub records: Vec<ResultRecord>,
    /// "task/model" -> number of training invocations.
    pub training_invocations: BTreeMap<String, usize>,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    tasks: Vec<&'static str>,
    datasets: Vec<String>,
    models: Vec<String>,
    seed: u64,
    levels: &'a [f64],
    cap: usize,
    n_new: usize,
    test_fraction: f64,
    objectives: Vec<&'static str>,
    export_dataset: bool,
    knn_k: usize,
    training_invocations: &'a BTreeMap<String, usize>,
}

/// Run every configured task and write report.txt, report.json,
/// results.json, and run_manifest.json under the output directory.
pub fn execute(config: &RunConfig) -> Result<(), CliError> {
    std::fs::create_dir_all(&config.out).map_err(|source| {
        CliError::Data(Error::Io {
            path: config.out.clone(),
            source,
        })
    })?;

    let mut tables = Vec::new();
    let mut records = Vec::new();
    let mut training = BTreeMap::new();
    for task in &config.tasks {
        let mut out = match task {
            TaskKind::Enc => enc::run(config)?,
            TaskKind::Df => feature::run_df(config)?,
            TaskKind::Inf => feature::run_inf(config)?,
            TaskKind::Cdd => cdd::run(config)?,
            TaskKind::Vlo => vlo::run(config)?,
        };
        tables.append(&mut out.tables);
        records.append(&mut out.records);
        training.append(&mut out.training_invocations);
    }

    if config.models.len() >= 2 {
        let rankable: Vec<ResultRecord> = records
            .iter()
            .filter(|r| is_rankable_metric(&r.metric))
            .cloned()
            .collect();
        tables.push(rank_report(&rankable).map_err(CliError::Data)?);
    }

    emit_report(&tables, ReportFormat::PlainTable, &config.out.join("report.txt"))
        .map_err(CliError::Data)?;
    emit_report(&tables, ReportFormat::Structured, &config.out.join("report.json"))
        .map_err(CliError::Data)?;
    write_results(&records, &config.out.join("results.json")).map_err(CliError::Data)?;

    let manifest = RunManifest {
        tasks: config.tasks.iter().map(|t| t.name()).collect(),
        datasets: config
            .datasets
            .iter()
            .map(|p| p.display().to_string())
            .collect(),
        models: config.models.iter().map(|m| m.name()).collect(),
        seed: config.seed,
        levels: &config.levels,
        cap: config.cap,
        n_new: config.n_new,
        test_fraction: config.test_fraction,
        objectives: config.objectives.iter().map(|o| o.name()).collect(),
        export_dataset: config.export_dataset,
        knn_k: config.knn_k,
        training_invocations: &training,
    };
    let mut text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::Config(format!("manifest serialization: {e}")))?;
    text.push('\n');
    std::fs::write(config.out.join("run_manifest.json"), text).map_err(|source| {
        CliError::Data(Error::Io {
            path: config.out.join("run_manifest.json"),
            source,
        })
    })?;
    Ok(())
}

fn is_rankable_metric(metric: &str) -> bool {
    matches!(
        metric,
        "accuracy" | "balanced_accuracy" | "f1" | "roc_auc" | "aupr" | "rmse"
    )
}

pub(crate) enum Trained {
    Knn(KnnModel),
    LogReg(LogRegModel),
    Mlp(Box<MlpModel>),
    External(PathBuf),
}

impl Trained {
    pub(crate) fn mlp(&self) -> Option<&MlpModel> {
        match self {
            Trained::Mlp(m) => Some(m),
            _ => None,
        }
    }

    pub(crate) fn external_dir(&self) -> Option<&PathBuf> {
        match self {
            Trained::External(dir) => Some(dir),
            _ => None,
        }
    }
}

/// Fit a built-in model, counting the training invocation; external models
/// are fitted elsewhere and only referenced.
pub(crate) fn fit_model(
    kind: &ModelKind,
    train: &Dataset,
    config: &RunConfig,
    counter: &mut usize,
) -> Result<Trained, Error> {
    match kind {
        ModelKind::Knn => {
            *counter += 1;
            Ok(Trained::Knn(knn_fit(train, config.knn_k)?))
        }
        ModelKind::LogReg => {
            *counter += 1;
            Ok(Trained::LogReg(logreg_fit(train, &LogRegConfig::default())?))
        }
        ModelKind::Mlp => {
            *counter += 1;
            let cfg = MlpConfig {
                seed: config.seed,
                ..Default::default()
            };
            Ok(Trained::Mlp(Box::new(mlp_fit(train, &cfg)?)))
        }
        ModelKind::External(dir) => Ok(Trained::External(dir.clone())),
    }
}

/// Predict on `ds`; external models read `<dir>/<stem>.csv`.
pub(crate) fn predict(trained: &Trained, ds: &Dataset, stem: &str) -> Result<PredictionSet, Error> {
    match trained {
        Trained::Knn(m) => knn_predict_proba(m, ds),
        Trained::LogReg(m) => logreg_predict_proba(m, ds),
        Trained::Mlp(m) => mlp_predict_proba(m, ds),
        Trained::External(dir) => {
            let class_names = if ds.schema().task.is_classification() {
                Some(ds.class_names())
            } else {
                None
            };
            load_predictions(
                &dir.join(format!("{stem}.csv")),
                &PredictionSchema {
                    sample_ids: ds.sample_ids(),
                    class_names,
                },
            )
        }
    }
}

pub(crate) fn load_primary(config: &RunConfig) -> Result<Dataset, Error> {
    load_table(&config.datasets[0], &config.hints)
}

/// Train/test split: honor the split column when present (train vs
/// id_test), otherwise a seeded stratified holdout.
pub(crate) fn split_train_test(
    config: &RunConfig,
    ds: &Dataset,
) -> Result<(Dataset, Dataset), Error> {
    match ds.splits() {
        Some(tags) => {
            let train_idx: Vec<usize> = (0..ds.n_rows()).filter(|&i| tags[i] == Split::Train).collect();
            let test_idx: Vec<usize> = (0..ds.n_rows()).filter(|&i| tags[i] == Split::IdTest).collect();
            if train_idx.is_empty() || test_idx.is_empty() {
                return Err(Error::InvalidInput(
                    "split column needs non-empty train and id_test parts".into(),
                ));
            }
            Ok((ds.select_rows(&train_idx), ds.select_rows(&test_idx)))
        }
        None => {
            let stratify = ds.schema().task.is_classification();
            split_holdout(ds, config.test_fraction, config.seed, stratify)
        }
    }
}

/// Metrics reported by the feature-shift pipelines, per task kind.
pub(crate) fn shift_metrics(task: Task) -> Vec<Objective> {
    match task {
        Task::Binary => vec![Objective::Accuracy, Objective::RocAuc],
        Task::Multiclass => vec![Objective::Accuracy],
        Task::Regression => vec![Objective::Rmse],
    }
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn record(
    task: TaskKind,
    config: &RunConfig,
    scenario: impl Into<String>,
    model: &ModelKind,
    metric: &str,
    value: f64,
    gap_absolute: Option<f64>,
    gap_relative: Option<f64>,
) -> ResultRecord {
    ResultRecord {
        task: task.name().into(),
        dataset: config.datasets[0].display().to_string(),
        scenario: scenario.into(),
        model: model.name(),
        metric: metric.into(),
        value,
        gap_absolute,
        gap_relative,
        seed: config.seed,
    }
}
