//! Emerging-new-classes pipeline: leave-one-class-out generation, one
//! model fit per run, novelty scoring, per-run rows plus an averages row.

use std::collections::BTreeMap;

use openenv_core::metrics::{enc_evaluate, NoveltyConfig, PredictionSet};
use openenv_core::report::{Cell, ReportTable};
use openenv_core::scenario::{enc_generate, export_scenario, Scenario};

use crate::config::RunConfig;
use crate::pipeline::{fit_model, load_primary, predict, record, TaskOutput};
use crate::{CliError, TaskKind};

pub(crate) fn run(config: &RunConfig) -> Result<TaskOutput, CliError> {
    let ds = load_primary(config)?;
    let runs = enc_generate(&ds, config.seed)?;

    if config.export_dataset {
        for (i, run) in runs.iter().enumerate() {
            let dir = config.out.join("export").join(format!("enc_run_{i}"));
            export_scenario(&Scenario::Enc(run), &dir)?;
        }
    }

    let intervals = NoveltyConfig::reported_intervals();
    let interval_labels: Vec<String> = intervals
        .iter()
        .map(|c| format!("u[{:.2},{:.2}]", c.theta_min, c.theta_max))
        .collect();

    let mut tables = Vec::new();
    let mut records = Vec::new();
    let mut training = BTreeMap::new();
    for model_kind in &config.models {
        let mut counter = 0usize;
        let mut predictions: Vec<PredictionSet> = Vec::with_capacity(runs.len());
        for (i, run) in runs.iter().enumerate() {
            let trained = fit_model(model_kind, &run.train, config, &mut counter)?;
            predictions.push(predict(&trained, &run.detection_test, &format!("enc_run_{i}"))?);
        }
        let pairs: Vec<_> = runs.iter().zip(predictions.iter()).collect();
        let report = enc_evaluate(&pairs, &intervals)?;

        let mut row_labels = Vec::new();
        let mut rows = Vec::new();
        for metrics in report.runs.iter().chain(std::iter::once(&report.mean)) {
            row_labels.push(format!("novel={}", metrics.held_out_class));
            let mut row = vec![Cell::plain(metrics.roc_auc), Cell::plain(metrics.aupr)];
            row.extend(metrics.uncertainty.iter().map(|&u| Cell::plain(u)));
            rows.push(row);

            let scenario = if metrics.held_out_class == "mean" {
                "mean".to_string()
            } else {
                format!("run={}", metrics.held_out_class)
            };
            records.push(record(
                TaskKind::Enc, config, scenario.clone(), model_kind, "roc_auc",
                metrics.roc_auc, None, None,
            ));
            records.push(record(
                TaskKind::Enc, config, scenario.clone(), model_kind, "aupr",
                metrics.aupr, None, None,
            ));
            for (label, &u) in interval_labels.iter().zip(&metrics.uncertainty) {
                records.push(record(
                    TaskKind::Enc, config, scenario.clone(), model_kind,
                    &format!("uncertainty_{label}"), u, None, None,
                ));
            }
        }

        let mut col_labels = vec!["roc_auc".to_string(), "aupr".to_string()];
        col_labels.extend(interval_labels.iter().cloned());
        tables.push(ReportTable {
            caption: format!(
                "emerging new classes: {} runs, model={}, novelty score = 1 - max probability",
                runs.len(),
                model_kind.name()
            ),
            row_labels,
            col_labels,
            cells: rows,
            footnotes: vec![format!("seed={}", config.seed)],
        });
        training.insert(format!("enc/{}", model_kind.name()), counter);
    }

    Ok(TaskOutput {
        tables,
        records,
        training_invocations: training,
    })
}
