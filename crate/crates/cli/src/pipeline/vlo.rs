//! Varied-learning-objectives pipeline: score every model on the i.i.d.
//! portion under each objective and rank models when several are present.

use std::collections::BTreeMap;

use ndarray::Array2;

use openenv_core::metrics::{evaluate, mean_ranks};
use openenv_core::report::{Cell, ReportTable};

use crate::config::RunConfig;
use crate::pipeline::{fit_model, load_primary, predict, record, split_train_test, TaskOutput};
use crate::{CliError, TaskKind};

pub(crate) fn run(config: &RunConfig) -> Result<TaskOutput, CliError> {
    let ds = load_primary(config)?;
    if !ds.schema().task.is_classification() {
        return Err(CliError::Config(
            "vlo compares classification objectives; the dataset is a regression task".into(),
        ));
    }
    if let Some(bad) = config
        .objectives
        .iter()
        .find(|o| !o.applies_to(ds.schema().task))
    {
        return Err(CliError::Config(format!(
            "objective {} does not apply to this task",
            bad.name()
        )));
    }
    let (train, id_test) = split_train_test(config, &ds)?;

    let mut training = BTreeMap::new();
    let mut records = Vec::new();
    let mut values = Array2::zeros((config.models.len(), config.objectives.len()));
    for (mi, model_kind) in config.models.iter().enumerate() {
        let mut counter = 0usize;
        let trained = fit_model(model_kind, &train, config, &mut counter)?;
        let preds = predict(&trained, &id_test, "vlo_id_test")?;
        for (oi, &objective) in config.objectives.iter().enumerate() {
            let value = evaluate(objective, &preds, &id_test)?;
            values[[mi, oi]] = value;
            records.push(record(
                TaskKind::Vlo, config, "iid", model_kind, objective.name(), value, None, None,
            ));
        }
        training.insert(format!("vlo/{}", model_kind.name()), counter);
    }

    let mut col_labels: Vec<String> = config
        .objectives
        .iter()
        .map(|o| o.name().to_string())
        .collect();
    let ranks = if config.models.len() >= 2 {
        let directions: Vec<bool> = config
            .objectives
            .iter()
            .map(|o| o.higher_is_better())
            .collect();
        col_labels.push("mean rank".into());
        Some(mean_ranks(&values, &directions)?)
    } else {
        None
    };

    let mut rows = Vec::new();
    for (mi, _) in config.models.iter().enumerate() {
        let mut row: Vec<Cell> = (0..config.objectives.len())
            .map(|oi| Cell::plain(values[[mi, oi]]))
            .collect();
        if let Some(r) = &ranks {
            row.push(Cell::plain(r[mi]));
        }
        rows.push(row);
    }
    let table = ReportTable {
        caption: "varied learning objectives on the i.i.d. test portion".into(),
        row_labels: config.models.iter().map(|m| m.name()).collect(),
        col_labels,
        cells: rows,
        footnotes: vec![format!("seed={}", config.seed)],
    };

    Ok(TaskOutput {
        tables: vec![table],
        records,
        training_invocations: training,
    })
}
