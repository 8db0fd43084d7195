//! Changing-data-distributions pipeline: cap the three splits, score the
//! model on ID and OOD tests, and quantify the shift (OTDD, Frechet
//! distance on activations, label shift, loss-gap decomposition).

use std::collections::BTreeMap;

use openenv_core::data::{load_table, Dataset, Split, Task};
use openenv_core::error::Error;
use openenv_core::metrics::{evaluate, performance_gap, GapMode, Objective};
use openenv_core::models::{
    load_embeddings, mlp_activations, mlp_fit, per_sample_loss, LossKind, MlpConfig,
};
use openenv_core::report::{Cell, ReportTable};
use openenv_core::scenario::{cdd_prepare, export_scenario, CddScenario, Scenario};
use openenv_core::shift::{shift_profile, DisdeConfig, OtddConfig, ShiftProfileInputs};

use crate::config::RunConfig;
use crate::pipeline::{fit_model, predict, record, TaskOutput, Trained};
use crate::{CliError, TaskKind};

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

fn three_parts(config: &RunConfig) -> Result<(Dataset, Dataset, Dataset), CliError> {
    if config.datasets.len() == 3 {
        let mut hints = config.hints.clone();
        hints.split_column = None;
        let mut parts = Vec::with_capacity(3);
        for path in &config.datasets {
            parts.push(load_table(path, &hints)?);
        }
        let mut it = parts.into_iter();
        return Ok((
            it.next().expect("three files"),
            it.next().expect("three files"),
            it.next().expect("three files"),
        ));
    }
    let ds = load_table(&config.datasets[0], &config.hints)?;
    let tags = ds.splits().ok_or_else(|| {
        CliError::Config("cdd needs a split_column hint or three dataset files".into())
    })?;
    let part = |tag: Split| -> Vec<usize> {
        (0..ds.n_rows()).filter(|&i| tags[i] == tag).collect()
    };
    let (train, id, ood) = (part(Split::Train), part(Split::IdTest), part(Split::OodTest));
    if train.is_empty() || id.is_empty() || ood.is_empty() {
        return Err(CliError::Data(Error::InvalidInput(
            "cdd needs non-empty train, id_test, and ood_test splits".into(),
        )));
    }
    Ok((ds.select_rows(&train), ds.select_rows(&id), ds.select_rows(&ood)))
}

/// Classifier activations feeding the Frechet distance: the evaluated
/// model's own hidden layer when it is the built-in MLP, embedding files
/// for external models when present, otherwise a source-trained MLP.
fn embeddings_for(
    trained: &Trained,
    scenario: &CddScenario,
    config: &RunConfig,
) -> Result<(ndarray::Array2<f64>, ndarray::Array2<f64>), Error> {
    if let Some(mlp) = trained.mlp() {
        return Ok((
            mlp_activations(mlp, &scenario.train)?,
            mlp_activations(mlp, &scenario.ood_test)?,
        ));
    }
    if let Some(dir) = trained.external_dir() {
        let train_path = dir.join("embeddings_train.csv");
        let ood_path = dir.join("embeddings_ood.csv");
        if train_path.exists() && ood_path.exists() {
            let (train_ids, train_emb) = load_embeddings(&train_path)?;
            let (ood_ids, ood_emb) = load_embeddings(&ood_path)?;
            if train_ids != scenario.train.sample_ids() || ood_ids != scenario.ood_test.sample_ids()
            {
                return Err(Error::IdMismatch(
                    "embedding files do not match the capped scenario ids".into(),
                ));
            }
            return Ok((train_emb, ood_emb));
        }
    }
    let cfg = MlpConfig {
        seed: config.seed,
        ..Default::default()
    };
    let mlp = mlp_fit(&scenario.train, &cfg)?;
    Ok((
        mlp_activations(&mlp, &scenario.train)?,
        mlp_activations(&mlp, &scenario.ood_test)?,
    ))
}

pub(crate) fn run(config: &RunConfig) -> Result<TaskOutput, CliError> {
    let (train, id_test, ood_test) = three_parts(config)?;
    if !train.schema().task.is_classification() {
        return Err(CliError::Data(Error::InvalidInput(
            "cdd evaluation is defined for classification datasets".into(),
        )));
    }
    let scenario = cdd_prepare(&train, &id_test, &ood_test, config.cap, config.seed)?;
    if config.export_dataset {
        export_scenario(&Scenario::Cdd(&scenario), &config.out.join("export").join("cdd"))?;
    }

    let objectives = Objective::CLASSIFICATION_DEFAULTS;
    let binary = train.schema().task == Task::Binary;

    let mut tables = Vec::new();
    let mut records = Vec::new();
    let mut training = BTreeMap::new();
    for model_kind in &config.models {
        let mut counter = 0usize;
        let trained = fit_model(model_kind, &scenario.train, config, &mut counter)?;
        let id_preds = predict(&trained, &scenario.id_test, "cdd_id_test")?;
        let ood_preds = predict(&trained, &scenario.ood_test, "cdd_ood_test")?;

        let mut id_row = Vec::new();
        let mut ood_row = Vec::new();
        for &objective in &objectives {
            let id_value = evaluate(objective, &id_preds, &scenario.id_test)?;
            let ood_value = evaluate(objective, &ood_preds, &scenario.ood_test)?;
            let gap = performance_gap(id_value, ood_value, GapMode::Absolute)?;
            id_row.push(Cell::plain(id_value));
            ood_row.push(Cell::with_gap(ood_value, gap));
            records.push(record(
                TaskKind::Cdd, config, "id_test", model_kind, objective.name(),
                id_value, None, None,
            ));
            records.push(record(
                TaskKind::Cdd, config, "ood_test", model_kind, objective.name(),
                ood_value, Some(gap),
                performance_gap(id_value, ood_value, GapMode::Relative).ok(),
            ));
        }
        let mut footnotes = vec![scenario.provenance.clone()];
        if !binary {
            footnotes.push("shift profile skipped: needs a binary task".into());
        }
        tables.push(ReportTable {
            caption: format!(
                "changing data distributions: ID vs OOD metrics, model={}",
                model_kind.name()
            ),
            row_labels: vec!["id_test".into(), "ood_test".into()],
            col_labels: objectives.iter().map(|o| o.name().to_string()).collect(),
            cells: vec![id_row, ood_row],
            footnotes,
        });

        if binary {
            let (train_emb, ood_emb) = embeddings_for(&trained, &scenario, config)?;
            let id_losses = per_sample_loss(&id_preds, &scenario.id_test, LossKind::ZeroOne)?;
            let ood_losses = per_sample_loss(&ood_preds, &scenario.ood_test, LossKind::ZeroOne)?;
            let otdd_cfg = OtddConfig {
                seed: config.seed,
                ..Default::default()
            };
            let disde_cfg = DisdeConfig::default();
            let profile = shift_profile(
                &ShiftProfileInputs {
                    scenario: &scenario,
                    train_embeddings: train_emb.view(),
                    ood_embeddings: ood_emb.view(),
                    id_losses: &id_losses,
                    ood_losses: &ood_losses,
                },
                &otdd_cfg,
                &disde_cfg,
            )?;

            let profile_file = config
                .out
                .join(format!("shift_profile_{}.json", sanitize(&model_kind.name())));
            let mut text = serde_json::to_string_pretty(&profile)
                .map_err(|e| CliError::Config(format!("profile serialization: {e}")))?;
            text.push('\n');
            std::fs::write(&profile_file, text).map_err(|source| {
                CliError::Data(Error::Io { path: profile_file.clone(), source })
            })?;

            let entries: [(&str, f64); 8] = [
                ("delta_x", profile.delta_x),
                ("delta_y_given_x", profile.delta_y_given_x),
                ("delta_y", profile.delta_y),
                ("disde_term_1", profile.disde.term_1),
                ("disde_term_2", profile.disde.term_2),
                ("disde_term_3", profile.disde.term_3),
                ("disde_total_gap", profile.disde.total_gap),
                ("overlap_fraction", profile.disde.overlap_fraction),
            ];
            for (name, value) in entries {
                records.push(record(
                    TaskKind::Cdd, config, "shift_profile", model_kind, name, value, None, None,
                ));
            }
            tables.push(ReportTable {
                caption: format!(
                    "shift profile: dominant pattern {}, model={}",
                    profile.dominant_pattern,
                    model_kind.name()
                ),
                row_labels: entries.iter().map(|(n, _)| n.to_string()).collect(),
                col_labels: vec!["value".into()],
                cells: entries.iter().map(|(_, v)| vec![Cell::plain(*v)]).collect(),
                footnotes: vec![profile.provenance.clone()],
            });
        }
        training.insert(format!("cdd/{}", model_kind.name()), counter);
    }

    Ok(TaskOutput {
        tables,
        records,
        training_invocations: training,
    })
}
