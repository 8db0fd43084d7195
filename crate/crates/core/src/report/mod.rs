//! Report tables, the machine-readable results format, and rank
//! aggregation across tasks.
//!
//! Rendering is deterministic: stable ordering everywhere, metrics at 3
//! decimals, absolute gaps in parentheses at 3 decimals with an explicit
//! sign (`0.764(-0.074)`), relative gaps at 4 decimals.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::metrics::mean_ranks;

/// One table cell. Metric values render at 3 decimals, absolute gaps in
/// parentheses at 3 decimals with an explicit sign, relative gaps at 4
/// decimals.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cell {
    Value { value: f64 },
    ValueWithGap { value: f64, gap: f64 },
    RelativeGap { gap: f64 },
    Text { text: String },
}

impl Cell {
    pub fn plain(value: f64) -> Cell {
        Cell::Value { value }
    }

    pub fn with_gap(value: f64, gap: f64) -> Cell {
        Cell::ValueWithGap { value, gap }
    }

    pub fn relative(gap: f64) -> Cell {
        Cell::RelativeGap { gap }
    }

    pub fn text(text: impl Into<String>) -> Cell {
        Cell::Text { text: text.into() }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Cell::Value { value } | Cell::ValueWithGap { value, .. } => Some(*value),
            Cell::RelativeGap { gap } => Some(*gap),
            Cell::Text { .. } => None,
        }
    }

    pub fn render(&self) -> String {
        match self {
            Cell::Value { value } => format!("{value:.3}"),
            Cell::ValueWithGap { value, gap } => format!("{value:.3}({gap:+.3})"),
            Cell::RelativeGap { gap } => format!("{gap:+.4}"),
            Cell::Text { text } => text.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ReportTable {
    pub caption: String,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    /// Row-major cells, one row per row label.
    pub cells: Vec<Vec<Cell>>,
    pub footnotes: Vec<String>,
}

impl ReportTable {
    pub fn render_plain(&self) -> String {
        let rendered: Vec<Vec<String>> = self
            .cells
            .iter()
            .map(|row| row.iter().map(Cell::render).collect())
            .collect();
        let mut widths: Vec<usize> = Vec::with_capacity(self.col_labels.len() + 1);
        let row_label_width = self
            .row_labels
            .iter()
            .map(|l| l.len())
            .max()
            .unwrap_or(0)
            .max(1);
        widths.push(row_label_width);
        for (j, label) in self.col_labels.iter().enumerate() {
            let cell_max = rendered.iter().map(|r| r[j].len()).max().unwrap_or(0);
            widths.push(label.len().max(cell_max));
        }

        let mut out = String::new();
        out.push_str(&self.caption);
        out.push('\n');
        let mut header = format!("{:<w$}", "", w = widths[0]);
        for (j, label) in self.col_labels.iter().enumerate() {
            header.push_str(&format!(" | {:>w$}", label, w = widths[j + 1]));
        }
        out.push_str(&header);
        out.push('\n');
        let rule_len = header.len();
        out.push_str(&"-".repeat(rule_len));
        out.push('\n');
        for (label, row) in self.row_labels.iter().zip(&rendered) {
            out.push_str(&format!("{:<w$}", label, w = widths[0]));
            for (j, cell) in row.iter().enumerate() {
                out.push_str(&format!(" | {:>w$}", cell, w = widths[j + 1]));
            }
            out.push('\n');
        }
        for note in &self.footnotes {
            out.push_str(&format!("  note: {note}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    PlainTable,
    Structured,
}

/// Write the report tables to a file. Plain tables concatenate with blank
/// lines; structured output is a JSON array of tables. An empty table list
/// is an error, never an empty file.
pub fn emit_report(tables: &[ReportTable], format: ReportFormat, path: &Path) -> Result<()> {
    if tables.is_empty() || tables.iter().any(|t| t.cells.is_empty()) {
        return Err(Error::EmptyInput);
    }
    let content = match format {
        ReportFormat::PlainTable => {
            let mut out = String::new();
            for table in tables {
                out.push_str(&table.render_plain());
                out.push('\n');
            }
            out
        }
        ReportFormat::Structured => {
            let mut text = serde_json::to_string_pretty(tables)
                .map_err(|e| Error::InvalidInput(format!("report serialization: {e}")))?;
            text.push('\n');
            text
        }
    };
    std::fs::write(path, content).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One record per (scenario, model, metric) with provenance fields.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ResultRecord {
    pub task: String,
    pub dataset: String,
    /// Scenario cell within the task, e.g. `level=0.4` or `run=setosa`.
    pub scenario: String,
    pub model: String,
    pub metric: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gap_absolute: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gap_relative: Option<f64>,
    pub seed: u64,
}

pub fn write_results(records: &[ResultRecord], path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(records)
        .map_err(|e| Error::InvalidInput(format!("results serialization: {e}")))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_results(path: &Path) -> Result<Vec<ResultRecord>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("bad results file: {e}")))
}

fn metric_higher_is_better(metric: &str) -> bool {
    metric != "rmse"
}

/// Average rank per (task, model) plus an overall row averaging the task
/// rows, the two-level scheme of the cross-task summary table. Requires at
/// least 2 models and a complete (model x cell) matrix within each task.
pub fn rank_report(records: &[ResultRecord]) -> Result<ReportTable> {
    let models: Vec<String> = records
        .iter()
        .map(|r| r.model.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if models.len() < 2 {
        return Err(Error::InvalidInput(
            "rank report needs at least 2 models".into(),
        ));
    }
    let tasks: Vec<String> = records
        .iter()
        .map(|r| r.task.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut rows: Vec<Vec<Cell>> = Vec::with_capacity(tasks.len() + 1);
    let mut task_rank_rows: Vec<Vec<f64>> = Vec::with_capacity(tasks.len());
    for task in &tasks {
        // cell = (dataset, scenario, metric); one value per model
        let mut cells: BTreeMap<(String, String, String), BTreeMap<&str, f64>> = BTreeMap::new();
        for r in records.iter().filter(|r| &r.task == task) {
            cells
                .entry((r.dataset.clone(), r.scenario.clone(), r.metric.clone()))
                .or_default()
                .insert(r.model.as_str(), r.value);
        }
        let n_cells = cells.len();
        let mut matrix = Array2::zeros((models.len(), n_cells));
        let mut directions = Vec::with_capacity(n_cells);
        for (c, ((_, _, metric), by_model)) in cells.iter().enumerate() {
            directions.push(metric_higher_is_better(metric));
            for (m, model) in models.iter().enumerate() {
                match by_model.get(model.as_str()) {
                    Some(v) => matrix[[m, c]] = *v,
                    None => {
                        return Err(Error::InvalidInput(format!(
                            "incomplete matrix: model '{model}' missing cell {metric} in task '{task}'"
                        )))
                    }
                }
            }
        }
        let ranks = mean_ranks(&matrix, &directions)?;
        rows.push(ranks.iter().map(|&r| Cell::plain(r)).collect());
        task_rank_rows.push(ranks);
    }

    let overall: Vec<Cell> = (0..models.len())
        .map(|m| {
            let mean =
                task_rank_rows.iter().map(|row| row[m]).sum::<f64>() / task_rank_rows.len() as f64;
            Cell::plain(mean)
        })
        .collect();
    rows.push(overall);

    let mut row_labels = tasks;
    row_labels.push("Average Rank".into());
    Ok(ReportTable {
        caption: "Average rank across tasks (1 = best)".into(),
        row_labels,
        col_labels: models,
        cells: rows,
        footnotes: vec!["overall row is the mean of the task rows".into()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_rendering_matches_the_shift_table_format() {
        assert_eq!(Cell::with_gap(0.764, -0.074).render(), "0.764(-0.074)");
        assert_eq!(Cell::with_gap(0.974, 0.046).render(), "0.974(+0.046)");
        assert_eq!(Cell::plain(0.838).render(), "0.838");
        assert_eq!(Cell::relative(-0.08830548926).render(), "-0.0883");
    }

    fn record(task: &str, scenario: &str, model: &str, metric: &str, value: f64) -> ResultRecord {
        ResultRecord {
            task: task.into(),
            dataset: "d".into(),
            scenario: scenario.into(),
            model: model.into(),
            metric: metric.into(),
            value,
            gap_absolute: None,
            gap_relative: None,
            seed: 0,
        }
    }

    #[test]
    fn rank_report_reproduces_tie_and_two_level_averaging() {
        // task A, one cell: values 0.9 / 0.8 / 0.8 -> ranks 1, 2.5, 2.5
        // task B, one cell (rmse, lower better): 1.0 / 2.0 / 3.0 -> 1, 2, 3
        let records = vec![
            record("a", "s", "m1", "accuracy", 0.9),
            record("a", "s", "m2", "accuracy", 0.8),
            record("a", "s", "m3", "accuracy", 0.8),
            record("b", "s", "m1", "rmse", 1.0),
            record("b", "s", "m2", "rmse", 2.0),
            record("b", "s", "m3", "rmse", 3.0),
        ];
        let table = rank_report(&records).unwrap();
        assert_eq!(table.col_labels, vec!["m1", "m2", "m3"]);
        assert_eq!(table.row_labels, vec!["a", "b", "Average Rank"]);
        let ranks_a: Vec<f64> = table.cells[0].iter().map(|c| c.value().unwrap()).collect();
        assert_eq!(ranks_a, vec![1.0, 2.5, 2.5]);
        let ranks_b: Vec<f64> = table.cells[1].iter().map(|c| c.value().unwrap()).collect();
        assert_eq!(ranks_b, vec![1.0, 2.0, 3.0]);
        let overall: Vec<f64> = table.cells[2].iter().map(|c| c.value().unwrap()).collect();
        assert_eq!(overall, vec![1.0, 2.25, 2.75]);
    }

    #[test]
    fn dominant_model_ranks_first_everywhere() {
        let records = vec![
            record("a", "s1", "strong", "accuracy", 0.95),
            record("a", "s1", "weak", "accuracy", 0.60),
            record("a", "s2", "strong", "f1", 0.90),
            record("a", "s2", "weak", "f1", 0.50),
        ];
        let table = rank_report(&records).unwrap();
        assert_eq!(table.cells[1][0].value(), Some(1.0)); // overall row, strong
        assert_eq!(table.cells[1][1].value(), Some(2.0));
    }

    #[test]
    fn incomplete_matrix_is_an_error() {
        let records = vec![
            record("a", "s1", "m1", "accuracy", 0.9),
            record("a", "s1", "m2", "accuracy", 0.8),
            record("a", "s2", "m1", "f1", 0.7),
        ];
        assert!(rank_report(&records).is_err());
        assert!(rank_report(&records[..1]).is_err());
    }

    #[test]
    fn emit_rejects_empty_results() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.txt");
        assert!(emit_report(&[], ReportFormat::PlainTable, &path).is_err());
        assert!(!path.exists());
    }

    #[test]
    fn rendering_and_files_are_deterministic() {
        let table = ReportTable {
            caption: "demo".into(),
            row_labels: vec!["r1".into(), "r2".into()],
            col_labels: vec!["accuracy".into(), "f1".into()],
            cells: vec![
                vec![Cell::plain(0.5), Cell::with_gap(0.4, -0.1)],
                vec![Cell::plain(0.25), Cell::with_gap(0.2, -0.05)],
            ],
            footnotes: vec!["seed=7".into()],
        };
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.txt");
        let b = dir.path().join("b.txt");
        emit_report(std::slice::from_ref(&table), ReportFormat::PlainTable, &a).unwrap();
        emit_report(std::slice::from_ref(&table), ReportFormat::PlainTable, &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        let s = dir.path().join("s.json");
        emit_report(&[table], ReportFormat::Structured, &s).unwrap();
        assert!(std::fs::read_to_string(&s).unwrap().contains("\"caption\""));
    }

    #[test]
    fn results_round_trip() {
        let records = vec![record("a", "s", "m", "accuracy", 0.75)];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.json");
        write_results(&records, &path).unwrap();
        assert_eq!(load_results(&path).unwrap(), records);
    }
}
