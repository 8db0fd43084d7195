//! Command-line surface and validated run configuration.

use std::path::PathBuf;

use clap::Parser;

use openenv_core::data::SchemaHints;
use openenv_core::metrics::Objective;

use crate::CliError;

/// Open-environment evaluation for tabular models.
#[derive(Debug, Parser)]
#[command(name = "openenv", version, about)]
pub struct Cli {
    /// Dataset file; the cdd task also accepts train,id_test,ood_test as
    /// three comma-separated files
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub dataset: Vec<PathBuf>,

    /// Built-in model (knn, logreg, mlp) or `external:<prediction-dir>`;
    /// a comma-separated list evaluates and ranks several models
    #[arg(long, value_delimiter = ',', default_value = "knn")]
    pub model: Vec<String>,

    /// Task to run: enc, df, inf, cdd, or vlo; a comma-separated list runs
    /// several tasks and appends a cross-task rank table
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub task: Vec<String>,

    /// Export the generated scenario datasets as CSV files
    #[arg(long, default_value_t = false)]
    pub export_dataset: bool,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Decremental-shift levels for the df task (fractions in `[0,1]`);
    /// level 0 is always evaluated as the reference
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<f64>>,

    /// Stratified subsampling cap for the cdd task
    #[arg(long, default_value_t = 50_000)]
    pub cap: usize,

    /// Synthetic feature columns appended by the inf task
    #[arg(long, default_value_t = 5)]
    pub n_new: usize,

    /// Holdout fraction when the dataset has no split column
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,

    /// Objectives for the vlo task (accuracy, balanced_accuracy, f1,
    /// roc_auc, aupr)
    #[arg(long, value_delimiter = ',')]
    pub objectives: Option<Vec<String>>,

    /// Output directory for reports, results, manifests, and exports
    #[arg(long, default_value = "out")]
    pub out: PathBuf,

    /// Schema hints file (TOML; keys: target, task, id_column,
    /// split_column, categorical, delimiter)
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Neighborhood size for the built-in knn model
    #[arg(long, default_value_t = 5)]
    pub knn_k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Enc,
    Df,
    Inf,
    Cdd,
    Vlo,
}

impl TaskKind {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "enc" => Ok(TaskKind::Enc),
            "df" => Ok(TaskKind::Df),
            "inf" => Ok(TaskKind::Inf),
            "cdd" => Ok(TaskKind::Cdd),
            "vlo" => Ok(TaskKind::Vlo),
            other => Err(CliError::Config(format!(
                "unknown task '{other}' (expected enc, df, inf, cdd, or vlo)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Enc => "enc",
            TaskKind::Df => "df",
            TaskKind::Inf => "inf",
            TaskKind::Cdd => "cdd",
            TaskKind::Vlo => "vlo",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Knn,
    LogReg,
    Mlp,
    External(PathBuf),
}

impl ModelKind {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "knn" => Ok(ModelKind::Knn),
            "logreg" => Ok(ModelKind::LogReg),
            "mlp" => Ok(ModelKind::Mlp),
            other => match other.strip_prefix("external:") {
                Some(dir) if !dir.is_empty() => Ok(ModelKind::External(PathBuf::from(dir))),
                _ => Err(CliError::Config(format!(
                    "unknown model '{other}' (expected knn, logreg, mlp, or external:<dir>)"
                ))),
            },
        }
    }

    pub fn name(&self) -> String {
        match self {
            ModelKind::Knn => "knn".into(),
            ModelKind::LogReg => "logreg".into(),
            ModelKind::Mlp => "mlp".into(),
            ModelKind::External(dir) => format!("external:{}", dir.display()),
        }
    }
}

/// Fully validated configuration with every default resolved.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub datasets: Vec<PathBuf>,
    pub models: Vec<ModelKind>,
    pub tasks: Vec<TaskKind>,
    pub export_dataset: bool,
    pub seed: u64,
    pub levels: Vec<f64>,
    pub cap: usize,
    pub n_new: usize,
    pub test_fraction: f64,
    pub objectives: Vec<Objective>,
    pub out: PathBuf,
    pub hints: SchemaHints,
    pub knn_k: usize,
}

pub const DEFAULT_LEVELS: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let tasks = cli
            .task
            .iter()
            .map(|t| TaskKind::parse(t))
            .collect::<Result<Vec<_>, _>>()?;
        let models = cli
            .model
            .iter()
            .map(|m| ModelKind::parse(m))
            .collect::<Result<Vec<_>, _>>()?;
        if models.is_empty() {
            return Err(CliError::Config("at least one model required".into()));
        }

        let mut levels = cli.levels.unwrap_or_else(|| DEFAULT_LEVELS.to_vec());
        if levels.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(CliError::Config("levels must lie in [0, 1]".into()));
        }
        if !levels.contains(&0.0) {
            levels.push(0.0);
        }
        levels.sort_by(|a, b| a.partial_cmp(b).expect("finite levels"));
        levels.dedup();

        if !(cli.test_fraction > 0.0 && cli.test_fraction < 1.0) {
            return Err(CliError::Config(format!(
                "test fraction {} outside (0,1)",
                cli.test_fraction
            )));
        }
        if tasks.contains(&TaskKind::Cdd) && !(cli.dataset.len() == 1 || cli.dataset.len() == 3) {
            return Err(CliError::Config(
                "cdd needs one dataset with a split column or exactly three files".into(),
            ));
        }
        if !tasks.contains(&TaskKind::Cdd) && cli.dataset.len() != 1 {
            return Err(CliError::Config(
                "this task takes exactly one dataset file".into(),
            ));
        }
        if cli.n_new == 0 {
            return Err(CliError::Config("n-new must be at least 1".into()));
        }

        let objectives = match cli.objectives {
            None => Objective::CLASSIFICATION_DEFAULTS.to_vec(),
            Some(names) => {
                let parsed = names
                    .iter()
                    .map(|n| n.parse::<Objective>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| CliError::Config(e.to_string()))?;
                if parsed.is_empty() {
                    return Err(CliError::Config("at least one objective required".into()));
                }
                parsed
            }
        };

        let hints = match &cli.config {
            Some(path) => SchemaHints::from_file(path).map_err(|e| CliError::Config(e.to_string()))?,
            None => SchemaHints::default(),
        };

        Ok(RunConfig {
            datasets: cli.dataset,
            models,
            tasks,
            export_dataset: cli.export_dataset,
            seed: cli.seed,
            levels,
            cap: cli.cap,
            n_new: cli.n_new,
            test_fraction: cli.test_fraction,
            objectives,
            out: cli.out,
            hints,
            knn_k: cli.knn_k,
        })
    }
}
