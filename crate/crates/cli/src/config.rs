//! TOML experiment configuration: the single input document that drives
//! training, evaluation, attack sweeps, and analysis emission.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use dionet_core::constraints::{DiophantinePolynomial, EncodingMap, ParamSelector};
use dionet_core::training::{ConstraintSpec, LossConfig, Mode, TaskKind, TrainingConfig};

use crate::error::{CliError, Result};

/// Which experiment to run. The three worked examples carry fixed data and
/// initial parameters; the synthetic tasks generate seeded datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Example1,
    Example2,
    Example3,
    SyntheticRegression,
    SyntheticClassification,
}

impl Task {
    /// Loss family the task trains with.
    pub fn kind(self) -> TaskKind {
        match self {
            Task::SyntheticClassification => TaskKind::CrossEntropy,
            _ => TaskKind::Mse,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    Normal,
    Diophantine,
}

impl From<ModeName> for Mode {
    fn from(m: ModeName) -> Mode {
        match m {
            ModeName::Normal => Mode::Normal,
            ModeName::Diophantine => Mode::Diophantine,
        }
    }
}

fn default_batch() -> usize {
    0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingTable {
    pub eta: f64,
    pub epochs: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default)]
    pub lll_init: bool,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct LossTable {
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub epsilon: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintTable {
    /// Constraint polynomial in the `coef * x1^e1 * ...` grammar.
    pub polynomial: String,
    #[serde(default)]
    pub scale: Option<f64>,
    /// Flattened parameter indices the polynomial applies to; all when
    /// omitted.
    #[serde(default)]
    pub indices: Option<Vec<usize>>,
}

fn default_epsilons() -> Vec<f64> {
    vec![0.0, 0.05, 0.1, 0.2]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisTable {
    pub sigma: f64,
    pub samples: usize,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    pub mode: ModeName,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub training: TrainingTable,
    #[serde(default)]
    pub loss: LossTable,
    #[serde(default)]
    pub constraint: Option<ConstraintTable>,
    #[serde(default)]
    pub analysis: Option<AnalysisTable>,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse_str(&text)
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    /// Core training configuration (the mode/seed fields may have been
    /// overridden from the command line before this call).
    pub fn training_config(&self) -> TrainingConfig {
        TrainingConfig {
            eta: self.training.eta,
            epochs: self.training.epochs,
            batch_size: self.training.batch_size,
            mode: self.mode.into(),
            seed: self.seed,
            lll_init: self.training.lll_init,
        }
    }

    /// Core loss configuration, with the constraint polynomial parsed and
    /// validated against the grammar.
    pub fn loss_config(&self) -> Result<LossConfig> {
        let constraint = match &self.constraint {
            Some(table) => {
                let poly = DiophantinePolynomial::parse(&table.polynomial)
                    .map_err(|e| CliError::Config(format!("constraint polynomial: {e}")))?;
                let map = match table.scale {
                    Some(s) => EncodingMap::new(s)
                        .map_err(|e| CliError::Config(format!("constraint scale: {e}")))?,
                    None => EncodingMap::identity(),
                };
                let selector = match &table.indices {
                    Some(ix) => ParamSelector::Indices(ix.clone()),
                    None => ParamSelector::All,
                };
                Some(ConstraintSpec { poly, map, selector })
            }
            None => None,
        };
        Ok(LossConfig {
            task: self.task.kind(),
            lambda: self.loss.lambda,
            gamma: self.loss.gamma,
            epsilon: self.loss.epsilon,
            constraint,
        })
    }
}
