//! Run configuration files.
//!
//! One TOML file describes one run. Every block rejects unknown keys, and
//! the blocks a command needs are checked before any computation starts.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use univinf_core::inference::{Criterion, CovariateKind, Functional, GridSpec, SearchBox, SolverRoute, DEFAULT_SEED};
use univinf_core::models::ModelConfig;
use univinf_core::simulation::{McDesign, SelectionPolicy};

use crate::error::{CliError, CliResult};

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Test,
    Confset,
    Simulate,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Test => "test",
            Command::Confset => "confset",
            Command::Simulate => "simulate",
        })
    }
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_outcome_column() -> String {
    "y".into()
}

fn default_tolerance() -> f64 {
    univinf_core::inference::DEFAULT_TOLERANCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataBlock {
    pub path: PathBuf,
    #[serde(default = "default_outcome_column")]
    pub outcome_column: String,
    /// Covariate columns in model order; all other columns when absent.
    #[serde(default)]
    pub covariate_columns: Option<Vec<String>>,
    #[serde(default)]
    pub covariate_kind: CovariateKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesisBlock {
    pub null: GridSpec,
    pub search_box: SearchBox,
}

/// Tested values of the functional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiGrid {
    Values { values: Vec<f64> },
    Range { lower: f64, upper: f64, step: f64 },
}

impl PhiGrid {
    pub fn values(&self) -> CliResult<Vec<f64>> {
        let v = match self {
            PhiGrid::Values { values } => values.clone(),
            PhiGrid::Range { lower, upper, step } => univinf_core::inference::lattice(&[*lower], &[*upper], &[*step])
                .map_err(|e| CliError::Config(format!("confset.phi: {e}")))?
                .into_iter()
                .map(|p| p[0])
                .collect(),
        };
        if v.is_empty() {
            return Err(CliError::Config("confset.phi: empty grid".into()));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfsetBlock {
    pub functional: Functional,
    pub phi: PhiGrid,
    pub nuisance: GridSpec,
    pub search_box: SearchBox,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

/// Overrides applied to the preset simulation designs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationBlock {
    pub sample_sizes: Option<Vec<usize>>,
    pub criteria: Option<Vec<Criterion>>,
    pub h_grid: Option<Vec<f64>>,
    pub replications: Option<usize>,
    pub selection: Option<SelectionPolicy>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// The command this file is meant for; checked against the invoked one.
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub criterion: Criterion,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub route: SolverRoute,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub model: Option<ModelConfig>,
    #[serde(default)]
    pub data: Option<DataBlock>,
    #[serde(default)]
    pub hypothesis: Option<HypothesisBlock>,
    #[serde(default)]
    pub confset: Option<ConfsetBlock>,
    #[serde(default)]
    pub simulation: Option<SimulationBlock>,
    /// Full design for `simulate --design custom`.
    #[serde(default)]
    pub design: Option<McDesign>,
}

impl RunConfig {
    /// Parses TOML text; relative data paths are resolved against `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> CliResult<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(d) = cfg.data.as_mut() {
            if d.path.is_relative() {
                d.path = base_dir.join(&d.path);
            }
        }
        if let Some(o) = cfg.output.as_mut() {
            if o.is_relative() {
                *o = base_dir.join(&*o);
            }
        }
        if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
            return Err(CliError::Config(format!("alpha must be in (0, 1), got {}", cfg.alpha)));
        }
        Ok(cfg)
    }

    /// Checks that the blocks `command` needs are present and well formed.
    pub fn validate_for(&self, command: Command, design: Option<DesignChoice>) -> CliResult<()> {
        if let Some(c) = self.command {
            if c != command {
                return Err(CliError::Config(format!("config is for `{c}` but `{command}` was invoked")));
            }
        }
        let mut missing = Vec::new();
        match command {
            Command::Test => {
                if self.model.is_none() {
                    missing.push("model");
                }
                if self.data.is_none() {
                    missing.push("data");
                }
                if self.hypothesis.is_none() {
                    missing.push("hypothesis");
                }
            }
            Command::Confset => {
                if self.model.is_none() {
                    missing.push("model");
                }
                if self.data.is_none() {
                    missing.push("data");
                }
                if self.confset.is_none() {
                    missing.push("confset");
                }
            }
            Command::Simulate => {
                if design == Some(DesignChoice::Custom) && self.design.is_none() {
                    missing.push("design");
                }
            }
        }
        if !missing.is_empty() {
            return Err(CliError::Config(format!(
                "missing required block(s) for `{command}`: {}",
                missing.join(", ")
            )));
        }
        if let Some(h) = &self.hypothesis {
            let grid = h.null.points().map_err(|e| CliError::Config(format!("hypothesis.null: {e}")))?;
            SearchBox::new(h.search_box.lower.clone(), h.search_box.upper.clone())
                .map_err(|e| CliError::Config(format!("hypothesis.search_box: {e}")))?;
            if grid.iter().any(|t| t.len() != h.search_box.dim()) {
                return Err(CliError::Config("hypothesis: null grid and search box differ in dimension".into()));
            }
        }
        if command == Command::Confset {
            let c = self.confset.as_ref().expect("checked above");
            c.phi.values()?;
            c.nuisance.points().map_err(|e| CliError::Config(format!("confset.nuisance: {e}")))?;
            SearchBox::new(c.search_box.lower.clone(), c.search_box.upper.clone())
                .map_err(|e| CliError::Config(format!("confset.search_box: {e}")))?;
            if !(c.tolerance >= 0.0) {
                return Err(CliError::Config("confset.tolerance must be nonnegative".into()));
            }
        }
        if let Some(s) = &self.simulation {
            if s.replications == Some(0) {
                return Err(CliError::Config("simulation.replications must be at least 1".into()));
            }
        }
        Ok(())
    }
}

/// Design presets of the `simulate` command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DesignChoice {
    Table1,
    Table2,
    Custom,
}

/// Reads and parses a config file.
pub fn parse_config(path: &Path) -> CliResult<(RunConfig, String)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    Ok((RunConfig::from_toml(&text, base)?, text))
}
