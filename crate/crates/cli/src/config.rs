use std::path::{Path, PathBuf};

use persist_core::scenery_limit::DeltaSpec;
use persist_core::stats::{BruteSystem, PersistenceEvent, MAX_BRUTE_HORIZON, MIN_TRIALS};
use persist_core::{Error as CoreError, ProcessSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    PersistenceGrid,
    MeanMax,
    SupDelta,
    Identities,
    BruteForce,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::PersistenceGrid => "persistence_grid",
            ExperimentKind::MeanMax => "mean_max",
            ExperimentKind::SupDelta => "sup_delta",
            ExperimentKind::Identities => "identities",
            ExperimentKind::BruteForce => "brute_force",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// `max_{1..n} Z <= level`.
    #[default]
    MaxAtMost,
    /// `T_0 > n`.
    Survival,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityMode {
    #[default]
    Exact,
    MonteCarlo,
}

fn default_level() -> f64 {
    -1.0
}

/// One experiment, as read from a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub generator: Option<ProcessSpec>,
    #[serde(default)]
    pub grid: Vec<u64>,
    #[serde(default)]
    pub trials: Option<u64>,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default)]
    pub event: EventKind,
    /// Adds a `log log n` regressor to the exponent fit.
    #[serde(default)]
    pub log_correction: bool,
    #[serde(default)]
    pub identity_mode: IdentityMode,
    #[serde(default)]
    pub sup_delta: Option<DeltaSpec>,
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub plot: bool,
}

fn field(field: &str, message: impl Into<String>) -> CliError {
    CliError::Field {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Attaches a config path to parameter errors raised by the core crate.
fn scoped(prefix: &str, e: CoreError) -> CliError {
    match e {
        CoreError::InvalidParameter { field: f, reason } => field(&format!("{prefix}.{f}"), reason),
        other => field(prefix, other.to_string()),
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn generator(&self) -> Result<&ProcessSpec, CliError> {
        self.generator
            .as_ref()
            .ok_or_else(|| field("generator", "required for this experiment"))
    }

    pub fn persistence_event(&self) -> PersistenceEvent {
        match self.event {
            EventKind::MaxAtMost => PersistenceEvent::MaxAtMost { level: self.level },
            EventKind::Survival => PersistenceEvent::Survival,
        }
    }

    fn mc_trials(&self) -> Result<u64, CliError> {
        let trials = self.trials.ok_or_else(|| field("trials", "required"))?;
        if trials < MIN_TRIALS {
            return Err(field("trials", format!("must be at least {MIN_TRIALS}, got {trials}")));
        }
        Ok(trials)
    }

    pub fn trials(&self) -> u64 {
        self.trials.unwrap_or(0)
    }

    fn check_grid(&self) -> Result<(), CliError> {
        if self.grid.is_empty() {
            return Err(field("grid", "must list at least one horizon"));
        }
        if self.grid[0] == 0 || self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(field("grid", "horizons must be positive and strictly increasing"));
        }
        Ok(())
    }

    /// Checks every field the chosen experiment reads.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.workers == Some(0) {
            return Err(field("workers", "must be at least 1"));
        }
        if !self.level.is_finite() {
            return Err(field("level", "must be finite"));
        }
        if let Some(g) = &self.generator {
            g.validate().map_err(|e| scoped("generator", e))?;
        }
        match self.experiment {
            ExperimentKind::PersistenceGrid => {
                let g = self.generator()?;
                self.check_grid()?;
                self.mc_trials()?;
                if self.event == EventKind::Survival && !g.integer_valued() {
                    return Err(field("event", "survival needs an integer-valued generator"));
                }
            }
            ExperimentKind::MeanMax => {
                let g = self.generator()?;
                self.check_grid()?;
                self.mc_trials()?;
                g.scaling(self.grid[0] as f64).map_err(|e| scoped("generator", e))?;
            }
            ExperimentKind::SupDelta => {
                let spec = self
                    .sup_delta
                    .as_ref()
                    .ok_or_else(|| field("sup_delta", "required for this experiment"))?;
                spec.validate().map_err(|e| scoped("sup_delta", e))?;
                if spec.trials < MIN_TRIALS {
                    return Err(field(
                        "sup_delta.trials",
                        format!("must be at least {MIN_TRIALS}, got {}", spec.trials),
                    ));
                }
            }
            ExperimentKind::Identities => {
                let g = self.generator()?;
                self.check_grid()?;
                if self.grid.len() != 1 {
                    return Err(field("grid", "identities take a single horizon"));
                }
                match self.identity_mode {
                    IdentityMode::Exact => {
                        BruteSystem::from_process(g).map_err(|e| scoped("generator", e))?;
                        self.check_brute_horizon()?;
                    }
                    IdentityMode::MonteCarlo => {
                        self.mc_trials()?;
                    }
                }
            }
            ExperimentKind::BruteForce => {
                let g = self.generator()?;
                self.check_grid()?;
                BruteSystem::from_process(g).map_err(|e| scoped("generator", e))?;
                self.check_brute_horizon()?;
                if self.level.fract() != 0.0 {
                    return Err(field("level", "exact enumeration needs an integer level"));
                }
            }
        }
        Ok(())
    }

    fn check_brute_horizon(&self) -> Result<(), CliError> {
        if let Some(&n) = self.grid.iter().find(|&&n| n as usize > MAX_BRUTE_HORIZON) {
            return Err(field(
                "grid",
                format!("exact enumeration supports n <= {MAX_BRUTE_HORIZON}, got {n}"),
            ));
        }
        Ok(())
    }
}
