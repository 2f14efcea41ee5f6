//! Configuration-driven experiment runner for `persist-core`.

mod config;
pub mod output;
pub mod reproduce;

use std::path::PathBuf;

use persist_core::parallel::with_workers;
use persist_core::scenery_limit::estimate_sup_delta;
use persist_core::stats::{
    brute_force_persistence, estimate_mean_max_grid, estimate_persistence_grid, fit_exponent,
    verify_identities_exact, verify_identities_mc, BruteSystem, ExponentFit, IdentityReport,
    MIN_FIT_POINTS,
};
use persist_core::{ProcessSpec, Seed};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

pub use config::{EventKind, ExperimentConfig, ExperimentKind, IdentityMode};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("config error in field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] persist_core::Error),
}

impl CliError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        1
    }
}

/// Machine-readable record of one run.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub experiment: &'static str,
    pub generator: Option<ProcessSpec>,
    pub theta_hat: Option<f64>,
    pub theta_stderr: Option<f64>,
    pub intercept: Option<f64>,
    pub log_correction: Option<f64>,
    pub grid: Vec<u64>,
    pub seed: u64,
    pub toolkit_version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<ExponentFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identities: Option<IdentitySummary>,
    pub results: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentitySummary {
    pub all_pass: bool,
    pub report: IdentityReport,
}

/// Everything a run produces, before it touches the file system.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub summary: Summary,
    /// `(file name, contents)`.
    pub files: Vec<(String, String)>,
}

impl Artifacts {
    pub fn exit_code(&self) -> i32 {
        match &self.summary.identities {
            Some(ids) if !ids.all_pass => 2,
            _ => 0,
        }
    }

    pub fn summary_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.summary).expect("summary serializes");
        text.push('\n');
        text
    }
}

fn summary(config: &ExperimentConfig, results: Value) -> Summary {
    Summary {
        experiment: config.experiment.name(),
        generator: config.generator,
        theta_hat: None,
        theta_stderr: None,
        intercept: None,
        log_correction: None,
        grid: config.grid.clone(),
        seed: config.seed,
        toolkit_version: TOOLKIT_VERSION,
        fit: None,
        identities: None,
        results,
    }
}

/// Runs `config` in memory on its configured worker pool.
pub fn execute(config: &ExperimentConfig) -> Result<Artifacts, CliError> {
    config.validate()?;
    with_workers(config.workers, || execute_here(config))
}

fn execute_here(config: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let seed = Seed(config.seed);
    let mut files = Vec::new();
    let summary = match config.experiment {
        ExperimentKind::PersistenceGrid => {
            let spec = config.generator()?;
            let grid = estimate_persistence_grid(
                spec,
                &config.grid,
                config.persistence_event(),
                config.trials(),
                seed,
            )?;
            files.push(("results.csv".into(), output::persistence_csv(&grid)));
            let fit = if grid.len() >= MIN_FIT_POINTS {
                Some(fit_exponent(&grid, config.log_correction)?)
            } else {
                None
            };
            if config.plot {
                files.push((
                    "plot.svg".into(),
                    output::persistence_svg(&spec.label(), &grid, fit.as_ref()),
                ));
            }
            let mut s = summary(config, serde_json::to_value(&grid).expect("serializable"));
            if let Some(f) = fit {
                s.theta_hat = Some(f.theta_hat);
                s.theta_stderr = Some(f.stderr);
                s.intercept = Some(f.intercept);
                s.log_correction = f.log_correction;
                s.fit = Some(f);
            }
            s
        }
        ExperimentKind::MeanMax => {
            let grid =
                estimate_mean_max_grid(config.generator()?, &config.grid, config.trials(), seed)?;
            files.push((
                "results.csv".into(),
                output::csv(
                    "n,a_n,trials,b_hat,stderr",
                    grid.iter()
                        .map(|e| format!("{},{},{},{},{}", e.n, e.a_n, e.trials, e.b_hat, e.stderr)),
                ),
            ));
            summary(config, serde_json::to_value(&grid).expect("serializable"))
        }
        ExperimentKind::SupDelta => {
            let spec = config.sup_delta.expect("validated");
            let est = estimate_sup_delta(&spec, seed)?;
            files.push((
                "results.csv".into(),
                output::csv(
                    "driving_alpha,inner_steps,trials,mean,stderr,extrapolated",
                    [format!(
                        "{},{},{},{},{},{}",
                        spec.driving_alpha,
                        est.inner_steps,
                        est.trials,
                        est.mean,
                        est.stderr,
                        est.extrapolated
                    )],
                ),
            ));
            summary(config, serde_json::to_value(est).expect("serializable"))
        }
        ExperimentKind::Identities => {
            let spec = config.generator()?;
            let n = config.grid[0] as usize;
            let report = match config.identity_mode {
                IdentityMode::Exact => verify_identities_exact(&BruteSystem::from_process(spec)?, n)?,
                IdentityMode::MonteCarlo => verify_identities_mc(spec, n, config.trials(), seed)?,
            };
            files.push((
                "results.csv".into(),
                output::csv(
                    "name,status,lhs,rhs",
                    report.checks.iter().map(|c| {
                        format!(
                            "{},{},{},{}",
                            c.name,
                            serde_json::to_value(c.status).expect("serializable").as_str().unwrap_or(""),
                            c.lhs,
                            c.rhs
                        )
                    }),
                ),
            ));
            let mut s = summary(config, Value::Null);
            s.identities = Some(IdentitySummary {
                all_pass: report.all_pass(),
                report,
            });
            s
        }
        ExperimentKind::BruteForce => {
            let system = BruteSystem::from_process(config.generator()?)?;
            let level = config.level as i64;
            let mut rows = Vec::new();
            let mut results = Vec::new();
            for &n in &config.grid {
                let r = brute_force_persistence(&system, n as usize, level)?;
                rows.push(format!(
                    "{},{},{},{},{}",
                    n,
                    level,
                    r.probability,
                    r.to_f64(),
                    r.enumerated_states
                ));
                results.push(json!({
                    "n": n,
                    "probability": r.probability.to_string(),
                    "p": r.to_f64(),
                    "enumerated_states": r.enumerated_states,
                }));
            }
            files.push((
                "results.csv".into(),
                output::csv("n,level,probability,p,enumerated_states", rows),
            ));
            summary(config, Value::Array(results))
        }
    };
    Ok(Artifacts { summary, files })
}

/// Runs `config` and writes its artifacts to `config.out`.
pub fn run(config: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let dir = config.out.clone().ok_or_else(|| CliError::Field {
        field: "out".into(),
        message: "an output directory is required (config or --out)".into(),
    })?;
    let artifacts = execute(config)?;
    std::fs::create_dir_all(&dir).map_err(|source| CliError::Write {
        path: dir.clone(),
        source,
    })?;
    for (name, contents) in &artifacts.files {
        output::write_file(&dir.join(name), contents)?;
    }
    output::write_file(&dir.join("summary.json"), &artifacts.summary_json())?;
    Ok(artifacts)
}
