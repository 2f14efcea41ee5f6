use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use persist_cli::reproduce::{reproduce_paper, Scale, Verdict, CRITERIA, DEFAULT_SEED};
use persist_cli::{run, CliError, ExperimentConfig};
use persist_core::Seed;

#[derive(Parser)]
#[command(name = "persist", version, about = "Persistence probability experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a log-log SVG plot.
        #[arg(long)]
        plot: bool,
    },
    /// Run the acceptance suite with pinned seeds.
    ReproducePaper {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value = "reproduce")]
        out: PathBuf,
        /// `full` or `smoke`.
        #[arg(long, default_value = "full")]
        scale: Scale,
        /// Comma-separated subset of criteria to run.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
    /// Check a config without running it.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            config,
            seed,
            workers,
            out,
            plot,
        } => {
            let mut cfg = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if workers.is_some() {
                cfg.workers = workers;
            }
            if out.is_some() {
                cfg.out = out;
            }
            cfg.plot |= plot;
            match run(&cfg) {
                Ok(artifacts) => {
                    let code = artifacts.exit_code();
                    if let Some(ids) = &artifacts.summary.identities {
                        for c in &ids.report.checks {
                            println!("{:?} {}: {} vs {}", c.status, c.name, c.lhs, c.rhs);
                        }
                    }
                    if let Some(t) = artifacts.summary.theta_hat {
                        println!(
                            "theta_hat = {t:.4} +/- {:.4}",
                            artifacts.summary.theta_stderr.unwrap_or(f64::NAN)
                        );
                    }
                    ExitCode::from(code as u8)
                }
                Err(e) => fail(&e),
            }
        }
        Command::ReproducePaper {
            seed,
            workers,
            out,
            scale,
            only,
        } => {
            let ids = if only.is_empty() { CRITERIA.to_vec() } else { only };
            let mut print = |o: &persist_cli::reproduce::Outcome| println!("{}", o.line());
            match reproduce_paper(Seed(seed), scale, &ids, workers, &out, &mut print) {
                Ok(outcomes) if outcomes.iter().any(|o| o.verdict == Verdict::Fail) => ExitCode::from(2),
                Ok(_) => ExitCode::SUCCESS,
                Err(e) => fail(&e),
            }
        }
        Command::ValidateConfig { config } => match ExperimentConfig::load(&config).and_then(|c| c.validate()) {
            Ok(()) => {
                println!("{}: ok", config.display());
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}
