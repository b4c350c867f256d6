//! `fpp`: run first-passage percolation experiments from TOML configs.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid config, 3 budget exceeded.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fpp_core::experiments::{exit_code, run_experiment, validate_table, ConfigError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "fpp", version, about = "First-passage percolation experiments")]
struct Cli {
    /// Experiment config (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config's `seed`
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; overrides the config's `threads`
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Root of the output tree
    #[arg(long, global = true, default_value = "runs")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Write realizations (binary + CSV) of the configured model
    Sample,
    /// Directional time constant
    Mu,
    /// One-arm probabilities and exponent fit
    OneArm,
    /// Rectangle crossing probabilities
    Crossing,
    /// Quasi-independence defect of annulus events
    Ind,
    /// Multiscale comparison inequality check
    Renorm,
    /// Limit shape of rescaled balls (planar)
    BallShape,
    /// Check a config and print its canonical form
    Validate,
}

impl Command {
    fn task(self) -> Option<&'static str> {
        Some(match self {
            Command::Sample => "sample",
            Command::Mu => "mu",
            Command::OneArm => "one-arm",
            Command::Crossing => "crossing",
            Command::Ind => "ind",
            Command::Renorm => "renorm",
            Command::BallShape => "ball-shape",
            Command::Validate => return None,
        })
    }
}

fn config_errors(errors: &[ConfigError]) -> ExitCode {
    for e in errors {
        eprintln!("error: {e}");
    }
    ExitCode::from(2)
}

fn load(cli: &Cli) -> Result<ExperimentConfig, Vec<ConfigError>> {
    let path = cli.config.as_ref().ok_or_else(|| vec![ConfigError::new("--config", "a config file is required")])?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| vec![ConfigError::new("--config", format!("cannot read {}: {e}", path.display()))])?;
    let mut doc: toml::Table = text.parse().map_err(|e: toml::de::Error| vec![ConfigError::new("<document>", e.message())])?;
    if let Some(seed) = cli.seed {
        let seed = i64::try_from(seed).map_err(|_| vec![ConfigError::new("--seed", "seed must be below 2^63")])?;
        doc.insert("seed".into(), toml::Value::Integer(seed));
    }
    let mut cfg = validate_table(doc)?;
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(errors) => return config_errors(&errors),
    };
    let Some(task) = cli.command.task() else {
        print!("{}", cfg.to_toml());
        return ExitCode::SUCCESS;
    };
    if cfg.task.name() != task {
        return config_errors(&[ConfigError::new(
            "task.kind",
            format!("config task is `{}` but the `{task}` subcommand was given", cfg.task.name()),
        )]);
    }
    match run_experiment(&cfg, &cli.out) {
        Ok(m) => {
            if m.warnings > 0 {
                eprintln!("{} warning row(s) in results.csv", m.warnings);
            }
            println!("{}", m.dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
