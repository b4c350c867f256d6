//! Config-driven runs: TOML experiment documents, CSV results and JSONL
//! manifests written into content-addressed directories.

mod config;
mod run;

pub use config::{validate_config, validate_table, ConfigError, ExperimentConfig, TaskSpec};
pub use run::{
    config_hash, exit_code, fresh_run_dir, results_csv, run_experiment, run_task, ResultRow, RunManifest,
    StreamRecord, TaskOutput, CSV_HEADER, RUN_LABEL,
};
