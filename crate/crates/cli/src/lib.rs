//! Config-driven runner around `fedlap_core`: `run`, `sweep-eta`, `gen-data`
//! and `verify`.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiment;
pub mod verify;

pub use commands::{cmd_gen_data, cmd_run, cmd_sweep, execute, global_baseline, sweep_eta, RunSummary, SweepRow};
pub use config::RunSpec;
pub use error::CliError;
pub use experiment::{apply_env_seed, build, Experiment};
