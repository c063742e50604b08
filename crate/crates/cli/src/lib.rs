//! Configuration, checkpoints and commands behind the `deepcorr` binary.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod error;

pub use checkpoint::{Checkpoint, CheckpointRef};
pub use commands::{cmd_evaluate, cmd_slice, cmd_sweep, cmd_train, Run, OUTPUT_ROOT_ENV};
pub use config::{Environment, ExperimentConfig, Method, Scope};
pub use error::{CliError, Result};
