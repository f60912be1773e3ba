//! Library side of the `hypgraph` command: configuration, dispatch and
//! artifact writing.

pub mod config;
mod run;

pub use config::{Command, ConfigError, DomainSpec, RunConfig, Tolerances};
pub use run::{run, Check, Outcome, RunError, RunOptions};
