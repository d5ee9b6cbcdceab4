//! Command implementations behind the `bpe` binary.
//!
//! Every command reads a [`RunConfig`], writes CSV and JSON files into the
//! output directory and embeds the resolved configuration and seed in each
//! file, so a rerun with the same inputs reproduces the files byte for byte.

pub mod commands;
pub mod config;
mod output;

use std::path::PathBuf;

pub use config::{parse_config, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] biphoton::Error),
}

impl CliError {
    /// 2 for configuration problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(e) if e.is_numeric() => 3,
            _ => 2,
        }
    }
}
