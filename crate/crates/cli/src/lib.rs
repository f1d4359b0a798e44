//! Configuration, orchestration and data emission for `cqwell` runs.
//!
//! A run is a [`config::RunConfig`] plus a [`commands::Command`]. Commands
//! return [`output::Table`]s, which [`execute`] writes as CSV or JSON with the
//! resolved configuration and library version in the header.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};

use cqwell::kernel::Route;

pub use commands::{run, Command};
pub use config::{Format, RunConfig};
pub use error::{CliError, ConfigError};

/// Command-line flags that replace configuration fields.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub n_states: Option<usize>,
    pub route: Option<Route>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(out) = &self.out {
            cfg.output.dir = out.display().to_string();
        }
        if let Some(f) = self.format {
            cfg.output.format = f;
        }
        if let Some(n) = self.n_states {
            cfg.n_states = n;
        }
        if let Some(r) = self.route {
            cfg.kernel.route = r;
        }
    }
}

/// Load the configuration (defaults when `path` is `None`), apply the
/// overrides, run `command` and write its files.
pub fn execute(
    command: Command,
    path: Option<&Path>,
    overrides: &Overrides,
) -> Result<(Vec<PathBuf>, Vec<String>), CliError> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    overrides.apply(&mut cfg);
    let warnings = cfg.resolve()?.warnings;
    let (out, header) = run(command, &cfg)?;
    let written =
        output::write_output(Path::new(&cfg.output.dir), cfg.output.format, &header, &out)?;
    let mut messages: Vec<String> = warnings
        .into_iter()
        .map(|w| format!("warning: {w}"))
        .collect();
    messages.extend(out.report);
    Ok((written, messages))
}
