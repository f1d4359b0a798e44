use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cqwell::kernel::Route;
use cqwell_cli::{execute, Command, Format, Overrides};

/// Driven composite quadratic well: levels, dipole basis, kernel, evolution,
/// resonance scans and oracle baselines.
#[derive(Debug, Parser)]
#[command(name = "cqwell", version)]
struct Cli {
    /// TOML run configuration; defaults apply to every missing field.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Basis truncation.
    #[arg(long, global = true)]
    n_states: Option<usize>,
    /// Kernel evaluation route: power or fourier.
    #[arg(long, global = true)]
    route: Option<Route>,
    #[command(subcommand)]
    command: Command,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides {
        out: cli.out,
        format: cli.format,
        n_states: cli.n_states,
        route: cli.route,
    };
    match execute(cli.command, cli.config.as_deref(), &overrides) {
        Ok((written, messages)) => {
            for m in messages {
                eprintln!("{m}");
            }
            for p in written {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
