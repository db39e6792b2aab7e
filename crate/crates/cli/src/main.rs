use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sgn_cli::commands;
use sgn_cli::error::CliError;

/// Multi-symplectic solvers for the Serre-Green-Naghdi equations.
#[derive(Debug, Parser)]
#[command(name = "sgn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one simulation and write snapshots, diagnostics and metadata.
    Run {
        /// TOML configuration file.
        config: PathBuf,
    },
    /// Run the structure-verification battery.
    Verify {
        /// Seed for the randomised derivative checks.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print the checks as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Measure observed orders of accuracy against the exact solution.
    Convergence {
        config: PathBuf,
        /// Grid sizes, coarsest first; the step scales with the grid spacing.
        #[arg(long, value_delimiter = ',', default_values_t = [65, 129, 257])]
        resolutions: Vec<usize>,
    },
    /// Run every scheme from the same initial data and compare them.
    Compare { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<(String, bool), CliError> = match &cli.command {
        Command::Run { config } => commands::cmd_run(config).map(|s| (s, true)),
        Command::Verify { seed, json } => commands::cmd_verify(*seed, *json),
        Command::Convergence {
            config,
            resolutions,
        } => commands::cmd_convergence(config, resolutions).map(|s| (s, true)),
        Command::Compare { config } => commands::cmd_compare(config).map(|s| (s, true)),
    };
    match result {
        Ok((text, ok)) => {
            println!("{}", text.trim_end());
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
