mod commands;
mod config;
mod error;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{GridArgs, Settings};

/// Diffusion kernel PCA experiments for word sense disambiguation.
#[derive(Debug, Parser)]
#[command(name = "dkpca", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one configuration over every labeled ratio and write the report CSV.
    Run {
        #[command(flatten)]
        settings: Settings,
    },
    /// Write the eigenvalue spectrum of the centered kernel.
    Spectrum {
        #[command(flatten)]
        settings: Settings,
    },
    /// Evaluate the Cartesian product of parameter grids.
    Sweep {
        #[command(flatten)]
        settings: Settings,
        #[command(flatten)]
        grid: GridArgs,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { settings } => commands::run(settings),
        Command::Spectrum { settings } => commands::spectrum(settings),
        Command::Sweep { settings, grid } => commands::sweep(settings, grid),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
