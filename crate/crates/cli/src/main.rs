//! `vatom` -- spectra, populations, figure reproduction, parameter scans, and
//! dressed-state reports for the driven V-type three-level atom.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical failure, 4 I/O
//! error.

mod commands;
mod output;
mod scenario;

use clap::{Parser, Subcommand};

use commands::{DressedArgs, PopulationsArgs, ReproduceArgs, ScanArgs, SpectrumArgs};

#[derive(Debug)]
pub enum CliError {
    Core(vatom::Error),
    Io(std::io::Error),
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 4,
            CliError::Core(e) => match e {
                vatom::Error::InvalidConfig { .. }
                | vatom::Error::UnknownPreset(_)
                | vatom::Error::InvalidGrid(_)
                | vatom::Error::Unsupported(_)
                | vatom::Error::WindowOutsideGrid { .. } => 2,
                vatom::Error::DegenerateEigenvalues { .. }
                | vatom::Error::NyquistViolation { .. }
                | vatom::Error::GridTooNarrow { .. }
                | vatom::Error::NoConvergence { .. }
                | vatom::Error::StepUnderflow { .. }
                | vatom::Error::InsufficientHorizon { .. } => 3,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
        }
    }
}

impl From<vatom::Error> for CliError {
    fn from(e: vatom::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "vatom",
    version,
    about = "Emission spectra and amplitude dynamics of a microwave-driven V-type atom"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one emission spectrum and write spectrum.csv + manifest.json.
    Spectrum(SpectrumArgs),
    /// Time-domain populations; writes populations.csv + manifest.json.
    Populations(PopulationsArgs),
    /// Regenerate the data behind one figure (fig3, fig4, fig5).
    Reproduce(ReproduceArgs),
    /// Scan one parameter and tabulate spectral features per value.
    Scan(ScanArgs),
    /// Dressed-state frame report and optional dressed trajectory.
    Dressed(DressedArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Spectrum(args) => commands::run_spectrum(args),
        Command::Populations(args) => commands::run_populations(args),
        Command::Reproduce(args) => commands::run_reproduce(args),
        Command::Scan(args) => commands::run_scan(args),
        Command::Dressed(args) => commands::run_dressed(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
