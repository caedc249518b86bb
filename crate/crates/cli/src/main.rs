//! `storydrift`: noise synthesis, trace processing, MSE validation,
//! classification matrices and sensor-selection curves.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use storydrift_core::{CoefficientMode, NoiseMode};

use crate::config::Overrides;

/// Bad input from the caller rather than a failure while running.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

#[derive(Parser)]
#[command(name = "storydrift", version, about)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Run configuration (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory [default: out]
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Master seed for noise synthesis [default: 0]
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Sample interval in seconds [default: 0.01]
    #[arg(long, global = true)]
    dt: Option<f64>,

    /// Noise model for analytic errors [default: exact]
    #[arg(long, global = true)]
    mode: Option<ModeArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    White,
    Exact,
}

impl From<ModeArg> for NoiseMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::White => NoiseMode::White,
            ModeArg::Exact => NoiseMode::Exact,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum CoefficientArg {
    Simplified,
    Exact,
}

impl From<CoefficientArg> for CoefficientMode {
    fn from(c: CoefficientArg) -> Self {
        match c {
            CoefficientArg::Simplified => CoefficientMode::Simplified,
            CoefficientArg::Exact => CoefficientMode::Exact,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum RestAt {
    Start,
    End,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic noise trace (`t,ax`) for a catalog sensor
    Synth(commands::SynthArgs),
    /// Integrate a trace, detect end of shaking and apply ZUPT
    Process(commands::ProcessArgs),
    /// Compare Monte Carlo displacement errors with the analytic curves
    MseValidate(commands::MseArgs),
    /// Conditional classification matrix for one drift model
    Classify(commands::ClassifyArgs),
    /// Misclassification probability against strong-motion duration
    PeCurves(commands::PeArgs),
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use storydrift_core::Error as E;
    for cause in err.chain() {
        if cause.is::<Usage>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            if matches!(e, E::UnknownSensor(_) | E::UnknownHazard(_)) {
                return 2;
            }
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let g = cli.global;
    let flags = Overrides {
        config: g.config,
        out: g.out,
        seed: g.seed,
        dt: g.dt,
        mode: g.mode.map(Into::into),
    };
    let result = match cli.command {
        Command::Synth(a) => commands::synth(&flags, &a),
        Command::Process(a) => commands::process(&flags, &a),
        Command::MseValidate(a) => commands::mse_validate(&flags, &a),
        Command::Classify(a) => commands::classify(&flags, &a),
        Command::PeCurves(a) => commands::pe_curves(&flags, &a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
