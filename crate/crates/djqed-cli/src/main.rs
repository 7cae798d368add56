//! `djqed`: synthesize phase oracles, run the ideal three-qubit
//! constant-vs-balanced algorithm, compile joint operations to pulse
//! schedules, and integrate the lossy cavity dynamics.
//!
//! Exit codes: 0 success, 1 verification or validation failure,
//! 2 numerical failure.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use djqed::circuit::JointOpId;

/// Failure carrying the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn validation(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<djqed::Error> for Failure {
    fn from(e: djqed::Error) -> Self {
        let code = match e {
            djqed::Error::CorruptedState { .. } => 2,
            _ => 1,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::validation(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Self::validation(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "djqed",
    version,
    about = "Oracle synthesis, pulse compilation, and open-system simulation \
             for a three-qubit constant-vs-balanced discriminator on \
             cavity-coupled qutrits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build, verify, and print the 35-row oracle decomposition table
    Synth {
        /// Write the table as JSON to this path
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the ideal algorithm on one function, or on all 72 with --all
    Dj {
        /// Truth table as eight bits, f(000) first (e.g. 01101010)
        function: Option<String>,
        /// Run every constant and balanced function and emit a CSV
        #[arg(long, conflicts_with = "function")]
        all: bool,
        /// CSV destination for --all (stdout otherwise)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compile a joint operation to its resonant pulse schedule
    Pulse {
        /// Joint operation: U1, U2, or U3
        #[arg(long, value_parser = parse_op)]
        op: JointOpId,
        /// Coupling strength g/2π in MHz
        #[arg(long, default_value_t = 15.0)]
        g_mhz: f64,
        /// JSON destination (stdout otherwise)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the lossy dynamics of U1, U2, U3 over a b0 grid (CSV out)
    Sweep {
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Integrate a single (op, b0) point (JSON out)
    Run {
        /// Joint operation: U1, U2, or U3
        #[arg(long, value_parser = parse_op)]
        op: JointOpId,
        #[command(flatten)]
        sim: SimArgs,
    },
}

#[derive(Args)]
struct SimArgs {
    /// JSON configuration file; built-in defaults when absent
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path, overriding the config's output_path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated b0 values, overriding the config
    #[arg(long, value_delimiter = ',')]
    b0: Option<Vec<f64>>,
    /// Fock levels 0..n, overriding the config
    #[arg(long)]
    cutoff: Option<usize>,
    /// Integration step in nanoseconds, overriding the derived default
    #[arg(long)]
    dt: Option<f64>,
}

impl SimArgs {
    fn resolve(&self) -> Result<config::RunConfig, Failure> {
        config::effective_config(
            self.config.as_deref(),
            &config::Overrides {
                b0: self.b0.clone(),
                cutoff: self.cutoff,
                dt_ns: self.dt,
                out: self.out.clone(),
            },
        )
    }
}

fn parse_op(s: &str) -> Result<JointOpId, String> {
    s.parse().map_err(|e: djqed::Error| e.to_string())
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Synth { out } => commands::synth(out.as_deref()),
        Command::Dj { function, all, out } => {
            commands::dj(function.as_deref(), all, out.as_deref())
        }
        Command::Pulse { op, g_mhz, out } => commands::pulse(op, g_mhz, out.as_deref()),
        Command::Sweep { sim } => commands::sweep(&sim.resolve()?),
        Command::Run { op, sim } => commands::run(op, &sim.resolve()?),
    }
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version are successes; everything else is a
            // validation failure, and clap's own exit code 2 is reserved
            // here for numerical trouble
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn main() {
    std::process::exit(run());
}
