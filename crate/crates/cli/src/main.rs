//! `pairq`: run Grover traces, benchmark sweeps and gate dumps from the
//! command line.
//!
//! Exit status: 0 completed, 2 config or usage error, 3 internal invariant
//! violation, 1 anything else (I/O).

mod commands;
mod config;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use pairq_core::bench::{ChannelKind, PhaseDistribution};
use pairq_core::grover::{Encoding, Level, Marked, OracleMode};
use pairq_core::ion::PhysicalParams;

use config::{parse_angle, parse_delay, parse_enum, parse_grid, DelaySpec};

/// A parsed grid. An alias so clap takes it as one value rather than a
/// repeated flag.
pub type Grid = Vec<f64>;

pub const EXIT_IO: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INVARIANT: u8 = 3;

/// An error with a known exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub messages: Vec<String>,
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, messages: vec![msg.into()] }
    }

    pub fn config(violations: Vec<String>) -> Self {
        Self { code: EXIT_USAGE, messages: violations }
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        Self { code: EXIT_INVARIANT, messages: vec![msg.into()] }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.messages.join("\n"))
    }
}

impl std::error::Error for Failure {}

fn exit_code(err: &anyhow::Error) -> u8 {
    use pairq_core::Error as E;
    if let Some(f) = err.downcast_ref::<Failure>() {
        return f.code;
    }
    match err.downcast_ref::<E>() {
        Some(
            E::Identity { .. }
            | E::DimensionMismatch { .. }
            | E::NotSquare { .. }
            | E::LabelCount { .. }
            | E::OutsideCodeSpace(_),
        ) => EXIT_INVARIANT,
        Some(_) => EXIT_USAGE,
        None => EXIT_IO,
    }
}

#[derive(Parser)]
#[command(name = "pairq", about = "Two-ion pair qubit simulator: Grover search, noise benchmarks, gate catalog")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run two-qubit Grover search for one marked state and write its trace.
    Grover(GroverArgs),
    /// Seeded sweeps and Monte Carlo benchmarks, written as CSV and JSON.
    Bench(BenchArgs),
    /// Inspect the gate catalog.
    Gates(GatesArgs),
    /// Validate or print run configuration files.
    Config(ConfigArgs),
}

/// Physical parameters. Defaults (eta=0.1, omega=0.05, nu=1, delta=0.9,
/// omega_eg=100) are illustrative, not measured values from any experiment.
#[derive(Args, Clone, Default)]
#[command(next_help_heading = "Physical parameters (illustrative defaults, not from any experiment)")]
pub struct ParamArgs {
    /// Lamb-Dicke parameter [default: 0.1]
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub eta: Option<f64>,
    /// Laser Rabi frequency [default: 0.05]
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    /// Trap frequency [default: 1]
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub nu: Option<f64>,
    /// Laser detuning from the carrier [default: 0.9]
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    /// Internal transition frequency [default: 100]
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub omega_eg: Option<f64>,
}

impl ParamArgs {
    pub fn apply(&self, p: &mut PhysicalParams) {
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut p.eta, self.eta);
        set(&mut p.omega, self.omega);
        set(&mut p.nu, self.nu);
        set(&mut p.delta, self.delta);
        set(&mut p.omega_eg, self.omega_eg);
    }
}

#[derive(Args)]
pub struct GroverArgs {
    /// Marked basis state: 00, 01, 10 or 11 (|11> also accepted).
    #[arg(long)]
    pub marked: Marked,
    /// logical (4-dim) or physical (two pairs, 16-dim).
    #[arg(long, default_value = "logical", value_parser = parse_enum::<Level>)]
    pub level: Level,
    /// pair (two-ion qubits) or bare (single-ion qubits, logical level only).
    #[arg(long, default_value = "pair", value_parser = parse_enum::<Encoding>)]
    pub encoding: Encoding,
    /// unitary or measured (measurement-controlled oracle; needs --seed).
    #[arg(long, default_value = "unitary", value_parser = parse_enum::<OracleMode>)]
    pub oracle_mode: OracleMode,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Free evolution after preparation: a time, or e.g. 0.25period.
    #[arg(long, value_parser = parse_delay)]
    pub delay_after_prep: Vec<DelaySpec>,
    /// Free evolution after the oracle.
    #[arg(long, value_parser = parse_delay)]
    pub delay_after_oracle: Vec<DelaySpec>,
    /// Write the trace JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overwrite an existing output file.
    #[arg(long)]
    pub force: bool,
    /// Config file supplying physical parameters.
    #[arg(long, env = "PAIRQ_CONFIG")]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Args)]
pub struct BenchArgs {
    #[command(subcommand)]
    pub experiment: BenchCommand,
    #[command(flatten)]
    pub common: BenchCommon,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Csv,
    Json,
    Both,
}

#[derive(Args)]
pub struct BenchCommon {
    /// Base config file; flags override its values.
    #[arg(long, global = true, env = "PAIRQ_CONFIG")]
    pub config: Option<PathBuf>,
    /// Monte Carlo trials per grid point [default: 1000].
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Master seed [default: 0].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for <experiment>.csv and <experiment>.json.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value = "both")]
    pub format: ReportFormat,
    /// Overwrite existing report files.
    #[arg(long, global = true)]
    pub force: bool,
    /// Run trials on one thread (results are identical either way).
    #[arg(long, global = true)]
    pub serial: bool,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Subcommand)]
pub enum BenchCommand {
    /// Decoded fidelity of (|0>+|1>)/√2 under random phase noise.
    Dephasing {
        /// collective-dephasing / collective, or independent-dephasing / independent.
        #[arg(long, value_parser = parse_channel)]
        kind: ChannelKind,
        /// Phase standard deviations: a:b:n, a comma list, or one value.
        #[arg(long, value_parser = parse_grid)]
        sigma_grid: Grid,
        /// gaussian or fixed.
        #[arg(long, default_value = "gaussian", value_parser = parse_enum::<PhaseDistribution>)]
        distribution: PhaseDistribution,
    },
    /// Grover success against a delay after preparation.
    Delay {
        #[arg(long, value_parser = parse_enum::<Encoding>)]
        encoding: Encoding,
        /// Number of delays spread over one bare phase period, ends included.
        #[arg(long, conflicts_with = "taus")]
        grid: Option<usize>,
        /// Explicit delays: a:b:n, a comma list, or one value.
        #[arg(long, value_parser = parse_grid)]
        taus: Option<Grid>,
        #[arg(long, default_value = "11")]
        marked: Marked,
    },
    /// Unitary against measurement-controlled oracle inside Grover.
    Oracle {
        #[arg(long, default_value = "11")]
        marked: Marked,
    },
    /// Grover success when each pair may suffer a random Pauli error after every gate.
    Leakage {
        /// Per-gate error probabilities: a:b:n, a comma list, or one value.
        #[arg(long, value_parser = parse_grid)]
        grid: Grid,
        #[arg(long, default_value = "11")]
        marked: Marked,
    },
    /// Run the experiment described by --config (a config or an earlier report).
    Run,
}

fn parse_channel(s: &str) -> Result<ChannelKind, String> {
    match s {
        "collective" => Ok(ChannelKind::CollectiveDephasing),
        "independent" => Ok(ChannelKind::IndependentDephasing),
        other => parse_enum(other),
    }
}

#[derive(Args)]
pub struct GatesArgs {
    #[command(subcommand)]
    pub action: Option<GatesCommand>,
    /// Run the identity ledger (same as `gates verify`).
    #[arg(long)]
    pub verify: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DumpFormat {
    Text,
    Json,
    Both,
}

#[derive(Subcommand)]
pub enum GatesCommand {
    /// Print a gate as exact text and as floating JSON.
    Dump {
        /// Catalog name (W, V, M1..M4, P1..P4, D) or U.
        name: String,
        /// Rotation angle for U: radians or multiples of pi (7pi/4).
        #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
        theta: Option<f64>,
        #[arg(long, value_enum, default_value = "both")]
        format: DumpFormat,
    },
    /// Check every catalog identity.
    Verify,
    /// List catalog gate names.
    List,
}

#[derive(Args)]
pub struct ConfigArgs {
    #[command(subcommand)]
    pub action: ConfigCommand,
}

#[derive(Subcommand)]
pub enum ConfigCommand {
    /// Check a config file and list every violated constraint.
    Validate { path: PathBuf },
    /// Print a complete example config with default values.
    Defaults,
}

fn main() -> ExitCode {
    let version: &'static str = Box::leak(pairq_core::bench::version_string().into_boxed_str());
    let matches = Cli::command().version(version).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::Grover(a) => commands::grover(a),
        Command::Bench(a) => commands::bench(a),
        Command::Gates(a) => commands::gates(a),
        Command::Config(a) => commands::config(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit_code(&e);
            for line in format!("{e:#}").lines() {
                eprintln!("error: {line}");
            }
            ExitCode::from(code)
        }
    }
}
