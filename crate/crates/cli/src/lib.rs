//! Command-line front end for the annulus simulator.
//!
//! Every table starts with a `# config_sha256=<hex>` line naming the fully
//! resolved [`RunConfig`]; the config itself is written next to the table as
//! `<stem>.config.toml`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use annulus_core::multiprog::Policy;
use clap::{Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod config;
pub mod table;

pub use commands::{
    fit_floorplan, fit_multi, gen, multi, run_sim, sim, sweep, sweep_rows, transpile, GenOutput,
    SimOutcome, SweepSpec,
};
pub use config::{Overrides, PlacementPolicy, RunConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_RUNTIME: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_CAPACITY: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] annulus_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Core(e) if e.is_capacity() => EXIT_CAPACITY,
            CliError::Core(_) => EXIT_INPUT,
            CliError::Io { .. } | CliError::Verify(_) => EXIT_RUNTIME,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "annulus", version, about = "Annular surface-code floorplan simulator")]
pub struct Cli {
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Random,
    Naive,
    Proposed,
    All,
}

impl PolicyArg {
    pub fn policies(self) -> Vec<Policy> {
        match self {
            PolicyArg::Random => vec![Policy::Random],
            PolicyArg::Naive => vec![Policy::Naive],
            PolicyArg::Proposed => vec![Policy::Proposed],
            PolicyArg::All => Policy::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic circuit pool with a manifest.
    Gen {
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        qubits: Option<usize>,
        #[arg(long)]
        layers: Option<usize>,
        /// Density classes dealt round-robin, e.g. `low,high`.
        #[arg(long, value_delimiter = ',')]
        class: Vec<String>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Commute Cliffords to the end of a gate list and pack T-layers.
    Transpile {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Compare input and output unitaries (at most 4 qubits).
        #[arg(long)]
        verify: bool,
    },
    /// Simulate circuits and emit one summary row per circuit and ring count.
    Sim {
        #[arg(required = true)]
        circuits: Vec<PathBuf>,
        /// Outer ring count `L`, or an inclusive range `A..B`.
        #[arg(long = "or")]
        outer_rings: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-layer trace table.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run workloads concurrently under one or all sharing policies.
    Multi {
        #[arg(required = true)]
        circuits: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "proposed")]
        policy: PolicyArg,
        #[arg(long = "or")]
        outer_rings: Option<usize>,
        /// With `--policy all`, one table per policy named `<stem>.<policy>.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One-at-a-time parameter sweep over a circuit set.
    Sweep {
        #[arg(required = true)]
        circuits: Vec<PathBuf>,
        /// TOML file mapping parameter names to value arrays.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        param: Option<String>,
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = cli.overrides.resolve()?;
    match cli.command {
        Command::Gen { count, qubits, layers, class, out } => {
            let mut cfg = cfg;
            if let Some(c) = count {
                cfg.synth.count = c;
            }
            if let Some(q) = qubits {
                cfg.synth.num_qubits = q;
            }
            if let Some(j) = layers {
                cfg.synth.num_layers = j;
            }
            if !class.is_empty() {
                cfg.synth.classes = class
                    .iter()
                    .map(|s| s.parse())
                    .collect::<Result<_, annulus_core::Error>>()?;
            }
            if let Some(o) = out {
                cfg.out_dir = o;
            }
            cfg.validate()?;
            let g = gen(&cfg)?;
            eprintln!("wrote {} circuits to {}", g.files.len(), cfg.out_dir.display());
            Ok(())
        }
        Command::Transpile { input, out, verify } => transpile(&input, out.as_deref(), verify),
        Command::Sim { circuits, outer_rings, out, trace } => {
            let rings = outer_rings.as_deref().map(parse_rings).transpose()?;
            sim(&cfg, &circuits, rings, out.as_deref(), trace.as_deref())
        }
        Command::Multi { circuits, policy, outer_rings, out } => {
            multi(&cfg, &circuits, &policy.policies(), outer_rings, out.as_deref())
        }
        Command::Sweep { circuits, spec, param, values, out } => {
            let mut s = match &spec {
                Some(p) => SweepSpec::load(p)?,
                None => SweepSpec::default(),
            };
            match param {
                Some(p) if values.is_empty() => {
                    return Err(CliError::Input(format!("--param {p} needs --values")));
                }
                Some(p) => {
                    s.params.insert(p, values);
                }
                None if !values.is_empty() => return Err(CliError::Input("--values needs --param".into())),
                None => {}
            }
            if s.params.is_empty() {
                return Err(CliError::Input("nothing to sweep: pass --spec or --param".into()));
            }
            sweep(&cfg, &s, &circuits, out.as_deref())
        }
    }
}

/// `L` or an inclusive range `A..B`.
pub fn parse_rings(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Input(format!("bad ring spec {s:?}, expected L or A..B"));
    match s.split_once("..") {
        Some((a, b)) => {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![s.trim().parse().map_err(|_| bad())?]),
    }
}

pub fn main_from<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
