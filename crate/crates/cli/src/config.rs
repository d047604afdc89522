//! Resolved run configuration: file defaults, then command-line overrides.

use std::path::{Path, PathBuf};

use annulus_core::circuit::{DensityClass, SynthParams};
use annulus_core::floorplan::FloorplanConfig;
use annulus_core::multiprog::MultiConfig;
use annulus_core::placement::PlacementWeights;
use annulus_core::scheduler::{LatencyModel, MovementMode};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Single-workload placement strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PlacementPolicy {
    Greedy,
    Reversed,
    Random,
    Spread,
}

impl PlacementPolicy {
    pub fn name(self) -> &'static str {
        match self {
            PlacementPolicy::Greedy => "greedy",
            PlacementPolicy::Reversed => "reversed",
            PlacementPolicy::Random => "random",
            PlacementPolicy::Spread => "spread",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub count: usize,
    pub num_qubits: usize,
    pub num_layers: usize,
    /// Classes are dealt round-robin across the pool.
    pub classes: Vec<DensityClass>,
    pub multi_qubit_fraction: f64,
    pub max_rotation_arity: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            count: 3,
            num_qubits: 100,
            num_layers: 50,
            classes: DensityClass::ALL.to_vec(),
            multi_qubit_fraction: 0.3,
            max_rotation_arity: 4,
        }
    }
}

impl SynthConfig {
    pub fn params(&self, i: usize, seed: u64) -> SynthParams {
        let class = self.classes[i % self.classes.len()];
        SynthParams {
            multi_qubit_fraction: self.multi_qubit_fraction,
            max_rotation_arity: self.max_rotation_arity,
            ..SynthParams::new(self.num_qubits, self.num_layers, class, seed.wrapping_add(i as u64))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub placement: PlacementPolicy,
    pub fast_y: bool,
    /// Promotion cap; `None` uses the multiprogramming system cap.
    pub fast_y_budget: Option<usize>,
    /// Grow `outer_rings` until the workload fits.
    pub auto_rings: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { placement: PlacementPolicy::Greedy, fast_y: true, fast_y_budget: None, auto_rings: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub placement: PlacementWeights,
    pub latency: LatencyModel,
    pub floorplan: FloorplanConfig,
    pub multi: MultiConfig,
    pub synth: SynthConfig,
    pub sim: SimConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out_dir: PathBuf::from("out"),
            placement: PlacementWeights::default(),
            latency: LatencyModel::default(),
            floorplan: FloorplanConfig::default(),
            multi: MultiConfig::default(),
            synth: SynthConfig::default(),
            sim: SimConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.placement.validate()?;
        self.latency.validate()?;
        self.multi.validate()?;
        if self.synth.classes.is_empty() {
            return Err(CliError::Input("synth.classes must not be empty".into()));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }
}

/// Flags shared by every subcommand; each one overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Grid side of the base fabric.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// CR-entry lane count.
    #[arg(long, global = true)]
    pub lanes: Option<usize>,
    #[arg(long, global = true)]
    pub distance: Option<usize>,
    #[arg(long, global = true)]
    pub alpha_t: Option<f64>,
    #[arg(long, global = true)]
    pub alpha_y: Option<f64>,
    #[arg(long, global = true)]
    pub lambda_t: Option<f64>,
    #[arg(long, global = true)]
    pub lambda_y: Option<f64>,
    #[arg(long, global = true)]
    pub lambda_int: Option<f64>,
    #[arg(long, global = true)]
    pub eta_t: Option<f64>,
    #[arg(long, global = true)]
    pub eta_m: Option<f64>,
    /// System-wide fast-Y promotion cap.
    #[arg(long, global = true)]
    pub by_total: Option<usize>,
    #[arg(long, global = true)]
    pub tau_msf: Option<u64>,
    #[arg(long, global = true)]
    pub worst_case_corner: Option<bool>,
    #[arg(long, global = true)]
    pub lane_pipelining: Option<bool>,
    #[arg(long, global = true, value_parser = parse_mode)]
    pub movement: Option<MovementMode>,
    #[arg(long, global = true, value_enum)]
    pub placement: Option<PlacementPolicy>,
    /// on|off
    #[arg(long = "fast-y", global = true, value_parser = parse_switch)]
    pub fast_y: Option<bool>,
    #[arg(long, global = true)]
    pub fast_y_budget: Option<usize>,
}

fn parse_mode(s: &str) -> Result<MovementMode, String> {
    s.parse().map_err(|e: annulus_core::Error| e.to_string())
}

fn parse_switch(s: &str) -> Result<bool, String> {
    match s {
        "on" | "true" | "1" => Ok(true),
        "off" | "false" | "0" => Ok(false),
        _ => Err(format!("expected on or off, got {s:?}")),
    }
}

impl Overrides {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($flag:ident => $($dst:tt)+) => {
                if let Some(v) = self.$flag {
                    c.$($dst)+ = v;
                }
            };
        }
        set!(seed => seed);
        set!(n => floorplan.n);
        set!(lanes => floorplan.lanes);
        set!(distance => floorplan.distance);
        set!(alpha_t => placement.alpha_t);
        set!(alpha_y => placement.alpha_y);
        set!(lambda_t => placement.lambda_t);
        set!(lambda_y => placement.lambda_y);
        set!(lambda_int => placement.lambda_int);
        set!(eta_t => multi.eta_t);
        set!(eta_m => multi.eta_m);
        set!(tau_msf => latency.tau_msf);
        set!(worst_case_corner => latency.worst_case_corner);
        set!(lane_pipelining => latency.lane_pipelining);
        set!(movement => latency.movement_mode);
        set!(placement => sim.placement);
        set!(fast_y => sim.fast_y);
        if self.by_total.is_some() {
            c.multi.b_y_total = self.by_total;
        }
        if self.fast_y_budget.is_some() {
            c.sim.fast_y_budget = self.fast_y_budget;
        }
        c.validate()?;
        Ok(c)
    }
}
