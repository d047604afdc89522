//! Seeded synthetic Clifford+T workloads with controlled T-layer density.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Circuit, Pauli, PauliProduct, Rotation, Sign, TLayer};
use crate::{Error, Result};

/// Per-layer active-fraction class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityClass {
    Low,
    Medium,
    High,
}

impl DensityClass {
    pub const ALL: [DensityClass; 3] = [DensityClass::Low, DensityClass::Medium, DensityClass::High];

    /// `(lo, hi)` of the active fraction; `hi` is exclusive except for `High`.
    pub fn range(self) -> (f64, f64) {
        match self {
            DensityClass::Low => (0.01, 0.30),
            DensityClass::Medium => (0.30, 0.60),
            DensityClass::High => (0.60, 1.00),
        }
    }

    /// Admissible active-qubit counts for a layer over `q` qubits.
    pub fn count_bounds(self, q: usize) -> (usize, usize) {
        let (lo, hi) = self.range();
        let min = ((lo * q as f64).ceil() as usize).max(1);
        let max = match self {
            DensityClass::High => q,
            _ => ((hi * q as f64).ceil() as usize).saturating_sub(1),
        };
        (min, max.max(min))
    }

    pub fn name(self) -> &'static str {
        match self {
            DensityClass::Low => "low",
            DensityClass::Medium => "medium",
            DensityClass::High => "high",
        }
    }

    pub fn classify(fraction: f64) -> DensityClass {
        if fraction < 0.30 {
            DensityClass::Low
        } else if fraction < 0.60 {
            DensityClass::Medium
        } else {
            DensityClass::High
        }
    }
}

impl std::str::FromStr for DensityClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Ok(DensityClass::Low),
            "medium" => Ok(DensityClass::Medium),
            "high" => Ok(DensityClass::High),
            _ => Err(Error::InvalidParams(format!("unknown density class {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub num_qubits: usize,
    pub num_layers: usize,
    pub density_class: DensityClass,
    pub multi_qubit_fraction: f64,
    pub max_rotation_arity: usize,
    pub seed: u64,
}

impl SynthParams {
    pub fn new(num_qubits: usize, num_layers: usize, density_class: DensityClass, seed: u64) -> Self {
        SynthParams {
            num_qubits,
            num_layers,
            density_class,
            multi_qubit_fraction: 0.3,
            max_rotation_arity: 4,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(10..=1000).contains(&self.num_qubits) {
            return Err(Error::InvalidParams(format!(
                "num_qubits {} outside [10, 1000]",
                self.num_qubits
            )));
        }
        if !(10..=1000).contains(&self.num_layers) {
            return Err(Error::InvalidParams(format!(
                "num_layers {} outside [10, 1000]",
                self.num_layers
            )));
        }
        if !(0.0..=1.0).contains(&self.multi_qubit_fraction) {
            return Err(Error::InvalidParams("multi_qubit_fraction outside [0, 1]".into()));
        }
        if self.max_rotation_arity < 2 {
            return Err(Error::InvalidParams("max_rotation_arity must be at least 2".into()));
        }
        Ok(())
    }

    pub fn default_name(&self) -> String {
        format!(
            "synth-q{}-j{}-{}-s{}",
            self.num_qubits,
            self.num_layers,
            self.density_class.name(),
            self.seed
        )
    }
}

const LOCALS: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

pub fn generate(params: &SynthParams) -> Result<Circuit> {
    params.validate()?;
    let q = params.num_qubits;
    let (lo, hi) = params.density_class.range();
    let (min_k, max_k) = params.density_class.count_bounds(q);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut layers = Vec::with_capacity(params.num_layers);
    for j in 0..params.num_layers {
        let fraction = if params.density_class == DensityClass::High {
            rng.gen_range(lo..=hi)
        } else {
            rng.gen_range(lo..hi)
        };
        let k = ((fraction * q as f64).round() as usize).clamp(min_k, max_k);
        let mut active = index::sample(&mut rng, q, k).into_vec();
        active.shuffle(&mut rng);

        let mut rotations = Vec::new();
        let mut rest = &active[..];
        while !rest.is_empty() {
            let arity = if rest.len() >= 2 && rng.gen_bool(params.multi_qubit_fraction) {
                rng.gen_range(2..=params.max_rotation_arity.min(rest.len()))
            } else {
                1
            };
            let (taken, tail) = rest.split_at(arity);
            rest = tail;
            let product =
                PauliProduct::new(taken.iter().map(|&qb| (qb, LOCALS[rng.gen_range(0..3)])))?;
            let sign = if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus };
            rotations.push(Rotation::eighth(product, sign));
        }
        layers.push(TLayer::new(rotations, j)?);
    }
    Circuit::new(params.default_name(), q, layers, None)
}
