//! Logical circuits as ordered T-layers of π/8 Pauli-product rotations.

mod doc;
mod synth;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use doc::{parse_circuit, to_document};
pub use synth::{generate, DensityClass, SynthParams};

/// Single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn commutes_with(self, other: Pauli) -> bool {
        self == Pauli::I || other == Pauli::I || self == other
    }

    /// Product `self * other` as `(i^phase, pauli)`.
    pub fn mul_phase(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (X, X) | (Y, Y) | (Z, Z) => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Tensor product of non-identity Paulis keyed by qubit index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliProduct {
    support: BTreeMap<usize, Pauli>,
}

impl PauliProduct {
    /// Builds a product, dropping identity entries. Fails if nothing remains.
    pub fn new(entries: impl IntoIterator<Item = (usize, Pauli)>) -> Result<Self> {
        let support: BTreeMap<usize, Pauli> =
            entries.into_iter().filter(|(_, p)| *p != Pauli::I).collect();
        if support.is_empty() {
            return Err(Error::EmptyProduct);
        }
        Ok(PauliProduct { support })
    }

    pub fn single(qubit: usize, pauli: Pauli) -> Result<Self> {
        Self::new([(qubit, pauli)])
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        self.support.get(&qubit).copied().unwrap_or(Pauli::I)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Pauli)> + '_ {
        self.support.iter().map(|(&q, &p)| (q, p))
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.support.keys().copied()
    }

    pub fn weight(&self) -> usize {
        self.support.len()
    }

    pub fn max_qubit(&self) -> usize {
        *self.support.keys().next_back().expect("non-empty support")
    }

    pub fn commutes_with(&self, other: &PauliProduct) -> bool {
        let anti = self
            .support
            .iter()
            .filter(|(q, p)| !p.commutes_with(other.get(**q)))
            .count();
        anti % 2 == 0
    }

    pub fn overlaps(&self, other: &PauliProduct) -> bool {
        self.support.keys().any(|q| other.support.contains_key(q))
    }
}

impl fmt::Display for PauliProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (q, p) in self.iter() {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{p}{q}")?;
            first = false;
        }
        Ok(())
    }
}

/// Rotation angle class: π/8 (non-Clifford) or π/4 (Clifford).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Angle {
    Eighth,
    Quarter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `exp(-i · sign · φ · P)` with `φ = π/8` or `π/4`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rotation {
    pub product: PauliProduct,
    pub angle: Angle,
    pub sign: Sign,
}

impl Rotation {
    pub fn eighth(product: PauliProduct, sign: Sign) -> Self {
        Rotation { product, angle: Angle::Eighth, sign }
    }

    pub fn quarter(product: PauliProduct, sign: Sign) -> Self {
        Rotation { product, angle: Angle::Quarter, sign }
    }
}

/// Rotations with pairwise-disjoint supports, executed as one step.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TLayer {
    rotations: Vec<Rotation>,
}

impl TLayer {
    /// Checks disjointness and that every rotation is a π/8 rotation. `index`
    /// is only used for error reporting.
    pub fn new(rotations: Vec<Rotation>, index: usize) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for rot in &rotations {
            if rot.angle != Angle::Eighth {
                return Err(Error::NonEighthAngle { layer: index });
            }
            for q in rot.product.qubits() {
                if !seen.insert(q) {
                    return Err(Error::OverlappingSupports { layer: index, qubit: q });
                }
            }
        }
        Ok(TLayer { rotations })
    }

    pub fn rotations(&self) -> &[Rotation] {
        &self.rotations
    }

    pub fn is_empty(&self) -> bool {
        self.rotations.is_empty()
    }

    /// Number of active qubits, `|S_j|`.
    pub fn active_count(&self) -> usize {
        self.rotations.iter().map(|r| r.product.weight()).sum()
    }

    pub fn active_qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.rotations.iter().flat_map(|r| r.product.qubits())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    name: String,
    num_qubits: usize,
    layers: Vec<TLayer>,
    final_measurements: Option<Vec<PauliProduct>>,
}

impl Circuit {
    pub fn new(
        name: impl Into<String>,
        num_qubits: usize,
        layers: Vec<TLayer>,
        final_measurements: Option<Vec<PauliProduct>>,
    ) -> Result<Self> {
        let check = |p: &PauliProduct| {
            let q = p.max_qubit();
            if q >= num_qubits {
                Err(Error::QubitOutOfRange { index: q, num_qubits })
            } else {
                Ok(())
            }
        };
        for layer in &layers {
            for rot in layer.rotations() {
                check(&rot.product)?;
            }
        }
        for m in final_measurements.iter().flatten() {
            check(m)?;
        }
        Ok(Circuit {
            name: name.into(),
            num_qubits,
            layers,
            final_measurements,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn layers(&self) -> &[TLayer] {
        &self.layers
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn final_measurements(&self) -> Option<&[PauliProduct]> {
        self.final_measurements.as_deref()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// `S_j`: the qubits touched by layer `j`.
    pub fn active_set(&self, j: usize) -> Result<BTreeSet<usize>> {
        let layer = self.layers.get(j).ok_or(Error::LayerOutOfRange {
            index: j,
            num_layers: self.layers.len(),
        })?;
        Ok(layer.active_qubits().collect())
    }

    /// `(N_T, S_max)` with `N_T = Σ_j |S_j|` and `S_max = max_j |S_j|`.
    pub fn totals(&self) -> (usize, usize) {
        self.layers.iter().fold((0, 0), |(n_t, s_max), layer| {
            let s = layer.active_count();
            (n_t + s, s_max.max(s))
        })
    }

    pub fn profile(&self, q: usize) -> Result<QubitProfile> {
        if q >= self.num_qubits {
            return Err(Error::QubitOutOfRange { index: q, num_qubits: self.num_qubits });
        }
        let mut prof = QubitProfile::default();
        for layer in &self.layers {
            for rot in layer.rotations() {
                let local = rot.product.get(q);
                if local != Pauli::I {
                    prof.record(local, rot.product.weight() > 1);
                    break;
                }
            }
        }
        Ok(prof)
    }

    /// Profiles of every qubit in one pass over the layers.
    pub fn profiles(&self) -> Vec<QubitProfile> {
        let mut out = vec![QubitProfile::default(); self.num_qubits];
        for layer in &self.layers {
            for rot in layer.rotations() {
                let multi = rot.product.weight() > 1;
                for (q, p) in rot.product.iter() {
                    out[q].record(p, multi);
                }
            }
        }
        out
    }

    /// For every qubit, the indices of the layers in which it is active.
    pub fn activity(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_qubits];
        for (j, layer) in self.layers.iter().enumerate() {
            for q in layer.active_qubits() {
                out[q].push(j);
            }
        }
        out
    }
}

/// Per-qubit non-Clifford statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct QubitProfile {
    pub t_s: usize,
    pub t_m: usize,
    pub y_s: usize,
    pub y_m: usize,
    pub deg_int: usize,
    pub nu: usize,
    pub y_total: usize,
}

impl QubitProfile {
    // Layers are disjoint, so each rotation touching q is one active layer.
    fn record(&mut self, local: Pauli, multi: bool) {
        let is_y = local == Pauli::Y;
        if multi {
            self.t_m += 1;
            self.deg_int += 1;
            self.y_m += is_y as usize;
        } else {
            self.t_s += 1;
            self.y_s += is_y as usize;
        }
        self.y_total += is_y as usize;
        self.nu += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prod(entries: &[(usize, Pauli)]) -> PauliProduct {
        PauliProduct::new(entries.iter().copied()).unwrap()
    }

    fn layer(rots: &[&[(usize, Pauli)]]) -> TLayer {
        TLayer::new(rots.iter().map(|e| Rotation::eighth(prod(e), Sign::Plus)).collect(), 0)
            .unwrap()
    }

    #[test]
    fn active_sets() {
        use Pauli::*;
        let c = Circuit::new(
            "a",
            4,
            vec![
                layer(&[&[(0, X), (2, Z)]]),
                TLayer::default(),
                layer(&[&[(0, X)], &[(1, Y)], &[(3, Z)]]),
            ],
            None,
        )
        .unwrap();
        assert_eq!(c.active_set(0).unwrap(), BTreeSet::from([0, 2]));
        assert!(c.active_set(1).unwrap().is_empty());
        assert_eq!(c.active_set(2).unwrap(), BTreeSet::from([0, 1, 3]));
        assert!(matches!(c.active_set(3), Err(Error::LayerOutOfRange { .. })));
    }

    #[test]
    fn totals_sum_and_max() {
        use Pauli::*;
        let c = Circuit::new(
            "t",
            4,
            vec![
                layer(&[&[(0, X), (2, Z)]]),
                layer(&[&[(1, Z)]]),
                layer(&[&[(0, X), (1, Y)], &[(3, Z)]]),
            ],
            None,
        )
        .unwrap();
        assert_eq!(c.totals(), (6, 3));
        assert_eq!(Circuit::new("e", 3, vec![], None).unwrap().totals(), (0, 0));
    }

    #[test]
    fn profile_hand_count() {
        use Pauli::*;
        let c = Circuit::new(
            "p",
            2,
            vec![
                layer(&[&[(0, Y)]]),
                layer(&[&[(0, X), (1, Z)]]),
                layer(&[&[(0, Y), (1, X)]]),
            ],
            None,
        )
        .unwrap();
        let p = c.profile(0).unwrap();
        assert_eq!(
            p,
            QubitProfile { t_s: 1, t_m: 2, y_s: 1, y_m: 1, deg_int: 2, nu: 3, y_total: 2 }
        );
        assert_eq!(c.profiles()[0], p);
        assert_eq!(c.profiles()[1], c.profile(1).unwrap());
    }

    #[test]
    fn shared_edge_of_weight_two() {
        // Qubits 1 and 2 share two multi-qubit rotations; qubit 1 also has a
        // single-qubit Y rotation.
        use Pauli::*;
        let c = Circuit::new(
            "fig5",
            4,
            vec![
                layer(&[&[(1, Y)], &[(0, Z)]]),
                layer(&[&[(1, X), (2, Z)]]),
                layer(&[&[(1, Z), (2, Y)], &[(3, X)]]),
            ],
            None,
        )
        .unwrap();
        let p = c.profile(1).unwrap();
        assert_eq!(p.t_m, 2);
        assert_eq!(p.deg_int, 2);
        assert_eq!(p.y_s, 1);
    }

    #[test]
    fn idle_qubit_profiles_to_zero() {
        use Pauli::*;
        let c = Circuit::new("i", 3, vec![layer(&[&[(0, Z)]])], None).unwrap();
        assert_eq!(c.profile(2).unwrap(), QubitProfile::default());
        assert!(matches!(c.profile(3), Err(Error::QubitOutOfRange { .. })));
    }

    #[test]
    fn layers_reject_overlap_and_quarter() {
        use Pauli::*;
        let rots = vec![
            Rotation::eighth(prod(&[(0, X)]), Sign::Plus),
            Rotation::eighth(prod(&[(0, Z)]), Sign::Plus),
        ];
        assert!(matches!(TLayer::new(rots, 4), Err(Error::OverlappingSupports { layer: 4, qubit: 0 })));
        let rots = vec![Rotation::quarter(prod(&[(0, X)]), Sign::Plus)];
        assert!(matches!(TLayer::new(rots, 0), Err(Error::NonEighthAngle { .. })));
    }

    #[test]
    fn product_commutation() {
        use Pauli::*;
        assert!(prod(&[(0, X), (1, X)]).commutes_with(&prod(&[(0, Z), (1, Z)])));
        assert!(!prod(&[(0, X)]).commutes_with(&prod(&[(0, Y)])));
        assert!(prod(&[(0, X)]).commutes_with(&prod(&[(1, Y)])));
        assert!(PauliProduct::new([(0, I)]).is_err());
    }
}
