//! Clifford+T gate lists to layered π/8 rotations.
//!
//! Every gate becomes a short sequence of `exp(-i·s·φ·P)` rotations. The π/4
//! rotations are then pushed to the end of the program: passing one across a
//! π/8 rotation conjugates that rotation's Pauli, so the program becomes a
//! list of π/8 rotations followed by one Clifford, and the Clifford is folded
//! into the final Z measurements.

mod gates;
pub mod oracle;

use crate::circuit::{Angle, Circuit, Pauli, PauliProduct, Rotation, Sign, TLayer};
use crate::{Error, Result};

pub use gates::{parse_gates, Gate, GateList};

/// Reported alongside any circuit produced by [`layerize`].
pub const LAYERIZER: &str = "greedy-v1";

fn one(q: usize, p: Pauli) -> PauliProduct {
    PauliProduct::single(q, p).expect("non-identity")
}

pub fn gate_rotations(gate: &Gate) -> Vec<Rotation> {
    use Pauli::{X, Z};
    match *gate {
        Gate::T(q) => vec![Rotation::eighth(one(q, Z), Sign::Plus)],
        Gate::Tdg(q) => vec![Rotation::eighth(one(q, Z), Sign::Minus)],
        Gate::S(q) => vec![Rotation::quarter(one(q, Z), Sign::Plus)],
        Gate::Sdg(q) => vec![Rotation::quarter(one(q, Z), Sign::Minus)],
        Gate::H(q) => vec![
            Rotation::quarter(one(q, Z), Sign::Plus),
            Rotation::quarter(one(q, X), Sign::Plus),
            Rotation::quarter(one(q, Z), Sign::Plus),
        ],
        Gate::Cnot { control, target } => vec![
            Rotation::quarter(one(control, Z), Sign::Plus),
            Rotation::quarter(one(target, X), Sign::Plus),
            Rotation::quarter(
                PauliProduct::new([(control, Z), (target, X)]).expect("non-identity"),
                Sign::Minus,
            ),
        ],
        Gate::Ppr(ref rot) => vec![rot.clone()],
    }
}

pub fn to_rotations(gates: &GateList) -> Vec<Rotation> {
    gates.gates().iter().flat_map(gate_rotations).collect()
}

/// Dense Pauli string with an `i^phase` prefactor.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Frame {
    phase: u8,
    ops: Vec<Pauli>,
}

impl Frame {
    fn generator(n: usize, q: usize, p: Pauli) -> Frame {
        let mut ops = vec![Pauli::I; n];
        ops[q] = p;
        Frame { phase: 0, ops }
    }

    fn mul(&self, other: &Frame) -> Frame {
        let mut phase = self.phase + other.phase;
        let ops = self
            .ops
            .iter()
            .zip(&other.ops)
            .map(|(&a, &b)| {
                let (k, p) = a.mul_phase(b);
                phase += k;
                p
            })
            .collect();
        Frame { phase: phase % 4, ops }
    }

    fn signed(&self) -> (Sign, PauliProduct) {
        let sign = match self.phase {
            0 => Sign::Plus,
            2 => Sign::Minus,
            _ => unreachable!("conjugated Hermitian Pauli has a real sign"),
        };
        let product = PauliProduct::new(self.ops.iter().copied().enumerate())
            .expect("conjugation never yields the identity");
        (sign, product)
    }
}

/// Tracks `C† G C` for every generator `G ∈ {X_q, Z_q}` of the accumulated
/// Clifford `C`.
struct Tableau {
    x: Vec<Frame>,
    z: Vec<Frame>,
}

impl Tableau {
    fn new(n: usize) -> Self {
        Tableau {
            x: (0..n).map(|q| Frame::generator(n, q, Pauli::X)).collect(),
            z: (0..n).map(|q| Frame::generator(n, q, Pauli::Z)).collect(),
        }
    }

    fn image(&self, p: &PauliProduct) -> Frame {
        let n = self.x.len();
        let mut acc = Frame { phase: 0, ops: vec![Pauli::I; n] };
        for (q, local) in p.iter() {
            let term = match local {
                Pauli::X => self.x[q].clone(),
                Pauli::Z => self.z[q].clone(),
                Pauli::Y => {
                    let mut t = self.x[q].mul(&self.z[q]);
                    t.phase = (t.phase + 1) % 4;
                    t
                }
                Pauli::I => continue,
            };
            acc = acc.mul(&term);
        }
        acc
    }

    /// `C ← exp(-i·s·π/4·P) · C`. Generators anticommuting with `P` pick up
    /// `i·s·f(P)` on the left.
    fn push_quarter(&mut self, p: &PauliProduct, sign: Sign) {
        let mut fp = self.image(p);
        fp.phase = (fp.phase + if sign == Sign::Plus { 1 } else { 3 }) % 4;
        for (q, local) in p.iter() {
            if matches!(local, Pauli::Y | Pauli::Z) {
                self.x[q] = fp.mul(&self.x[q]);
            }
            if matches!(local, Pauli::X | Pauli::Y) {
                self.z[q] = fp.mul(&self.z[q]);
            }
        }
    }
}

/// Output of [`commute_cliffords`]: the π/8 circuit plus everything needed to
/// rebuild the input unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutedCircuit {
    pub circuit: Circuit,
    /// π/8 rotations in program order (the circuit's layers, flattened).
    pub rotations: Vec<Rotation>,
    /// The absorbed π/4 rotations, in their original order.
    pub cliffords: Vec<Rotation>,
    /// Signs of the conjugated final Z measurements.
    pub measurement_signs: Vec<Sign>,
}

pub fn commute_cliffords(num_qubits: usize, rotations: &[Rotation]) -> Result<CommutedCircuit> {
    for rot in rotations {
        let q = rot.product.max_qubit();
        if q >= num_qubits {
            return Err(Error::QubitOutOfRange { index: q, num_qubits });
        }
    }
    let mut tableau = Tableau::new(num_qubits);
    let mut eighths = Vec::new();
    let mut cliffords = Vec::new();
    for rot in rotations {
        match rot.angle {
            Angle::Quarter => {
                tableau.push_quarter(&rot.product, rot.sign);
                cliffords.push(rot.clone());
            }
            Angle::Eighth => {
                let (s, product) = tableau.image(&rot.product).signed();
                let sign = if s == Sign::Plus { rot.sign } else { rot.sign.flip() };
                eighths.push(Rotation::eighth(product, sign));
            }
        }
    }
    let (measurement_signs, finals): (Vec<_>, Vec<_>) =
        tableau.z.iter().map(Frame::signed).unzip();
    let layers = layerize(&eighths)?;
    let circuit = Circuit::new("transpiled", num_qubits, layers, Some(finals))?;
    Ok(CommutedCircuit { circuit, rotations: eighths, cliffords, measurement_signs })
}

pub fn transpile(gates: &GateList) -> Result<CommutedCircuit> {
    commute_cliffords(gates.num_qubits(), &to_rotations(gates))
}

/// Greedy in-order packing: a rotation joins the newest layer when it is
/// disjoint from and commutes with everything already there.
pub fn layerize(rotations: &[Rotation]) -> Result<Vec<TLayer>> {
    let mut groups: Vec<Vec<Rotation>> = Vec::new();
    for rot in rotations {
        if rot.angle != Angle::Eighth {
            return Err(Error::NonEighthAngle { layer: groups.len().saturating_sub(1) });
        }
        let fits = groups.last().is_some_and(|g| {
            g.iter().all(|o| !o.product.overlaps(&rot.product) && o.product.commutes_with(&rot.product))
        });
        if fits {
            groups.last_mut().expect("non-empty").push(rot.clone());
        } else {
            groups.push(vec![rot.clone()]);
        }
    }
    groups.into_iter().enumerate().map(|(j, g)| TLayer::new(g, j)).collect()
}
