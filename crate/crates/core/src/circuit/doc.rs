//! JSON circuit document.
//!
//! ```json
//! { "name": "demo", "num_qubits": 2,
//!   "layers": [[{ "paulis": { "0": "Z" }, "angle": "pi/8", "sign": "+" }]],
//!   "final_measurements": [{ "0": "Z" }, { "1": "Z" }] }
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Circuit, Pauli, PauliProduct, Rotation, Sign, TLayer};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
enum LocalPauli {
    X,
    Y,
    Z,
}

impl From<LocalPauli> for Pauli {
    fn from(p: LocalPauli) -> Pauli {
        match p {
            LocalPauli::X => Pauli::X,
            LocalPauli::Y => Pauli::Y,
            LocalPauli::Z => Pauli::Z,
        }
    }
}

fn local(p: Pauli) -> LocalPauli {
    match p {
        Pauli::X => LocalPauli::X,
        Pauli::Y => LocalPauli::Y,
        Pauli::Z => LocalPauli::Z,
        Pauli::I => unreachable!("stored products never hold identity"),
    }
}

type PauliMap = BTreeMap<usize, LocalPauli>;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RotationDoc {
    paulis: PauliMap,
    angle: String,
    sign: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitDoc {
    name: String,
    num_qubits: usize,
    layers: Vec<Vec<RotationDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    final_measurements: Option<Vec<PauliMap>>,
}

fn product_from_map(map: PauliMap) -> Result<PauliProduct> {
    PauliProduct::new(map.into_iter().map(|(q, p)| (q, p.into())))
}

fn map_from_product(p: &PauliProduct) -> PauliMap {
    p.iter().map(|(q, p)| (q, local(p))).collect()
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let doc: CircuitDoc =
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    let mut layers = Vec::with_capacity(doc.layers.len());
    for (j, rots) in doc.layers.into_iter().enumerate() {
        let mut parsed = Vec::with_capacity(rots.len());
        for rot in rots {
            match rot.angle.as_str() {
                "pi/8" => {}
                "pi/4" => return Err(Error::NonEighthAngle { layer: j }),
                other => return Err(Error::Malformed(format!("unknown angle {other:?}"))),
            }
            let sign = match rot.sign.as_str() {
                "+" => Sign::Plus,
                "-" => Sign::Minus,
                other => return Err(Error::Malformed(format!("unknown sign {other:?}"))),
            };
            let product = product_from_map(rot.paulis)
                .map_err(|_| Error::Malformed(format!("empty rotation in layer {j}")))?;
            parsed.push(Rotation::eighth(product, sign));
        }
        layers.push(TLayer::new(parsed, j)?);
    }
    let finals = doc
        .final_measurements
        .map(|ms| {
            ms.into_iter()
                .map(|m| {
                    product_from_map(m)
                        .map_err(|_| Error::Malformed("empty final measurement".into()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    Circuit::new(doc.name, doc.num_qubits, layers, finals)
}

pub fn to_document(circuit: &Circuit) -> String {
    let doc = CircuitDoc {
        name: circuit.name.clone(),
        num_qubits: circuit.num_qubits,
        layers: circuit
            .layers
            .iter()
            .map(|layer| {
                layer
                    .rotations()
                    .iter()
                    .map(|r| RotationDoc {
                        paulis: map_from_product(&r.product),
                        angle: "pi/8".into(),
                        sign: match r.sign {
                            Sign::Plus => "+".into(),
                            Sign::Minus => "-".into(),
                        },
                    })
                    .collect()
            })
            .collect(),
        final_measurements: circuit
            .final_measurements
            .as_ref()
            .map(|ms| ms.iter().map(map_from_product).collect()),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("document serializes");
    out.push('\n');
    out
}
