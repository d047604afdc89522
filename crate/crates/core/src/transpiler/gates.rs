//! Line-based Clifford+T gate lists.
//!
//! ```text
//! # optional header; otherwise the qubit count is max index + 1
//! QUBITS 3
//! H 0
//! CNOT 0 1
//! T 1
//! PPR pi/8 + X0 Z2
//! ```

use std::fmt;

use crate::circuit::{Angle, Pauli, PauliProduct, Rotation, Sign};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gate {
    H(usize),
    S(usize),
    Sdg(usize),
    T(usize),
    Tdg(usize),
    Cnot { control: usize, target: usize },
    Ppr(Rotation),
}

impl Gate {
    pub fn max_qubit(&self) -> usize {
        match self {
            Gate::H(q) | Gate::S(q) | Gate::Sdg(q) | Gate::T(q) | Gate::Tdg(q) => *q,
            Gate::Cnot { control, target } => (*control).max(*target),
            Gate::Ppr(rot) => rot.product.max_qubit(),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::H(q) => write!(f, "H {q}"),
            Gate::S(q) => write!(f, "S {q}"),
            Gate::Sdg(q) => write!(f, "SDG {q}"),
            Gate::T(q) => write!(f, "T {q}"),
            Gate::Tdg(q) => write!(f, "TDG {q}"),
            Gate::Cnot { control, target } => write!(f, "CNOT {control} {target}"),
            Gate::Ppr(rot) => {
                let angle = match rot.angle {
                    Angle::Eighth => "pi/8",
                    Angle::Quarter => "pi/4",
                };
                let sign = match rot.sign {
                    Sign::Plus => '+',
                    Sign::Minus => '-',
                };
                write!(f, "PPR {angle} {sign}")?;
                for (q, p) in rot.product.iter() {
                    write!(f, " {p}{q}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateList {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl GateList {
    pub fn new(num_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        for g in &gates {
            if let Gate::Cnot { control, target } = g {
                if control == target {
                    return Err(Error::InvalidParams("CNOT needs distinct qubits".into()));
                }
            }
            let q = g.max_qubit();
            if q >= num_qubits {
                return Err(Error::QubitOutOfRange { index: q, num_qubits });
            }
        }
        Ok(GateList { num_qubits, gates })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }
}

impl fmt::Display for GateList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QUBITS {}", self.num_qubits)?;
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

fn syntax(line: usize, message: impl Into<String>) -> Error {
    Error::GateSyntax { line, message: message.into() }
}

fn index(line: usize, tok: &str) -> Result<usize> {
    tok.parse().map_err(|_| syntax(line, format!("bad qubit index {tok:?}")))
}

fn parse_ppr(line: usize, args: &[&str]) -> Result<Gate> {
    let [angle, sign, terms @ ..] = args else {
        return Err(syntax(line, "PPR needs an angle, a sign and at least one term"));
    };
    let angle = match *angle {
        "pi/8" => Angle::Eighth,
        "pi/4" => Angle::Quarter,
        other => return Err(syntax(line, format!("unknown angle {other:?}"))),
    };
    let sign = match *sign {
        "+" => Sign::Plus,
        "-" => Sign::Minus,
        other => return Err(syntax(line, format!("unknown sign {other:?}"))),
    };
    if terms.is_empty() {
        return Err(syntax(line, "PPR needs at least one term"));
    }
    let mut entries = Vec::with_capacity(terms.len());
    for term in terms {
        let mut chars = term.chars();
        let pauli = chars
            .next()
            .and_then(Pauli::from_char)
            .filter(|p| *p != Pauli::I)
            .ok_or_else(|| syntax(line, format!("bad Pauli term {term:?}")))?;
        let q = index(line, chars.as_str())?;
        if entries.iter().any(|&(seen, _)| seen == q) {
            return Err(syntax(line, format!("qubit {q} repeated in PPR")));
        }
        entries.push((q, pauli));
    }
    let product = PauliProduct::new(entries)?;
    Ok(Gate::Ppr(Rotation { product, angle, sign }))
}

pub fn parse_gates(text: &str) -> Result<GateList> {
    let mut declared = None;
    let mut gates = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        let mnemonic = toks[0].to_ascii_uppercase();
        let args = &toks[1..];
        let single = |make: fn(usize) -> Gate| -> Result<Gate> {
            match args {
                [q] => Ok(make(index(line, q)?)),
                _ => Err(syntax(line, format!("{mnemonic} takes exactly one qubit"))),
            }
        };
        let gate = match mnemonic.as_str() {
            "QUBITS" => {
                if declared.is_some() || !gates.is_empty() {
                    return Err(syntax(line, "QUBITS must be the first statement"));
                }
                match args {
                    [n] => declared = Some(index(line, n)?),
                    _ => return Err(syntax(line, "QUBITS takes one count")),
                }
                continue;
            }
            "H" => single(Gate::H)?,
            "S" => single(Gate::S)?,
            "SDG" => single(Gate::Sdg)?,
            "T" => single(Gate::T)?,
            "TDG" => single(Gate::Tdg)?,
            "CNOT" | "CX" => match args {
                [c, t] => {
                    let (control, target) = (index(line, c)?, index(line, t)?);
                    if control == target {
                        return Err(syntax(line, "distinct qubits required"));
                    }
                    Gate::Cnot { control, target }
                }
                _ => return Err(syntax(line, "CNOT takes two qubits")),
            },
            "PPR" => parse_ppr(line, args)?,
            other => return Err(syntax(line, format!("unknown mnemonic {other:?}"))),
        };
        if let Some(n) = declared {
            let q = gate.max_qubit();
            if q >= n {
                return Err(Error::QubitOutOfRange { index: q, num_qubits: n });
            }
        }
        gates.push(gate);
    }
    let num_qubits =
        declared.unwrap_or_else(|| gates.iter().map(|g| g.max_qubit() + 1).max().unwrap_or(0));
    GateList::new(num_qubits, gates)
}
