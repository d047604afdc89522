//! Dense unitaries for up to four qubits. Qubit 0 is the least significant
//! bit of the basis index.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_8};

use num_complex::Complex64;

use super::{CommutedCircuit, Gate, GateList};
use crate::circuit::{Angle, Circuit, Pauli, PauliProduct, Rotation};
use crate::{Error, Result};

pub const MAX_QUBITS: usize = 4;

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Matrix { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

fn check(num_qubits: usize) -> Result<usize> {
    if num_qubits > MAX_QUBITS {
        return Err(Error::OracleTooLarge(num_qubits));
    }
    Ok(1 << num_qubits)
}

pub fn pauli_matrix(product: &PauliProduct, num_qubits: usize) -> Result<Matrix> {
    let dim = check(num_qubits)?;
    let mut m = Matrix::zeros(dim);
    for col in 0..dim {
        let mut row = col;
        let mut amp = Complex64::new(1.0, 0.0);
        for (q, p) in product.iter() {
            let bit = (col >> q) & 1;
            let parity = if bit == 1 { -1.0 } else { 1.0 };
            match p {
                Pauli::I => {}
                Pauli::X => row ^= 1 << q,
                Pauli::Z => amp *= parity,
                Pauli::Y => {
                    row ^= 1 << q;
                    amp *= Complex64::new(0.0, parity);
                }
            }
        }
        m.set(row, col, amp);
    }
    Ok(m)
}

/// `cos φ · I − i·s·sin φ · P`.
pub fn rotation_matrix(rot: &Rotation, num_qubits: usize) -> Result<Matrix> {
    let dim = check(num_qubits)?;
    let phi = match rot.angle {
        Angle::Eighth => FRAC_PI_8,
        Angle::Quarter => FRAC_PI_4,
    };
    let p = pauli_matrix(&rot.product, num_qubits)?;
    let coeff = Complex64::new(0.0, -rot.sign.as_f64() * phi.sin());
    let mut m = Matrix::zeros(dim);
    for i in 0..dim * dim {
        m.data[i] = coeff * p.data[i];
    }
    for i in 0..dim {
        m.data[i * dim + i] += phi.cos();
    }
    Ok(m)
}

fn single_qubit(u: [[Complex64; 2]; 2], q: usize, num_qubits: usize) -> Result<Matrix> {
    let dim = check(num_qubits)?;
    let mut m = Matrix::zeros(dim);
    for col in 0..dim {
        let b = (col >> q) & 1;
        for (a, urow) in u.iter().enumerate() {
            let row = (col & !(1 << q)) | (a << q);
            m.set(row, col, urow[b]);
        }
    }
    Ok(m)
}

/// The textbook matrix of a gate, built without going through rotations.
pub fn gate_matrix(gate: &Gate, num_qubits: usize) -> Result<Matrix> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    match *gate {
        Gate::H(q) => single_qubit([[h, h], [h, -h]], q, num_qubits),
        Gate::S(q) => single_qubit([[one, zero], [zero, Complex64::i()]], q, num_qubits),
        Gate::Sdg(q) => single_qubit([[one, zero], [zero, -Complex64::i()]], q, num_qubits),
        Gate::T(q) => single_qubit([[one, zero], [zero, Complex64::from_polar(1.0, FRAC_PI_4)]], q, num_qubits),
        Gate::Tdg(q) => {
            single_qubit([[one, zero], [zero, Complex64::from_polar(1.0, -FRAC_PI_4)]], q, num_qubits)
        }
        Gate::Cnot { control, target } => {
            let dim = check(num_qubits)?;
            let mut m = Matrix::zeros(dim);
            for col in 0..dim {
                let row = if (col >> control) & 1 == 1 { col ^ (1 << target) } else { col };
                m.set(row, col, one);
            }
            Ok(m)
        }
        Gate::Ppr(ref rot) => rotation_matrix(rot, num_qubits),
    }
}

pub fn unitary_of_gates(gates: &GateList) -> Result<Matrix> {
    let n = gates.num_qubits();
    let mut u = Matrix::identity(check(n)?);
    for g in gates.gates() {
        u = gate_matrix(g, n)?.mul(&u);
    }
    Ok(u)
}

/// Product of rotations applied left to right in time (first rotation acts
/// first).
pub fn unitary_of_rotations(rotations: &[Rotation], num_qubits: usize) -> Result<Matrix> {
    let mut u = Matrix::identity(check(num_qubits)?);
    for r in rotations {
        u = rotation_matrix(r, num_qubits)?.mul(&u);
    }
    Ok(u)
}

/// Layers of a π/8 circuit, ignoring its measurements.
pub fn unitary_of_circuit(circuit: &Circuit) -> Result<Matrix> {
    let rots: Vec<Rotation> =
        circuit.layers().iter().flat_map(|l| l.rotations().iter().cloned()).collect();
    unitary_of_rotations(&rots, circuit.num_qubits())
}

/// The π/8 layers followed by the absorbed Clifford.
pub fn unitary_of_commuted(cc: &CommutedCircuit) -> Result<Matrix> {
    let n = cc.circuit.num_qubits();
    let body = unitary_of_circuit(&cc.circuit)?;
    Ok(unitary_of_rotations(&cc.cliffords, n)?.mul(&body))
}

/// Compares `a` and `b` after removing the global phase fixed by `b`'s
/// largest entry.
pub fn equal_up_to_phase(a: &Matrix, b: &Matrix, tol: f64) -> bool {
    if a.dim != b.dim {
        return false;
    }
    let (k, pivot) = b
        .data
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
        .expect("non-empty matrix");
    if pivot.norm() < tol {
        return a.data.iter().all(|v| v.norm() <= tol);
    }
    let ratio = a.data[k] / pivot;
    if (ratio.norm() - 1.0).abs() > tol {
        return false;
    }
    a.data.iter().zip(&b.data).all(|(x, y)| (x - ratio * y).norm() <= tol)
}
