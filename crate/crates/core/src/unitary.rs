//! Dense matrices for small circuits, used as verification oracles.

use std::ops::Mul;

use num_complex::Complex64;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::pauli::{Phase, PauliString};
use crate::sim::statevector::{apply_gate, apply_pauli};

pub const MAX_UNITARY_QUBITS: usize = 12;

/// Square complex matrix, column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major nested rows.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "matrix must be square");
            for (c, &v) in row.iter().enumerate() {
                m.set(r, c, v);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[col * self.dim + row]
    }

    pub fn set(&mut self, row: usize, col: usize, v: Complex64) {
        self.data[col * self.dim + row] = v;
    }

    pub fn column(&self, col: usize) -> &[Complex64] {
        &self.data[col * self.dim..(col + 1) * self.dim]
    }

    fn column_mut(&mut self, col: usize) -> &mut [Complex64] {
        &mut self.data[col * self.dim..(col + 1) * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                m.set(c, r, self.get(r, c).conj());
            }
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// `self ⊗ other`, with `self` on the more significant index bits.
    pub fn kron(&self, other: &DenseMatrix) -> Self {
        let d = self.dim * other.dim;
        let mut m = Self::zeros(d);
        for r1 in 0..self.dim {
            for c1 in 0..self.dim {
                let a = self.get(r1, c1);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for r2 in 0..other.dim {
                    for c2 in 0..other.dim {
                        m.set(r1 * other.dim + r2, c1 * other.dim + c2, a * other.get(r2, c2));
                    }
                }
            }
        }
        m
    }

    /// `tr(self† · other) / dim`; unit magnitude iff the two unitaries differ
    /// only by a global phase, in which case it is that phase.
    pub fn normalized_overlap(&self, other: &DenseMatrix) -> Complex64 {
        assert_eq!(self.dim, other.dim);
        let s: Complex64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum();
        s / self.dim as f64
    }

    /// True when `self == c·other` for some unit scalar `c`, within `tol`.
    pub fn equal_up_to_phase(&self, other: &DenseMatrix, tol: f64) -> bool {
        self.dim == other.dim && (self.normalized_overlap(other).norm() - 1.0).abs() <= tol
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;

    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = DenseMatrix::zeros(n);
        for c in 0..n {
            for k in 0..n {
                let b = rhs.get(k, c);
                if b == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let col = &self.data[k * n..(k + 1) * n];
                let dst = &mut out.data[c * n..(c + 1) * n];
                for (d, a) in dst.iter_mut().zip(col) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

fn check_capacity(n: usize) -> Result<()> {
    if n > MAX_UNITARY_QUBITS {
        return Err(Error::Capacity(format!(
            "dense unitary limited to {MAX_UNITARY_QUBITS} qubits, got {n}"
        )));
    }
    Ok(())
}

/// The exact `2^n × 2^n` unitary of a measurement-free circuit.
pub fn unitary_of(circuit: &Circuit) -> Result<DenseMatrix> {
    if circuit.has_measurements() {
        return Err(Error::NonUnitary(format!(
            "circuit {:?} contains measurements",
            circuit.label()
        )));
    }
    let n = circuit.num_qubits();
    check_capacity(n)?;
    let dim = 1usize << n;
    let mut m = DenseMatrix::identity(dim);
    for col in 0..dim {
        let v = m.column_mut(col);
        for g in circuit.gates() {
            apply_gate(v, &g.kind, &g.qubits, 0, false)?;
        }
    }
    Ok(m)
}

fn phase_value(p: Phase) -> Complex64 {
    match p {
        Phase::PlusOne => Complex64::new(1.0, 0.0),
        Phase::PlusI => Complex64::new(0.0, 1.0),
        Phase::MinusOne => Complex64::new(-1.0, 0.0),
        Phase::MinusI => Complex64::new(0.0, -1.0),
    }
}

/// Dense matrix of a Pauli string including its phase.
pub fn pauli_to_matrix(p: &PauliString) -> Result<DenseMatrix> {
    let n = p.num_qubits();
    check_capacity(n)?;
    let dim = 1usize << n;
    let phase = phase_value(p.phase());
    let mut m = DenseMatrix::identity(dim);
    for col in 0..dim {
        let v = m.column_mut(col);
        for (q, op) in p.ops().into_iter().enumerate() {
            apply_pauli(v, q, op, false);
        }
        v.iter_mut().for_each(|a| *a *= phase);
    }
    Ok(m)
}
