//! Pauli-string algebra in symplectic form.
//!
//! A string is stored as packed x- and z-bit words plus an exact phase
//! `i^k`. Qubit `q` carries `X` when only its x bit is set, `Z` when only its
//! z bit is set and the Hermitian `Y` when both are set, so `Y = i·X·Z`
//! holds on every qubit.

use std::fmt;
use std::ops::{Mul, Neg};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::circuit::{Circuit, GateKind};
use crate::error::{Error, Result};

/// Global phase `i^k` of a Pauli string.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Phase {
    #[default]
    PlusOne,
    PlusI,
    MinusOne,
    MinusI,
}

impl Phase {
    pub fn from_exponent(k: u8) -> Self {
        match k & 3 {
            0 => Phase::PlusOne,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    /// The `k` in `i^k`.
    pub fn exponent(self) -> u8 {
        match self {
            Phase::PlusOne => 0,
            Phase::PlusI => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    pub fn conj(self) -> Phase {
        Phase::from_exponent(4 - self.exponent())
    }

    pub fn is_real(self) -> bool {
        matches!(self, Phase::PlusOne | Phase::MinusOne)
    }

    fn prefix(self) -> &'static str {
        match self {
            Phase::PlusOne => "+",
            Phase::PlusI => "i",
            Phase::MinusOne => "-",
            Phase::MinusI => "-i",
        }
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for Phase {
    type Output = Phase;

    fn mul(self, other: Phase) -> Phase {
        Phase::from_exponent(self.exponent() + other.exponent())
    }
}

impl Neg for Phase {
    type Output = Phase;

    fn neg(self) -> Phase {
        self * Phase::MinusOne
    }
}

/// Single-qubit Pauli label.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
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

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' | '.' => Some(Pauli::I),
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

const WORD: usize = 64;

fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

/// Power of `i` picked up when multiplying single-qubit Paulis `(x1,z1)·(x2,z2)`.
fn product_exponent(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    let (x2i, z2i) = (x2 as i32, z2 as i32);
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2i - x2i,
        (true, false) => z2i * (2 * x2i - 1),
        (false, true) => x2i * (1 - 2 * z2i),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    num_qubits: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: Phase,
}

impl PauliString {
    pub fn identity(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            x: vec![0; words_for(num_qubits)],
            z: vec![0; words_for(num_qubits)],
            phase: Phase::PlusOne,
        }
    }

    /// A string with `pauli` on `qubit` and identity elsewhere.
    pub fn single(num_qubits: usize, qubit: usize, pauli: Pauli) -> Self {
        let mut p = Self::identity(num_qubits);
        p.set(qubit, pauli);
        p
    }

    pub fn from_paulis(ops: &[Pauli], phase: Phase) -> Self {
        let mut p = Self::identity(ops.len());
        for (q, &op) in ops.iter().enumerate() {
            p.set(q, op);
        }
        p.phase = phase;
        p
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        let (w, b) = (qubit / WORD, qubit % WORD);
        Pauli::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    pub fn set(&mut self, qubit: usize, pauli: Pauli) {
        assert!(qubit < self.num_qubits, "qubit {qubit} out of range");
        let (w, b) = (qubit / WORD, qubit % WORD);
        let (xb, zb) = pauli.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | ((xb as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((zb as u64) << b);
    }

    pub fn ops(&self) -> Vec<Pauli> {
        (0..self.num_qubits).map(|q| self.get(q)).collect()
    }

    /// Qubits carrying a non-identity factor, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.num_qubits)
            .filter(|&q| self.get(q) != Pauli::I)
            .collect()
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    /// Hermitian iff the phase is real, since every factor is Hermitian.
    pub fn is_hermitian(&self) -> bool {
        self.phase.is_real()
    }

    /// Same operator content, ignoring phase.
    pub fn same_ops(&self, other: &PauliString) -> bool {
        self.num_qubits == other.num_qubits && self.x == other.x && self.z == other.z
    }

    fn check_len(&self, other: &PauliString) -> Result<()> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::InputShape(format!(
                "Pauli strings act on {} and {} qubits",
                self.num_qubits, other.num_qubits
            )));
        }
        Ok(())
    }

    /// Group product `self · other` with exact phase.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        self.check_len(other)?;
        let mut exp = self.phase.exponent() as i32 + other.phase.exponent() as i32;
        for q in 0..self.num_qubits {
            let (x1, z1) = self.get(q).bits();
            let (x2, z2) = other.get(q).bits();
            exp += product_exponent(x1, z1, x2, z2);
        }
        Ok(PauliString {
            num_qubits: self.num_qubits,
            x: self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect(),
            z: self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect(),
            phase: Phase::from_exponent(exp.rem_euclid(4) as u8),
        })
    }

    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_len(other)?;
        let parity: u32 = self
            .x
            .iter()
            .zip(&self.z)
            .zip(other.x.iter().zip(&other.z))
            .map(|((x1, z1), (x2, z2))| ((x1 & z2) ^ (z1 & x2)).count_ones())
            .sum();
        Ok(parity.is_multiple_of(2))
    }

    /// `C · self · C†` for a circuit `C` built from {H, S, S†, X, Y, Z, CX}.
    ///
    /// Gates are absorbed in circuit order, so the last gate acts outermost.
    pub fn conjugate_through(&self, circuit: &Circuit) -> Result<PauliString> {
        if circuit.num_qubits() != self.num_qubits {
            return Err(Error::InputShape(format!(
                "Pauli string has {} qubits, circuit has {}",
                self.num_qubits,
                circuit.num_qubits()
            )));
        }
        let mut p = self.clone();
        for gate in circuit.gates() {
            p = p.conjugate_gate(&gate.kind, &gate.qubits)?;
        }
        Ok(p)
    }

    fn conjugate_gate(&self, kind: &GateKind, qubits: &[usize]) -> Result<PauliString> {
        let n = self.num_qubits;
        // Images of X_q and Z_q for each qubit the gate touches.
        let images: Vec<(PauliString, PauliString)> = match kind {
            GateKind::CX => {
                let (c, t) = (qubits[0], qubits[1]);
                let mut xc = PauliString::single(n, c, Pauli::X);
                xc.set(t, Pauli::X);
                let mut zt = PauliString::single(n, t, Pauli::Z);
                zt.set(c, Pauli::Z);
                vec![
                    (xc, PauliString::single(n, c, Pauli::Z)),
                    (PauliString::single(n, t, Pauli::X), zt),
                ]
            }
            single => {
                let q = qubits[0];
                let x = |p: Pauli, ph: Phase| PauliString::single(n, q, p).with_phase(ph);
                let (ix, iz) = match single {
                    GateKind::H => (x(Pauli::Z, Phase::PlusOne), x(Pauli::X, Phase::PlusOne)),
                    GateKind::S => (x(Pauli::Y, Phase::PlusOne), x(Pauli::Z, Phase::PlusOne)),
                    GateKind::Sdg => (x(Pauli::Y, Phase::MinusOne), x(Pauli::Z, Phase::PlusOne)),
                    GateKind::X => (x(Pauli::X, Phase::PlusOne), x(Pauli::Z, Phase::MinusOne)),
                    GateKind::Y => (x(Pauli::X, Phase::MinusOne), x(Pauli::Z, Phase::MinusOne)),
                    GateKind::Z => (x(Pauli::X, Phase::MinusOne), x(Pauli::Z, Phase::PlusOne)),
                    other => {
                        return Err(Error::UnsupportedGate(format!(
                            "{} is outside the Clifford set {{H, S, Sdg, X, Y, Z, CX}}",
                            other.name()
                        )))
                    }
                };
                vec![(ix, iz)]
            }
        };

        // Factor the local part as i^{#Y} · Π X^x Z^z and map each generator.
        let mut rest = self.clone();
        let mut image = PauliString::identity(n);
        let mut y_count = 0u8;
        for (&q, (img_x, img_z)) in qubits.iter().zip(&images) {
            let (xb, zb) = self.get(q).bits();
            rest.set(q, Pauli::I);
            if xb && zb {
                y_count += 1;
            }
            if xb {
                image = image.mul(img_x)?;
            }
            if zb {
                image = image.mul(img_z)?;
            }
        }
        image.phase = image.phase * Phase::from_exponent(y_count);
        // `rest` is disjoint from the gate's support, so the product commutes.
        rest.mul(&image)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.phase.prefix())?;
        for q in 0..self.num_qubits {
            write!(f, "{}", self.get(q).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Accepts an optional phase prefix from {+, -, i, +i, -i} followed by
    /// one letter per qubit (qubit 0 first); `.` is an alias for `I`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("-i") {
            (Phase::MinusI, rest)
        } else if let Some(rest) = s.strip_prefix("+i") {
            (Phase::PlusI, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (Phase::PlusI, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (Phase::MinusOne, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (Phase::PlusOne, rest)
        } else {
            (Phase::PlusOne, s)
        };
        if body.is_empty() {
            return Err(Error::Parse(format!("empty Pauli string {s:?}")));
        }
        let ops = body
            .chars()
            .map(|c| {
                Pauli::from_char(c)
                    .ok_or_else(|| Error::Parse(format!("invalid Pauli letter {c:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliString::from_paulis(&ops, phase))
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
