//! Gate-list circuit representation and its JSON form.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::Pauli;

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    H,
    X,
    SX,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    RZ(f64),
    CX,
    CCX,
    /// Pauli on the second qubit, controlled by the first.
    ControlledPauli(Pauli),
    Measure,
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::CX | GateKind::ControlledPauli(_) => 2,
            GateKind::CCX => 3,
            _ => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::SX => "SX",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::S => "S",
            GateKind::Sdg => "SDG",
            GateKind::T => "T",
            GateKind::Tdg => "TDG",
            GateKind::RZ(_) => "RZ",
            GateKind::CX => "CX",
            GateKind::CCX => "CCX",
            GateKind::ControlledPauli(_) => "CPAULI",
            GateKind::Measure => "MEASURE",
        }
    }

    pub fn is_clifford(&self) -> bool {
        matches!(
            self,
            GateKind::H
                | GateKind::S
                | GateKind::Sdg
                | GateKind::X
                | GateKind::Y
                | GateKind::Z
                | GateKind::CX
        )
    }

    pub fn is_measure(&self) -> bool {
        matches!(self, GateKind::Measure)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    /// Classical bit written by a `Measure`.
    pub clbit: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Circuit {
    num_qubits: usize,
    num_clbits: usize,
    gates: Vec<Gate>,
    label: String,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_clbits: usize) -> Self {
        Self {
            num_qubits,
            num_clbits,
            gates: Vec::new(),
            label: String::new(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_clbits(&self) -> usize {
        self.num_clbits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Appends a gate after checking arity, index ranges and that no unitary
    /// lands on an already measured qubit.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        let name = gate.kind.name();
        if gate.qubits.len() != gate.kind.arity() {
            return Err(Error::Construction(format!(
                "{name} takes {} qubit(s), got {}",
                gate.kind.arity(),
                gate.qubits.len()
            )));
        }
        for (i, &q) in gate.qubits.iter().enumerate() {
            if q >= self.num_qubits {
                return Err(Error::Construction(format!(
                    "{name} on qubit {q} but the circuit has {} qubits",
                    self.num_qubits
                )));
            }
            if gate.qubits[..i].contains(&q) {
                return Err(Error::Construction(format!("{name} repeats qubit {q}")));
            }
        }
        match (&gate.kind, gate.clbit) {
            (GateKind::Measure, Some(c)) if c >= self.num_clbits => {
                return Err(Error::Construction(format!(
                    "measurement into clbit {c} but the circuit has {} clbits",
                    self.num_clbits
                )))
            }
            (GateKind::Measure, None) => {
                return Err(Error::Construction("measurement without a clbit".into()))
            }
            (GateKind::Measure, Some(_)) => {}
            (_, Some(_)) => {
                return Err(Error::Construction(format!("{name} cannot target a clbit")))
            }
            (_, None) => {
                if let Some(&q) = gate.qubits.iter().find(|&&q| self.is_measured(q)) {
                    return Err(Error::Construction(format!(
                        "{name} acts on qubit {q} after it was measured"
                    )));
                }
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    fn is_measured(&self, qubit: usize) -> bool {
        self.gates
            .iter()
            .any(|g| g.kind.is_measure() && g.qubits[0] == qubit)
    }

    fn add(&mut self, kind: GateKind, qubits: &[usize]) -> &mut Self {
        let gate = Gate {
            kind,
            qubits: qubits.to_vec(),
            clbit: None,
        };
        if let Err(e) = self.push(gate) {
            panic!("invalid gate: {e}");
        }
        self
    }

    pub fn h(&mut self, q: usize) -> &mut Self {
        self.add(GateKind::H, &[q])
    }
    pub fn x(&mut self, q: usize) -> &mut Self {
        self.add(GateKind::X, &[q])
    }
    pub fn sx(&mut self, q: usize) -> &mut Self {
        self.add(GateKind::SX, &[q])
    }
    pub fn y(&mut self, q: usize) -> &mut Self {
        self.add(GateKind::Y, &[q])
    }
    pub fn z(&mut self, q: usize) -> &mut Self {
        self.add(GateKind::Z, &[q])
    }
    pub fn s(&mut self, q: usize) -> &mut Self {
        self.add(GateKind::S, &[q])
    }
    pub fn sdg(&mut self, q: usize) -> &mut Self {
        self.add(GateKind::Sdg, &[q])
    }
    pub fn t(&mut self, q: usize) -> &mut Self {
        self.add(GateKind::T, &[q])
    }
    pub fn tdg(&mut self, q: usize) -> &mut Self {
        self.add(GateKind::Tdg, &[q])
    }
    pub fn rz(&mut self, theta: f64, q: usize) -> &mut Self {
        self.add(GateKind::RZ(theta), &[q])
    }
    pub fn cx(&mut self, control: usize, target: usize) -> &mut Self {
        self.add(GateKind::CX, &[control, target])
    }
    pub fn ccx(&mut self, c0: usize, c1: usize, target: usize) -> &mut Self {
        self.add(GateKind::CCX, &[c0, c1, target])
    }
    pub fn controlled_pauli(&mut self, pauli: Pauli, control: usize, target: usize) -> &mut Self {
        self.add(GateKind::ControlledPauli(pauli), &[control, target])
    }
    /// Applies a single-qubit Pauli gate; identity adds nothing.
    pub fn pauli(&mut self, pauli: Pauli, q: usize) -> &mut Self {
        match pauli {
            Pauli::I => self,
            Pauli::X => self.x(q),
            Pauli::Y => self.y(q),
            Pauli::Z => self.z(q),
        }
    }

    pub fn measure(&mut self, qubit: usize, clbit: usize) -> &mut Self {
        let gate = Gate {
            kind: GateKind::Measure,
            qubits: vec![qubit],
            clbit: Some(clbit),
        };
        if let Err(e) = self.push(gate) {
            panic!("invalid measurement: {e}");
        }
        self
    }

    /// Measures qubit `i` into clbit `i` for every qubit, growing the
    /// classical register if needed.
    pub fn measure_all(&mut self) -> &mut Self {
        self.num_clbits = self.num_clbits.max(self.num_qubits);
        for q in 0..self.num_qubits {
            self.measure(q, q);
        }
        self
    }

    pub fn has_measurements(&self) -> bool {
        self.gates.iter().any(|g| g.kind.is_measure())
    }

    /// `(qubit, clbit)` pairs in circuit order.
    pub fn measurements(&self) -> Vec<(usize, usize)> {
        self.gates
            .iter()
            .filter(|g| g.kind.is_measure())
            .map(|g| (g.qubits[0], g.clbit.unwrap_or_default()))
            .collect()
    }

    /// The circuit with every measurement removed.
    pub fn unitary_part(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            num_clbits: 0,
            gates: self
                .gates
                .iter()
                .filter(|g| !g.kind.is_measure())
                .cloned()
                .collect(),
            label: self.label.clone(),
        }
    }

    pub fn is_clifford(&self) -> bool {
        self.gates
            .iter()
            .all(|g| g.kind.is_clifford() || g.kind.is_measure())
    }

    /// Appends every gate of `other`, remapping its qubits through `qubit_map`.
    pub fn append_mapped(&mut self, other: &Circuit, qubit_map: &[usize]) -> Result<()> {
        if qubit_map.len() != other.num_qubits {
            return Err(Error::InputShape(format!(
                "qubit map has {} entries for a {}-qubit circuit",
                qubit_map.len(),
                other.num_qubits
            )));
        }
        for g in &other.gates {
            self.push(Gate {
                kind: g.kind.clone(),
                qubits: g.qubits.iter().map(|&q| qubit_map[q]).collect(),
                clbit: g.clbit,
            })?;
        }
        Ok(())
    }

    /// Appends `other` on the same qubit indices.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        let identity: Vec<usize> = (0..other.num_qubits).collect();
        self.append_mapped(other, &identity)
    }

    pub fn count(&self, pred: impl Fn(&GateKind) -> bool) -> usize {
        self.gates.iter().filter(|g| pred(&g.kind)).count()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&CircuitFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Circuit> {
        let file: CircuitFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("circuit JSON: {e}")))?;
        file.try_into()
    }
}

/// On-disk circuit layout.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CircuitFile {
    pub num_qubits: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_clbits: Option<usize>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub label: String,
    pub gates: Vec<GateRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GateRecord {
    pub kind: String,
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pauli: Option<Pauli>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clbit: Option<usize>,
}

impl From<&Circuit> for CircuitFile {
    fn from(c: &Circuit) -> Self {
        CircuitFile {
            num_qubits: c.num_qubits,
            num_clbits: Some(c.num_clbits),
            label: c.label.clone(),
            gates: c
                .gates
                .iter()
                .map(|g| GateRecord {
                    kind: g.kind.name().to_string(),
                    qubits: g.qubits.clone(),
                    theta: match g.kind {
                        GateKind::RZ(t) => Some(t),
                        _ => None,
                    },
                    pauli: match g.kind {
                        GateKind::ControlledPauli(p) => Some(p),
                        _ => None,
                    },
                    clbit: g.clbit,
                })
                .collect(),
        }
    }
}

impl TryFrom<CircuitFile> for Circuit {
    type Error = Error;

    /// Measurements without an explicit clbit are numbered in order of
    /// appearance; the classical register defaults to the number of
    /// measurements.
    fn try_from(file: CircuitFile) -> Result<Circuit> {
        let mut kinds = Vec::with_capacity(file.gates.len());
        let mut next_clbit = 0;
        let mut max_clbit = 0;
        for (i, rec) in file.gates.iter().enumerate() {
            let kind = match rec.kind.to_ascii_uppercase().as_str() {
                "H" => GateKind::H,
                "X" => GateKind::X,
                "SX" => GateKind::SX,
                "Y" => GateKind::Y,
                "Z" => GateKind::Z,
                "S" => GateKind::S,
                "SDG" => GateKind::Sdg,
                "T" => GateKind::T,
                "TDG" => GateKind::Tdg,
                "RZ" => GateKind::RZ(rec.theta.ok_or_else(|| {
                    Error::Parse(format!("gate {i}: RZ requires \"theta\""))
                })?),
                "CX" | "CNOT" => GateKind::CX,
                "CCX" | "TOFFOLI" => GateKind::CCX,
                "CPAULI" | "CONTROLLED_PAULI" => GateKind::ControlledPauli(rec.pauli.ok_or_else(
                    || Error::Parse(format!("gate {i}: controlled Pauli requires \"pauli\"")),
                )?),
                "CZ" => GateKind::ControlledPauli(Pauli::Z),
                "CY" => GateKind::ControlledPauli(Pauli::Y),
                "MEASURE" => GateKind::Measure,
                other => return Err(Error::UnsupportedGate(format!("gate {i}: {other:?}"))),
            };
            let clbit = if kind.is_measure() {
                let c = rec.clbit.unwrap_or(next_clbit);
                next_clbit = c + 1;
                max_clbit = max_clbit.max(c + 1);
                Some(c)
            } else {
                None
            };
            kinds.push((kind, clbit));
        }
        let mut circuit = Circuit::new(file.num_qubits, file.num_clbits.unwrap_or(max_clbit))
            .with_label(file.label);
        for (i, ((kind, clbit), rec)) in kinds.into_iter().zip(file.gates).enumerate() {
            circuit
                .push(Gate {
                    kind,
                    qubits: rec.qubits,
                    clbit,
                })
                .map_err(|e| Error::Parse(format!("gate {i}: {e}")))?;
        }
        Ok(circuit)
    }
}

/// GHZ preparation followed by its inverse, measuring every qubit.
pub fn build_ghz_mirror(width: usize) -> Result<Circuit> {
    if width < 2 {
        return Err(Error::InvalidParameter(format!(
            "GHZ mirror needs at least 2 qubits, got {width}"
        )));
    }
    let mut c = Circuit::new(width, width).with_label(format!("ghz_mirror_{width}"));
    c.h(0);
    for q in 0..width - 1 {
        c.cx(q, q + 1);
    }
    for q in (0..width - 1).rev() {
        c.cx(q, q + 1);
    }
    c.h(0);
    c.measure_all();
    Ok(c)
}

/// A single Toffoli (controls 0 and 1, target 2) measuring all three qubits.
pub fn build_toffoli() -> Circuit {
    let mut c = Circuit::new(3, 3).with_label("toffoli");
    c.ccx(0, 1, 2);
    c.measure_all();
    c
}

/// X gates preparing the computational basis state written as a bit string
/// (qubit 0 leftmost).
pub fn basis_state_prep(bits: &str) -> Result<Circuit> {
    let mut c = Circuit::new(bits.len(), 0).with_label(format!("prep_{bits}"));
    for (q, ch) in bits.chars().enumerate() {
        match ch {
            '0' => {}
            '1' => {
                c.x(q);
            }
            other => {
                return Err(Error::InvalidParameter(format!(
                    "input bits must be 0/1, got {other:?} in {bits:?}"
                )))
            }
        }
    }
    Ok(c)
}

/// Textbook six-CNOT Toffoli decomposition over {H, T, T†, CX}.
pub(crate) fn toffoli_decomposition(c0: usize, c1: usize, t: usize, out: &mut Circuit) {
    out.h(t)
        .cx(c1, t)
        .tdg(t)
        .cx(c0, t)
        .t(t)
        .cx(c1, t)
        .tdg(t)
        .cx(c0, t)
        .t(c1)
        .t(t)
        .h(t)
        .cx(c0, c1)
        .t(c0)
        .tdg(c1)
        .cx(c0, c1);
}

pub(crate) const HALF_PI: f64 = PI / 2.0;
