//! Check-pair validation and synthesis, and sandwich construction.
//!
//! A pair `(L, R)` protects a payload `U` when `R·U·L = U`. Wrapping the
//! payload as `H(a) · C_a(R) · U · C_a(L) · H(a)` on a fresh ancilla `a`
//! leaves the payload untouched, while any fault `E` that anti-commutes with
//! `R` (at the point just before the right check) kicks a phase of −1 back
//! onto the ancilla, which then reads 1.

use num_complex::Complex64;
use serde::Serialize;

use crate::circuit::{Circuit, GateKind};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, Phase};
use crate::sim::statevector::apply_pauli;
use crate::unitary::{unitary_of, DenseMatrix, MAX_UNITARY_QUBITS};

pub const VALIDATION_TOLERANCE: f64 = 1e-9;

/// Checks that `R·U·L == c·U` for some unit scalar `c` using dense matrices.
pub fn validate_check_pair(left: &PauliString, right: &PauliString, payload: &Circuit) -> Result<bool> {
    check_lengths(left, right, payload)?;
    let u = unitary_of(&payload.unitary_part())?;
    Ok(dense_pair_phase(left, right, &u).is_some())
}

/// The scalar `c` in `R·U·L = c·U`, or `None` when no such scalar exists.
///
/// Uses the dense oracle up to the dense-matrix limit and Clifford
/// conjugation beyond it.
pub fn pair_phase(left: &PauliString, right: &PauliString, payload: &Circuit) -> Result<Option<Phase>> {
    check_lengths(left, right, payload)?;
    let u = payload.unitary_part();
    if u.num_qubits() <= MAX_UNITARY_QUBITS {
        return Ok(dense_pair_phase(left, right, &unitary_of(&u)?));
    }
    // R·U·L = R·(U L U†)·U, so R must cancel U L U† up to a phase.
    let image = left.conjugate_through(&u)?;
    if !right.same_ops(&image) {
        return Ok(None);
    }
    Ok(Some(right.mul(&image)?.phase()))
}

fn check_lengths(left: &PauliString, right: &PauliString, payload: &Circuit) -> Result<()> {
    let n = payload.num_qubits();
    if left.num_qubits() != n || right.num_qubits() != n {
        return Err(Error::InputShape(format!(
            "check pair acts on {}/{} qubits, payload has {n}",
            left.num_qubits(),
            right.num_qubits()
        )));
    }
    Ok(())
}

fn dense_pair_phase(left: &PauliString, right: &PauliString, u: &DenseMatrix) -> Option<Phase> {
    // tr(U† · R·U·L) / 2^n, built column by column: (R·U·L)e_j = R·U·(L e_j).
    let dim = u.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut col = vec![Complex64::new(0.0, 0.0); dim];
    for j in 0..dim {
        col.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        col[j] = Complex64::new(1.0, 0.0);
        apply_string(&mut col, left);
        // L e_j is a single scaled basis vector.
        let (k, scale) = col
            .iter()
            .enumerate()
            .find(|(_, v)| v.norm() > 0.5)
            .map(|(k, v)| (k, *v))
            .expect("Pauli maps basis vectors to basis vectors");
        col.copy_from_slice(u.column(k));
        col.iter_mut().for_each(|c| *c *= scale);
        apply_string(&mut col, right);
        acc += u
            .column(j)
            .iter()
            .zip(&col)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>();
    }
    let c = acc / dim as f64;
    if (c.norm() - 1.0).abs() > VALIDATION_TOLERANCE {
        return None;
    }
    let candidates = [
        (Phase::PlusOne, Complex64::new(1.0, 0.0)),
        (Phase::PlusI, Complex64::new(0.0, 1.0)),
        (Phase::MinusOne, Complex64::new(-1.0, 0.0)),
        (Phase::MinusI, Complex64::new(0.0, -1.0)),
    ];
    candidates
        .into_iter()
        .min_by(|a, b| (a.1 - c).norm().total_cmp(&(b.1 - c).norm()))
        .map(|(p, _)| p)
}

fn apply_string(v: &mut [Complex64], p: &PauliString) {
    for q in p.support() {
        apply_pauli(v, q, p.get(q), false);
    }
    let phase = match p.phase() {
        Phase::PlusOne => return,
        Phase::PlusI => Complex64::new(0.0, 1.0),
        Phase::MinusOne => Complex64::new(-1.0, 0.0),
        Phase::MinusI => Complex64::new(0.0, -1.0),
    };
    v.iter_mut().for_each(|a| *a *= phase);
}

/// `U·L·U†` for a Clifford payload, the right check that completes `L`.
pub fn synthesize_right_check(left: &PauliString, payload: &Circuit) -> Result<PauliString> {
    left.conjugate_through(&payload.unitary_part())
}

/// A validated left/right check pair.
///
/// The right check's sign is normalized on construction so that
/// `R·U·L = U` holds exactly, not just up to a global phase; a leftover −1
/// would otherwise fire the ancilla on every noiseless shot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckPair {
    left: PauliString,
    right: PauliString,
    protected_qubits: Vec<usize>,
}

impl CheckPair {
    pub fn new(left: PauliString, right: PauliString, payload: &Circuit) -> Result<Self> {
        for (side, p) in [("left", &left), ("right", &right)] {
            if !p.is_hermitian() {
                return Err(Error::InvalidParameter(format!(
                    "{side} check {p} is not Hermitian"
                )));
            }
            if p.is_identity() {
                return Err(Error::InvalidParameter(format!(
                    "{side} check {p} is the identity"
                )));
            }
        }
        let phase = pair_phase(&left, &right, payload)?.ok_or_else(|| {
            Error::Contract(format!(
                "check ({left}, {right}) does not satisfy R·U·L = U for payload {:?}",
                payload.label()
            ))
        })?;
        // c is ±1 for Hermitian pairs; fold it into R.
        let right = right.clone().with_phase(right.phase() * phase.conj());
        let mut protected_qubits = left.support();
        protected_qubits.extend(right.support());
        protected_qubits.sort_unstable();
        protected_qubits.dedup();
        Ok(Self {
            left,
            right,
            protected_qubits,
        })
    }

    /// `L = R = P`, as used for the edge checks.
    pub fn symmetric(check: PauliString, payload: &Circuit) -> Result<Self> {
        Self::new(check.clone(), check, payload)
    }

    /// Pair with a synthesized right check, for Clifford payloads.
    pub fn synthesized(left: PauliString, payload: &Circuit) -> Result<Self> {
        let right = synthesize_right_check(&left, payload)?;
        Self::new(left, right, payload)
    }

    pub fn left(&self) -> &PauliString {
        &self.left
    }

    pub fn right(&self) -> &PauliString {
        &self.right
    }

    pub fn protected_qubits(&self) -> &[usize] {
        &self.protected_qubits
    }

    /// Whether a payload fault just before the right check flips the
    /// ancilla: exactly when it anti-commutes with `R`.
    pub fn detects(&self, error: &PauliString) -> bool {
        !error
            .commutes(&self.right)
            .expect("fault and check act on the same payload")
    }
}

/// One single-qubit check on the first and last payload qubit, trying `X`
/// then `Z` on each and keeping the first that validates.
pub fn auto_edge_checks(payload: &Circuit) -> Result<Vec<CheckPair>> {
    let n = payload.num_qubits();
    if n == 0 {
        return Err(Error::InvalidParameter("payload has no qubits".into()));
    }
    let mut edges = vec![0];
    if n > 1 {
        edges.push(n - 1);
    }
    edges
        .into_iter()
        .map(|q| {
            for pauli in [Pauli::X, Pauli::Z] {
                let p = PauliString::single(n, q, pauli);
                if pair_phase(&p, &p, payload)?.is_some() {
                    return CheckPair::symmetric(p, payload);
                }
            }
            Err(Error::Construction(format!(
                "neither X nor Z on edge qubit {q} commutes through payload {:?}",
                payload.label()
            )))
        })
        .collect()
}

/// A payload wrapped in check pairs, with one ancilla per pair.
#[derive(Clone, Debug)]
pub struct SandwichedCircuit {
    pub circuit: Circuit,
    pub checks: Vec<CheckPair>,
    pub payload_qubits: Vec<usize>,
    pub ancilla_indices: Vec<usize>,
    pub payload_bits: Vec<usize>,
    pub check_bits: Vec<usize>,
    /// Index of the first gate of the right checks (or of the final
    /// Hadamards when there are no checks).
    pub right_checks_start: usize,
}

impl SandwichedCircuit {
    pub fn num_payload_qubits(&self) -> usize {
        self.payload_qubits.len()
    }

    /// Ancilla count needed per thread.
    pub fn num_ancillas(&self) -> usize {
        self.ancilla_indices.len()
    }

    /// The circuit with a Pauli fault on the payload inserted just before the
    /// right checks. Used by fault-injection tests.
    pub fn with_fault_before_right_checks(&self, fault: &PauliString) -> Result<Circuit> {
        if fault.num_qubits() != self.payload_qubits.len() {
            return Err(Error::InputShape(format!(
                "fault acts on {} qubits, payload has {}",
                fault.num_qubits(),
                self.payload_qubits.len()
            )));
        }
        let mut out = Circuit::new(self.circuit.num_qubits(), self.circuit.num_clbits())
            .with_label(format!("{}+fault", self.circuit.label()));
        for (i, g) in self.circuit.gates().iter().enumerate() {
            if i == self.right_checks_start {
                for q in fault.support() {
                    out.pauli(fault.get(q), self.payload_qubits[q]);
                }
            }
            out.push(g.clone())?;
        }
        Ok(out)
    }
}

/// Wraps `payload` in `checks`. Equivalent to [`sandwich_prepared`] with no
/// state preparation.
pub fn sandwich(payload: &Circuit, checks: &[CheckPair]) -> Result<SandwichedCircuit> {
    sandwich_prepared(&Circuit::new(payload.num_qubits(), 0), payload, checks)
}

/// Wraps `payload` in `checks`, preceded by an unprotected `prep` block.
///
/// Check `k` uses ancilla `n + k` and clbit `payload.num_clbits() + k`.
/// Check 0 is innermost: left checks run in reverse order, right checks in
/// order.
pub fn sandwich_prepared(
    prep: &Circuit,
    payload: &Circuit,
    checks: &[CheckPair],
) -> Result<SandwichedCircuit> {
    let n = payload.num_qubits();
    if prep.num_qubits() != n || prep.has_measurements() {
        return Err(Error::Construction(format!(
            "preparation must be a measurement-free {n}-qubit circuit"
        )));
    }
    for (i, check) in checks.iter().enumerate() {
        match pair_phase(check.left(), check.right(), payload)? {
            Some(Phase::PlusOne) => {}
            _ => {
                return Err(Error::Contract(format!(
                    "check {i} ({}, {}) is not valid for payload {:?}",
                    check.left(),
                    check.right(),
                    payload.label()
                )))
            }
        }
    }

    let k = checks.len();
    let payload_clbits = payload.num_clbits();
    let ancillas: Vec<usize> = (n..n + k).collect();
    let check_bits: Vec<usize> = (payload_clbits..payload_clbits + k).collect();
    let mut c = Circuit::new(n + k, payload_clbits + k).with_label(if k == 0 {
        payload.label().to_string()
    } else {
        format!("{}+pcs{k}", payload.label())
    });
    let payload_map: Vec<usize> = (0..n).collect();

    c.append_mapped(prep, &payload_map)?;
    for &a in &ancillas {
        c.h(a);
    }
    for (check, &a) in checks.iter().zip(&ancillas).rev() {
        controlled_string(&mut c, check.left(), a);
    }
    c.append_mapped(&payload.unitary_part(), &payload_map)?;
    let right_checks_start = c.len();
    for (check, &a) in checks.iter().zip(&ancillas) {
        controlled_string(&mut c, check.right(), a);
    }
    for &a in &ancillas {
        c.h(a);
    }
    let mut payload_bits: Vec<usize> = Vec::new();
    for (q, bit) in payload.measurements() {
        c.measure(q, bit);
        payload_bits.push(bit);
    }
    payload_bits.sort_unstable();
    payload_bits.dedup();
    for (&a, &bit) in ancillas.iter().zip(&check_bits) {
        c.measure(a, bit);
    }

    Ok(SandwichedCircuit {
        circuit: c,
        checks: checks.to_vec(),
        payload_qubits: payload_map,
        ancilla_indices: ancillas,
        payload_bits,
        check_bits,
        right_checks_start,
    })
}

/// Controlled application of a Pauli string, phase included.
fn controlled_string(c: &mut Circuit, p: &PauliString, control: usize) {
    for q in p.support() {
        c.controlled_pauli(p.get(q), control, q);
    }
    // A phase i^k on the |1⟩ branch is S^k on the control.
    match p.phase() {
        Phase::PlusOne => {}
        Phase::PlusI => {
            c.s(control);
        }
        Phase::MinusOne => {
            c.z(control);
        }
        Phase::MinusI => {
            c.sdg(control);
        }
    }
}

/// Kinds introduced by [`sandwich`] around the payload.
pub fn is_check_gate(kind: &GateKind) -> bool {
    matches!(kind, GateKind::ControlledPauli(_))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{basis_state_prep, build_ghz_mirror, build_toffoli};
    use crate::sim::ideal_distribution;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn all_x_commutes_through_mirror() {
        let u = build_ghz_mirror(8).unwrap();
        let p = ps("XXXXXXXX");
        assert!(validate_check_pair(&p, &p, &u).unwrap());
    }

    #[test]
    fn toffoli_control_z_valid_target_z_invalid() {
        let u = build_toffoli();
        assert!(validate_check_pair(&ps("ZII"), &ps("ZII"), &u).unwrap());
        assert!(!validate_check_pair(&ps("IIZ"), &ps("IIZ"), &u).unwrap());
        assert!(validate_check_pair(&ps("IIX"), &ps("IIX"), &u).unwrap());
    }

    #[test]
    fn length_mismatch() {
        let u = build_toffoli();
        assert!(matches!(
            validate_check_pair(&ps("ZI"), &ps("ZII"), &u),
            Err(Error::InputShape(_))
        ));
    }

    #[test]
    fn synthesis_on_identity_and_cx() {
        let id = Circuit::new(3, 0);
        assert_eq!(synthesize_right_check(&ps("XYZ"), &id).unwrap(), ps("XYZ"));
        let mut cx = Circuit::new(2, 0);
        cx.cx(0, 1);
        assert_eq!(synthesize_right_check(&ps("XI"), &cx).unwrap(), ps("XX"));
        assert!(synthesize_right_check(&ps("XII"), &build_toffoli()).is_err());
    }

    #[test]
    fn sign_is_folded_into_right_check() {
        // With the input flip inside U, Z on a control picks up −1.
        let mut u = Circuit::new(3, 0);
        u.x(0).ccx(0, 1, 2);
        let z = ps("ZII");
        assert_eq!(pair_phase(&z, &z, &u).unwrap(), Some(Phase::MinusOne));
        let pair = CheckPair::symmetric(z, &u).unwrap();
        assert_eq!(pair.right(), &ps("-ZII"));
        assert_eq!(pair_phase(pair.left(), pair.right(), &u).unwrap(), Some(Phase::PlusOne));
    }

    #[test]
    fn pair_rejects_non_hermitian_and_identity() {
        let u = Circuit::new(1, 0);
        assert!(CheckPair::symmetric(ps("iX"), &u).is_err());
        assert!(CheckPair::symmetric(ps("I"), &u).is_err());
    }

    #[test]
    fn auto_edge_on_benchmarks() {
        let t = auto_edge_checks(&build_toffoli()).unwrap();
        assert_eq!(t[0].left(), &ps("ZII"));
        assert_eq!(t[1].left(), &ps("IIX"));
        let g = auto_edge_checks(&build_ghz_mirror(8).unwrap()).unwrap();
        assert_eq!(g[0].left(), &ps("XIIIIIII"));
        assert_eq!(g[1].left(), &ps("IIIIIIIX"));
    }

    #[test]
    fn empty_checks_leave_payload_alone() {
        let u = build_ghz_mirror(4).unwrap();
        let s = sandwich(&u, &[]).unwrap();
        assert_eq!(s.circuit.gates(), u.gates());
        assert!(s.check_bits.is_empty());
        assert_eq!(s.payload_bits, vec![0, 1, 2, 3]);
    }

    #[test]
    fn mirror_with_edge_checks_is_silent() {
        let u = build_ghz_mirror(8).unwrap();
        let checks = auto_edge_checks(&u).unwrap();
        let s = sandwich(&u, &checks).unwrap();
        assert_eq!(s.circuit.num_qubits(), 10);
        assert_eq!(s.ancilla_indices, vec![8, 9]);
        assert_eq!(s.check_bits, vec![8, 9]);
        let d = ideal_distribution(&s.circuit).unwrap();
        assert!((d["0000000000"] - 1.0).abs() < 1e-12, "{d:?}");
    }

    #[test]
    fn toffoli_sandwich_keeps_truth_table() {
        let u = build_toffoli();
        let checks = auto_edge_checks(&u).unwrap();
        let s = sandwich_prepared(&basis_state_prep("110").unwrap(), &u, &checks).unwrap();
        let d = ideal_distribution(&s.circuit).unwrap();
        assert!((d["11100"] - 1.0).abs() < 1e-12, "{d:?}");
    }

    #[test]
    fn foreign_check_is_rejected() {
        let u = build_toffoli();
        let id = Circuit::new(3, 0);
        let foreign = CheckPair::symmetric(ps("IIZ"), &id).unwrap();
        assert!(matches!(sandwich(&u, &[foreign]), Err(Error::Contract(_))));
    }

    #[test]
    fn detection_rule() {
        let id = Circuit::new(1, 0);
        let check = CheckPair::symmetric(ps("X"), &id).unwrap();
        assert!(check.detects(&ps("Z")));
        assert!(!check.detects(&ps("X")));
        assert!(check.detects(&ps("Y")));
    }

    #[test]
    fn fault_lands_before_right_checks() {
        let u = build_ghz_mirror(2).unwrap();
        let s = sandwich(&u, &auto_edge_checks(&u).unwrap()).unwrap();
        let faulty = s.with_fault_before_right_checks(&ps("ZI")).unwrap();
        assert_eq!(faulty.len(), s.circuit.len() + 1);
        assert_eq!(faulty.gates()[s.right_checks_start].kind, GateKind::Z);
    }
}
