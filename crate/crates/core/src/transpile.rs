//! Rewriting onto the hardware basis {CX, X, SX, RZ}.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::circuit::{toffoli_decomposition, Circuit, Gate, GateKind, HALF_PI};
use crate::error::Result;
use crate::pauli::Pauli;

/// True for kinds the basis contains natively.
pub fn in_basis(kind: &GateKind) -> bool {
    matches!(
        kind,
        GateKind::CX | GateKind::X | GateKind::SX | GateKind::RZ(_) | GateKind::Measure
    )
}

/// Rewrites every gate into {CX, X, SX, RZ, MEASURE}. The result equals the
/// input up to a global phase.
pub fn transpile_to_basis(circuit: &Circuit) -> Result<Circuit> {
    let mut out = Circuit::new(circuit.num_qubits(), circuit.num_clbits())
        .with_label(circuit.label().to_string());
    for g in circuit.gates() {
        lower(g, &mut out)?;
    }
    Ok(out)
}

fn lower(g: &Gate, out: &mut Circuit) -> Result<()> {
    let q = &g.qubits;
    match &g.kind {
        k if in_basis(k) => out.push(g.clone())?,
        GateKind::H => {
            out.rz(HALF_PI, q[0]).sx(q[0]).rz(HALF_PI, q[0]);
        }
        GateKind::Z => {
            out.rz(PI, q[0]);
        }
        // Y ∝ X·Z, so Z acts first.
        GateKind::Y => {
            out.rz(PI, q[0]).x(q[0]);
        }
        GateKind::S => {
            out.rz(HALF_PI, q[0]);
        }
        GateKind::Sdg => {
            out.rz(-HALF_PI, q[0]);
        }
        GateKind::T => {
            out.rz(FRAC_PI_4, q[0]);
        }
        GateKind::Tdg => {
            out.rz(-FRAC_PI_4, q[0]);
        }
        GateKind::CCX => {
            let mut tmp = Circuit::new(out.num_qubits(), 0);
            toffoli_decomposition(q[0], q[1], q[2], &mut tmp);
            for inner in tmp.gates() {
                lower(inner, out)?;
            }
        }
        GateKind::ControlledPauli(p) => {
            let (c, t) = (q[0], q[1]);
            match p {
                Pauli::I => {}
                Pauli::X => {
                    out.cx(c, t);
                }
                Pauli::Z => {
                    out.rz(HALF_PI, t).sx(t).rz(HALF_PI, t);
                    out.cx(c, t);
                    out.rz(HALF_PI, t).sx(t).rz(HALF_PI, t);
                }
                // CY = S·CX·S† on the target.
                Pauli::Y => {
                    out.rz(-HALF_PI, t).cx(c, t).rz(HALF_PI, t);
                }
            }
        }
        _ => unreachable!("basis kinds handled above"),
    }
    Ok(())
}
