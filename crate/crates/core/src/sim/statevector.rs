//! In-place gate kernels over amplitude vectors.
//!
//! Amplitude index bit `q` is the computational value of qubit `q`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use num_complex::Complex64;

use crate::circuit::GateKind;
use crate::error::{Error, Result};
use crate::pauli::Pauli;

pub type Matrix2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn zero_state(num_qubits: usize) -> Vec<Complex64> {
    let mut s = vec![ZERO; 1 << num_qubits];
    s[0] = ONE;
    s
}

pub fn pauli_matrix(p: Pauli) -> Matrix2 {
    match p {
        Pauli::I => [[ONE, ZERO], [ZERO, ONE]],
        Pauli::X => [[ZERO, ONE], [ONE, ZERO]],
        Pauli::Y => [[ZERO, -I], [I, ZERO]],
        Pauli::Z => [[ONE, ZERO], [ZERO, -ONE]],
    }
}

fn diag(phase: Complex64) -> Matrix2 {
    [[ONE, ZERO], [ZERO, phase]]
}

/// 2×2 matrix of a single-qubit gate kind, `None` for multi-qubit kinds.
pub fn single_qubit_matrix(kind: &GateKind) -> Option<Matrix2> {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    Some(match kind {
        GateKind::H => [[h, h], [h, -h]],
        GateKind::X => pauli_matrix(Pauli::X),
        GateKind::Y => pauli_matrix(Pauli::Y),
        GateKind::Z => pauli_matrix(Pauli::Z),
        GateKind::SX => {
            let a = Complex64::new(0.5, 0.5);
            let b = Complex64::new(0.5, -0.5);
            [[a, b], [b, a]]
        }
        GateKind::S => diag(I),
        GateKind::Sdg => diag(-I),
        GateKind::T => diag(Complex64::from_polar(1.0, FRAC_PI_4)),
        GateKind::Tdg => diag(Complex64::from_polar(1.0, -FRAC_PI_4)),
        GateKind::RZ(theta) => [
            [Complex64::from_polar(1.0, -theta / 2.0), ZERO],
            [ZERO, Complex64::from_polar(1.0, theta / 2.0)],
        ],
        _ => return None,
    })
}

fn conj2(m: &Matrix2) -> Matrix2 {
    [
        [m[0][0].conj(), m[0][1].conj()],
        [m[1][0].conj(), m[1][1].conj()],
    ]
}

pub fn apply_1q(state: &mut [Complex64], q: usize, m: &Matrix2) {
    let bit = 1usize << q;
    for i in 0..state.len() {
        if i & bit == 0 {
            let (a, b) = (state[i], state[i | bit]);
            state[i] = m[0][0] * a + m[0][1] * b;
            state[i | bit] = m[1][0] * a + m[1][1] * b;
        }
    }
}

/// Applies `m` to `target` on the subspace where `control` is 1.
pub fn apply_controlled_1q(state: &mut [Complex64], control: usize, target: usize, m: &Matrix2) {
    let (cb, tb) = (1usize << control, 1usize << target);
    for i in 0..state.len() {
        if i & cb != 0 && i & tb == 0 {
            let (a, b) = (state[i], state[i | tb]);
            state[i] = m[0][0] * a + m[0][1] * b;
            state[i | tb] = m[1][0] * a + m[1][1] * b;
        }
    }
}

pub fn apply_x(state: &mut [Complex64], q: usize) {
    let bit = 1usize << q;
    for i in 0..state.len() {
        if i & bit == 0 {
            state.swap(i, i | bit);
        }
    }
}

pub fn apply_z(state: &mut [Complex64], q: usize) {
    let bit = 1usize << q;
    for (i, a) in state.iter_mut().enumerate() {
        if i & bit != 0 {
            *a = -*a;
        }
    }
}

/// Applies a Hermitian Pauli; `conj` selects the complex conjugate matrix.
pub fn apply_pauli(state: &mut [Complex64], q: usize, p: Pauli, conj: bool) {
    match p {
        Pauli::I => {}
        Pauli::X => apply_x(state, q),
        Pauli::Z => apply_z(state, q),
        Pauli::Y => {
            // Y = i·X·Z
            apply_z(state, q);
            apply_x(state, q);
            let f = if conj { -I } else { I };
            state.iter_mut().for_each(|a| *a *= f);
        }
    }
}

pub fn apply_cx(state: &mut [Complex64], control: usize, target: usize) {
    let (cb, tb) = (1usize << control, 1usize << target);
    for i in 0..state.len() {
        if i & cb != 0 && i & tb == 0 {
            state.swap(i, i | tb);
        }
    }
}

pub fn apply_ccx(state: &mut [Complex64], c0: usize, c1: usize, target: usize) {
    let cmask = (1usize << c0) | (1usize << c1);
    let tb = 1usize << target;
    for i in 0..state.len() {
        if i & cmask == cmask && i & tb == 0 {
            state.swap(i, i | tb);
        }
    }
}

/// Applies one unitary gate, or its complex conjugate when `conj` is set.
///
/// `offset` shifts every qubit index, which lets the density-matrix engine
/// address the column half of a vectorized operator.
pub fn apply_gate(
    state: &mut [Complex64],
    kind: &GateKind,
    qubits: &[usize],
    offset: usize,
    conj: bool,
) -> Result<()> {
    let q = |i: usize| qubits[i] + offset;
    match kind {
        GateKind::Measure => {
            return Err(Error::NonUnitary("measurement inside a unitary block".into()))
        }
        GateKind::X => apply_x(state, q(0)),
        GateKind::Z => apply_z(state, q(0)),
        GateKind::CX => apply_cx(state, q(0), q(1)),
        GateKind::CCX => apply_ccx(state, q(0), q(1), q(2)),
        GateKind::ControlledPauli(p) => {
            let m = pauli_matrix(*p);
            let m = if conj { conj2(&m) } else { m };
            apply_controlled_1q(state, q(0), q(1), &m);
        }
        single => {
            let m = single_qubit_matrix(single).expect("single-qubit kind");
            let m = if conj { conj2(&m) } else { m };
            apply_1q(state, q(0), &m);
        }
    }
    Ok(())
}

/// Squared magnitudes of `state`, accumulated by classical outcome.
///
/// `measurements` lists `(qubit, clbit)` pairs; the returned vector is
/// indexed by the integer whose bit `c` is clbit `c`.
pub fn outcome_probabilities(
    state: &[Complex64],
    measurements: &[(usize, usize)],
    num_clbits: usize,
) -> Vec<f64> {
    let mut probs = vec![0.0; 1 << num_clbits];
    for (i, a) in state.iter().enumerate() {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let mut key = 0usize;
        for &(q, c) in measurements {
            key |= ((i >> q) & 1) << c;
        }
        probs[key] += p;
    }
    probs
}

/// Bit string for an outcome index, clbit 0 leftmost.
pub fn outcome_key(index: usize, num_clbits: usize) -> String {
    (0..num_clbits)
        .map(|c| if (index >> c) & 1 == 1 { '1' } else { '0' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[Complex64], b: &[Complex64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-12)
    }

    #[test]
    fn specialised_kernels_match_dense() {
        let mut base = zero_state(3);
        apply_1q(&mut base, 0, &single_qubit_matrix(&GateKind::H).unwrap());
        apply_1q(&mut base, 2, &single_qubit_matrix(&GateKind::SX).unwrap());
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            let mut fast = base.clone();
            apply_pauli(&mut fast, 2, p, false);
            let mut slow = base.clone();
            apply_1q(&mut slow, 2, &pauli_matrix(p));
            assert!(close(&fast, &slow), "{p:?}");

            let mut fast = base.clone();
            apply_pauli(&mut fast, 2, p, true);
            let mut slow = base.clone();
            apply_1q(&mut slow, 2, &conj2(&pauli_matrix(p)));
            assert!(close(&fast, &slow), "conj {p:?}");
        }
        let mut fast = base.clone();
        apply_cx(&mut fast, 0, 2);
        let mut slow = base.clone();
        apply_controlled_1q(&mut slow, 0, 2, &pauli_matrix(Pauli::X));
        assert!(close(&fast, &slow));
    }

    #[test]
    fn keys_put_clbit_zero_first() {
        assert_eq!(outcome_key(0b001, 3), "100");
        assert_eq!(outcome_key(0b110, 3), "011");
    }

    #[test]
    fn probabilities_follow_measurement_map() {
        let mut s = zero_state(2);
        apply_x(&mut s, 0);
        // qubit 0 into clbit 1, qubit 1 into clbit 0
        let p = outcome_probabilities(&s, &[(0, 1), (1, 0)], 2);
        assert_eq!(p[0b10], 1.0);
    }
}
