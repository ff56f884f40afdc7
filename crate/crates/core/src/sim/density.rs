//! Exact density-matrix evolution for small registers.
//!
//! The operator is stored vectorized as a `2n`-qubit amplitude vector with
//! the row index in the low `n` bits and the column index in the high `n`
//! bits, so `G ρ G†` is `G` on the low half and `conj(G)` on the high half.

use num_complex::Complex64;

use super::noise::NoiseSpec;
use super::statevector::apply_gate;
use super::{to_distribution, Distribution};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::pauli::Pauli;
use crate::sim::statevector::apply_pauli;

pub const MAX_DENSITY_QUBITS: usize = 6;

/// Exact outcome distribution under per-gate depolarizing noise
/// `ρ → (1−p)·GρG† + p/(4^k−1)·Σ_{P≠I} (PG)ρ(PG)†`.
pub fn density_matrix_reference(circuit: &Circuit, noise: &NoiseSpec) -> Result<Distribution> {
    let n = circuit.num_qubits();
    if n > MAX_DENSITY_QUBITS {
        return Err(Error::Capacity(format!(
            "density-matrix reference limited to {MAX_DENSITY_QUBITS} qubits, got {n}"
        )));
    }
    if !circuit.has_measurements() {
        return Err(Error::Contract(format!(
            "circuit {:?} has no measurements",
            circuit.label()
        )));
    }
    NoiseSpec::new(noise.p1, noise.p2)?;

    let dim = 1usize << n;
    let mut rho = vec![Complex64::new(0.0, 0.0); dim * dim];
    rho[0] = Complex64::new(1.0, 0.0);
    for g in circuit.gates().iter().filter(|g| !g.kind.is_measure()) {
        let rate = noise.rate_for(&g.kind)?;
        apply_gate(&mut rho, &g.kind, &g.qubits, 0, false)?;
        apply_gate(&mut rho, &g.kind, &g.qubits, n, true)?;
        if rate > 0.0 {
            depolarize(&mut rho, &g.qubits, rate, n);
        }
    }

    let diag: Vec<Complex64> = (0..dim).map(|i| rho[i + i * dim]).collect();
    let mut probs = vec![0.0; 1 << circuit.num_clbits()];
    for (i, d) in diag.iter().enumerate() {
        let mut key = 0usize;
        for (q, c) in circuit.measurements() {
            key |= ((i >> q) & 1) << c;
        }
        probs[key] += d.re;
    }
    Ok(to_distribution(&probs, circuit.num_clbits()))
}

fn depolarize(rho: &mut Vec<Complex64>, qubits: &[usize], p: f64, n: usize) {
    let k = qubits.len() as u32;
    let terms = 4usize.pow(k);
    let w = p / (terms - 1) as f64;
    let mut mixed: Vec<Complex64> = rho.iter().map(|v| v * (1.0 - p)).collect();
    let mut tmp = vec![Complex64::new(0.0, 0.0); rho.len()];
    for code in 1..terms {
        tmp.copy_from_slice(rho);
        for (j, &q) in qubits.iter().enumerate() {
            let pauli = Pauli::ALL[(code >> (2 * j)) & 3];
            apply_pauli(&mut tmp, q, pauli, false);
            apply_pauli(&mut tmp, q + n, pauli, true);
        }
        for (m, t) in mixed.iter_mut().zip(&tmp) {
            *m += t * w;
        }
    }
    *rho = mixed;
}
