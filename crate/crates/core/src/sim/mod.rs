//! Noisy execution engines.

pub mod counts;
pub mod density;
pub mod noise;
pub mod statevector;
pub mod trajectory;

use std::collections::BTreeMap;

pub use counts::CountsMap;
pub use density::density_matrix_reference;
pub use noise::NoiseSpec;
pub use trajectory::{run_trajectories, run_trajectories_with_rng};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use statevector::{apply_gate, outcome_key, outcome_probabilities, zero_state};

/// Outcome bit string (clbit 0 leftmost) to probability.
pub type Distribution = BTreeMap<String, f64>;

/// Largest register the statevector engines accept.
pub const MAX_STATEVECTOR_QUBITS: usize = 24;

/// Noiseless Born distribution over the circuit's classical bits.
pub fn ideal_distribution(circuit: &Circuit) -> Result<Distribution> {
    if !circuit.has_measurements() {
        return Err(Error::Contract(format!(
            "circuit {:?} has no measurements",
            circuit.label()
        )));
    }
    if circuit.num_qubits() > MAX_STATEVECTOR_QUBITS {
        return Err(Error::Capacity(format!(
            "statevector limited to {MAX_STATEVECTOR_QUBITS} qubits"
        )));
    }
    let mut state = zero_state(circuit.num_qubits());
    for g in circuit.gates().iter().filter(|g| !g.kind.is_measure()) {
        apply_gate(&mut state, &g.kind, &g.qubits, 0, false)?;
    }
    let probs = outcome_probabilities(&state, &circuit.measurements(), circuit.num_clbits());
    Ok(to_distribution(&probs, circuit.num_clbits()))
}

pub(crate) fn to_distribution(probs: &[f64], num_clbits: usize) -> Distribution {
    probs
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 1e-15)
        .map(|(i, &p)| (outcome_key(i, num_clbits), p))
        .collect()
}

/// Total-variation distance between two distributions over string keys.
pub fn total_variation(a: &Distribution, b: &Distribution) -> f64 {
    let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys
        .into_iter()
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{basis_state_prep, build_ghz_mirror, build_toffoli};

    #[test]
    fn toffoli_truth_table() {
        for (input, output) in [("110", "111"), ("100", "100"), ("111", "110"), ("010", "010")] {
            let mut c = basis_state_prep(input).unwrap();
            c.set_label("t");
            let mut full = Circuit::new(3, 3);
            full.append(&c).unwrap();
            full.append(&build_toffoli()).unwrap();
            let d = ideal_distribution(&full).unwrap();
            assert_eq!(d.len(), 1);
            assert!((d[output] - 1.0).abs() < 1e-12, "{input} -> {d:?}");
        }
    }

    #[test]
    fn ghz_mirror_ideal_is_all_zeros() {
        let d = ideal_distribution(&build_ghz_mirror(8).unwrap()).unwrap();
        assert!((d["00000000"] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tv_distance() {
        let a: Distribution = [("0".to_string(), 1.0)].into();
        let b: Distribution = [("0".to_string(), 0.5), ("1".to_string(), 0.5)].into();
        assert!((total_variation(&a, &b) - 0.5).abs() < 1e-15);
        assert_eq!(total_variation(&a, &a), 0.0);
    }
}
