//! Stochastic Pauli-trajectory sampler.
//!
//! Each shot independently draws a fault pattern: after every noisy gate, a
//! uniformly random non-identity Pauli on the gate's qubits with the gate's
//! error probability. Shots sharing a pattern share one statevector
//! evolution, and the outcome of each shot is then drawn from that
//! trajectory's Born distribution. This is the same distribution as
//! simulating every shot separately.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;

use super::noise::NoiseSpec;
use super::statevector::{apply_gate, apply_pauli, outcome_key, outcome_probabilities, zero_state};
use super::{CountsMap, MAX_STATEVECTOR_QUBITS};
use crate::circuit::{Circuit, GateKind};
use crate::error::{Error, Result};
use crate::pauli::Pauli;
use crate::rng::stream_rng;

/// Amplitudes kept across all prefix checkpoints.
const CHECKPOINT_BUDGET: usize = 1 << 22;

/// `(op index, fault code)`; codes index `Pauli::ALL` for one qubit, and
/// `a + 4b` for Paulis `a`, `b` on a gate's first and second qubit.
type Fault = (u32, u8);

struct Op<'a> {
    kind: &'a GateKind,
    qubits: &'a [usize],
    rate: f64,
}

pub fn run_trajectories(
    circuit: &Circuit,
    noise: &NoiseSpec,
    shots: u64,
    seed: u64,
) -> Result<CountsMap> {
    let mut rng = stream_rng(seed, "trajectory", 0);
    run_trajectories_with_rng(circuit, noise, shots, &mut rng)
}

pub fn run_trajectories_with_rng<R: Rng + ?Sized>(
    circuit: &Circuit,
    noise: &NoiseSpec,
    shots: u64,
    rng: &mut R,
) -> Result<CountsMap> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    if !circuit.has_measurements() {
        return Err(Error::Contract(format!(
            "circuit {:?} has no measurements",
            circuit.label()
        )));
    }
    let n = circuit.num_qubits();
    let m = circuit.num_clbits();
    if n > MAX_STATEVECTOR_QUBITS || m > MAX_STATEVECTOR_QUBITS {
        return Err(Error::Capacity(format!(
            "trajectory engine limited to {MAX_STATEVECTOR_QUBITS} qubits and clbits"
        )));
    }
    NoiseSpec::new(noise.p1, noise.p2)?;

    let ops = circuit
        .gates()
        .iter()
        .filter(|g| !g.kind.is_measure())
        .map(|g| {
            Ok(Op {
                kind: &g.kind,
                qubits: &g.qubits,
                rate: noise.rate_for(&g.kind)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let noisy: Vec<(u32, f64, usize)> = ops
        .iter()
        .enumerate()
        .filter(|(_, op)| op.rate > 0.0)
        .map(|(i, op)| (i as u32, op.rate, op.qubits.len()))
        .collect();

    let mut patterns: BTreeMap<Vec<Fault>, u64> = BTreeMap::new();
    let mut faults = Vec::new();
    for _ in 0..shots {
        faults.clear();
        for &(idx, rate, arity) in &noisy {
            if rng.random::<f64>() < rate {
                let code = if arity == 1 {
                    rng.random_range(1..4u8)
                } else {
                    rng.random_range(1..16u8)
                };
                faults.push((idx, code));
            }
        }
        *patterns.entry(faults.clone()).or_insert(0) += 1;
    }

    let checkpoints = Checkpoints::build(&ops, n)?;
    let measurements = circuit.measurements();
    let mut tallies = vec![0u64; 1 << m];
    let mut cdf = Vec::with_capacity(1 << m);
    for (pattern, count) in &patterns {
        let state = evolve(&ops, &checkpoints, pattern)?;
        let probs = outcome_probabilities(&state, &measurements, m);
        cdf.clear();
        let mut acc = 0.0;
        for p in probs {
            acc += p;
            cdf.push(acc);
        }
        for _ in 0..*count {
            let u = rng.random::<f64>() * acc;
            let k = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            tallies[k] += 1;
        }
    }

    let counts = tallies
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| (outcome_key(i, m), c))
        .collect();
    CountsMap::from_counts(counts)
}

/// Noiseless prefix states at evenly spaced op positions.
struct Checkpoints {
    /// `(position, state after ops[..position])`, ascending.
    states: Vec<(usize, Vec<Complex64>)>,
}

impl Checkpoints {
    fn build(ops: &[Op<'_>], n: usize) -> Result<Self> {
        let dim = 1usize << n;
        let slots = (CHECKPOINT_BUDGET / dim).max(1);
        let stride = (ops.len() + 1).div_ceil(slots).max(1);
        let mut state = zero_state(n);
        let mut states = vec![(0, state.clone())];
        for (i, op) in ops.iter().enumerate() {
            apply_gate(&mut state, op.kind, op.qubits, 0, false)?;
            let pos = i + 1;
            if pos % stride == 0 || pos == ops.len() {
                states.push((pos, state.clone()));
            }
        }
        Ok(Self { states })
    }

    /// Latest checkpoint at or before `position`.
    fn before(&self, position: usize) -> &(usize, Vec<Complex64>) {
        let i = self.states.partition_point(|(p, _)| *p <= position);
        &self.states[i - 1]
    }
}

fn evolve(ops: &[Op<'_>], checkpoints: &Checkpoints, pattern: &[Fault]) -> Result<Vec<Complex64>> {
    // Resume no later than the first faulty op, which must still be replayed.
    let first_fault = pattern.first().map_or(ops.len(), |&(k, _)| k as usize);
    let (start, snapshot) = checkpoints.before(first_fault);
    let mut state = snapshot.clone();
    let mut next = pattern.iter().peekable();
    for (i, op) in ops.iter().enumerate().skip(*start) {
        apply_gate(&mut state, op.kind, op.qubits, 0, false)?;
        if let Some(&&(k, code)) = next.peek() {
            if k as usize == i {
                apply_fault(&mut state, op.qubits, code);
                next.next();
            }
        }
    }
    Ok(state)
}

fn apply_fault(state: &mut [Complex64], qubits: &[usize], code: u8) {
    for (j, &q) in qubits.iter().enumerate().take(2) {
        let p = Pauli::ALL[((code >> (2 * j)) & 3) as usize];
        apply_pauli(state, q, p, false);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::build_ghz_mirror;

    #[test]
    fn noiseless_mirror_is_deterministic() {
        let c = build_ghz_mirror(8).unwrap();
        let counts = run_trajectories(&c, &NoiseSpec::noiseless(), 1000, 3).unwrap();
        assert_eq!(counts.get("00000000"), 1000);
    }

    #[test]
    fn contract_errors() {
        let mut c = Circuit::new(1, 1);
        c.x(0);
        let n = NoiseSpec::noiseless();
        assert!(matches!(run_trajectories(&c, &n, 10, 0), Err(Error::Contract(_))));
        c.measure(0, 0);
        assert!(matches!(
            run_trajectories(&c, &n, 0, 0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn seed_determinism() {
        let c = build_ghz_mirror(4).unwrap();
        let n = NoiseSpec::from_single_qubit_rate(0.05).unwrap();
        let a = run_trajectories(&c, &n, 2000, 11).unwrap();
        assert_eq!(a, run_trajectories(&c, &n, 2000, 11).unwrap());
        assert_ne!(a, run_trajectories(&c, &n, 2000, 12).unwrap());
    }

    #[test]
    fn two_qubit_fault_codes_cover_both_qubits() {
        let mut s = zero_state(2);
        // code 1 + 4*3: X on first qubit, Z on second
        apply_fault(&mut s, &[0, 1], 1 + 4 * 3);
        assert!((s[1].norm() - 1.0).abs() < 1e-12);
        let mut s = zero_state(2);
        apply_fault(&mut s, &[0, 1], 4);
        assert!((s[2].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn checkpoint_lookup() {
        let c = build_ghz_mirror(3).unwrap();
        let ops: Vec<Op> = c
            .gates()
            .iter()
            .filter(|g| !g.kind.is_measure())
            .map(|g| Op {
                kind: &g.kind,
                qubits: &g.qubits,
                rate: 0.0,
            })
            .collect();
        let cp = Checkpoints::build(&ops, 3).unwrap();
        assert_eq!(cp.before(0).0, 0);
        assert_eq!(cp.before(ops.len()).0, ops.len());
        let final_state = evolve(&ops, &cp, &[]).unwrap();
        assert!((final_state[0].norm() - 1.0).abs() < 1e-12);
    }
}
