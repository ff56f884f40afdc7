use pcs_core::circuit::GateKind;
use pcs_core::unitary::{pauli_to_matrix, unitary_of};
use pcs_core::{Circuit, Pauli, PauliString, Phase};
use proptest::prelude::*;

fn pauli() -> impl Strategy<Value = Pauli> {
    prop::sample::select(Pauli::ALL.to_vec())
}

fn phase() -> impl Strategy<Value = Phase> {
    (0u8..4).prop_map(Phase::from_exponent)
}

fn string(n: usize) -> impl Strategy<Value = PauliString> {
    (prop::collection::vec(pauli(), n), phase()).prop_map(|(ops, ph)| PauliString::from_paulis(&ops, ph))
}

fn strings<const K: usize>(max_n: usize) -> impl Strategy<Value = [PauliString; K]> {
    (1..=max_n).prop_flat_map(|n| prop::array::uniform::<_, K>(string(n)))
}

/// Random circuit over the Clifford generators.
fn clifford_circuit(n: usize, depth: usize) -> impl Strategy<Value = Circuit> {
    let gate = (0u8..7, 0..n, 0..n);
    prop::collection::vec(gate, 0..=depth).prop_map(move |gates| {
        let mut c = Circuit::new(n, 0);
        for (k, a, b) in gates {
            match k {
                0 => c.h(a),
                1 => c.s(a),
                2 => c.sdg(a),
                3 => c.x(a),
                4 => c.y(a),
                5 => c.z(a),
                _ if n > 1 => c.cx(a, if a == b { (b + 1) % n } else { b }),
                _ => c.h(a),
            };
        }
        c
    })
}

fn circuit_and_strings(max_n: usize, depth: usize) -> impl Strategy<Value = (Circuit, PauliString, PauliString)> {
    (1..=max_n).prop_flat_map(move |n| (clifford_circuit(n, depth), string(n), string(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn multiplication_is_associative([a, b, c] in strings::<3>(6)) {
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn commutation_matches_product_order([a, b] in strings::<2>(6)) {
        let ab = a.mul(&b).unwrap();
        let ba = b.mul(&a).unwrap();
        prop_assert!(ab.same_ops(&ba));
        let anticommute = ab.phase() == -ba.phase();
        prop_assert!(a.commutes(&b).unwrap() ^ anticommute);
        prop_assert!(a.commutes(&b).unwrap() == (ab == ba));
    }

    #[test]
    fn product_matches_dense([a, b] in strings::<2>(4)) {
        let dense = &pauli_to_matrix(&a).unwrap() * &pauli_to_matrix(&b).unwrap();
        let symbolic = pauli_to_matrix(&a.mul(&b).unwrap()).unwrap();
        prop_assert!(dense.max_abs_diff(&symbolic) < 1e-12);
    }

    #[test]
    fn text_round_trip(a in (1usize..=20).prop_flat_map(string)) {
        prop_assert_eq!(a.to_string().parse::<PauliString>().unwrap(), a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn conjugation_matches_dense((c, p, _) in circuit_and_strings(5, 20)) {
        let u = unitary_of(&c).unwrap();
        let expected = &(&u * &pauli_to_matrix(&p).unwrap()) * &u.adjoint();
        let got = pauli_to_matrix(&p.conjugate_through(&c).unwrap()).unwrap();
        // Clifford images carry an exact sign, so compare without a free phase.
        prop_assert!(expected.max_abs_diff(&got) < 1e-9);
        prop_assert!(expected.equal_up_to_phase(&got, 1e-9));
    }

    #[test]
    fn conjugation_preserves_commutation((c, a, b) in circuit_and_strings(5, 20)) {
        let ca = a.conjugate_through(&c).unwrap();
        let cb = b.conjugate_through(&c).unwrap();
        prop_assert_eq!(a.commutes(&b).unwrap(), ca.commutes(&cb).unwrap());
    }
}

#[test]
fn non_clifford_gates_rejected() {
    let p: PauliString = "+XZ".parse().unwrap();
    for kind in [GateKind::T, GateKind::Tdg, GateKind::SX, GateKind::RZ(0.3)] {
        let mut c = Circuit::new(2, 0);
        c.push(pcs_core::Gate { kind, qubits: vec![0], clbit: None }).unwrap();
        assert!(matches!(p.conjugate_through(&c), Err(pcs_core::Error::UnsupportedGate(_))));
    }
    let mut c = Circuit::new(3, 0);
    c.ccx(0, 1, 2);
    assert!(PauliString::single(3, 0, Pauli::Z).conjugate_through(&c).is_err());
}

#[test]
fn mismatched_lengths_are_errors() {
    let a: PauliString = "+XX".parse().unwrap();
    let b: PauliString = "+XXX".parse().unwrap();
    assert!(a.mul(&b).is_err());
    assert!(a.commutes(&b).is_err());
}
