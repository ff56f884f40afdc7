use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pcs_core::pcs::{auto_edge_checks, sandwich};
use pcs_core::sim::{density_matrix_reference, run_trajectories};
use pcs_core::transpile::transpile_to_basis;
use pcs_core::{build_ghz_mirror, build_toffoli, NoiseSpec, PauliString};

fn pauli_algebra(c: &mut Criterion) {
    let a: PauliString = "+XYZIXYZIXYZIXYZ".parse().unwrap();
    let b: PauliString = "-iZZXXYYIIZZXXYY".parse().unwrap();
    c.bench_function("pauli_mul_16", |bench| bench.iter(|| black_box(&a).mul(black_box(&b)).unwrap()));
    c.bench_function("pauli_commutes_16", |bench| {
        bench.iter(|| black_box(&a).commutes(black_box(&b)).unwrap())
    });
    let ghz = build_ghz_mirror(16).unwrap();
    c.bench_function("conjugate_through_ghz16", |bench| {
        bench.iter(|| black_box(&a).conjugate_through(black_box(&ghz)).unwrap())
    });
}

fn trajectories(c: &mut Criterion) {
    let mut group = c.benchmark_group("trajectories_1000_shots");
    group.sample_size(10);
    for p in [0.0005, 0.01, 0.03] {
        let u = build_ghz_mirror(8).unwrap();
        let s = sandwich(&u, &auto_edge_checks(&u).unwrap()).unwrap();
        let exe = transpile_to_basis(&s.circuit).unwrap();
        let noise = NoiseSpec::from_single_qubit_rate(p).unwrap();
        group.bench_with_input(BenchmarkId::new("ghz8_pcs", p), &p, |bench, _| {
            bench.iter(|| run_trajectories(&exe, &noise, 1000, 1).unwrap())
        });
    }
    group.finish();
}

fn density(c: &mut Criterion) {
    let t = transpile_to_basis(&build_toffoli()).unwrap();
    let noise = NoiseSpec::from_single_qubit_rate(0.01).unwrap();
    c.bench_function("density_toffoli", |bench| {
        bench.iter(|| density_matrix_reference(black_box(&t), &noise).unwrap())
    });
}

criterion_group!(benches, pauli_algebra, trajectories, density);
criterion_main!(benches);
