use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"{
    "benchmark": {"type": "ghz_mirror", "width": 4},
    "checks": "auto-edge",
    "qpu": {"regions": 6, "qubits_per_region": 6, "p_min": 0.001, "p_max": 0.03},
    "shots": 2000,
    "seed": 5,
    "mode": "all",
    "calibration": {"p_min": 0.0, "p_max": 0.04, "points": 21}
}"#;

fn pcs(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcs"))
        .args(args)
        .env("PCS_OUTPUT_ROOT", dir.join("root"))
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.json", SMALL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    for (out, workers) in [(&a, "1"), (&b, "3")] {
        let o = pcs(&["--config", &cfg, "--out", out.to_str().unwrap(), "--workers", workers], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let o = pcs(&["--config", &cfg, "--out", c.to_str().unwrap(), "--seed", "6"], dir.path());
    assert!(o.status.success());
    let ra = fs::read(a.join("results.json")).unwrap();
    assert_eq!(ra, fs::read(b.join("results.json")).unwrap());
    assert_ne!(ra, fs::read(c.join("results.json")).unwrap());
    for f in ["summary.txt", "calibration.json", "discard_heatmap.csv", "p_estimated_heatmap.csv", "ground_truth_heatmap.csv", "noise_estimates.json"] {
        assert!(a.join(f).exists(), "{f}");
    }
    let results: serde_json::Value = serde_json::from_slice(&ra).unwrap();
    assert_eq!(results["threads"].as_array().unwrap().len(), 6);
    for key in ["thread_id", "region_id", "shots", "discarded", "d", "counts", "scaled"] {
        assert!(results["threads"][0].get(key).is_some(), "{key}");
    }
    for key in ["pcs", "base", "improvement_abs", "improvement_rel"] {
        assert!(results["fidelity"][key].is_f64(), "{key}");
    }
    let summary = fs::read_to_string(a.join("summary.txt")).unwrap();
    assert!(summary.contains("chip bound floor(n / (4 + 2)) = 6"), "{summary}");
}

#[test]
fn default_output_is_timestamped_and_overwrite_is_explicit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.json", &SMALL.replace("\"all\"", "\"calibrate\""));
    let o = pcs(&["--config", &cfg], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let runs: Vec<_> = fs::read_dir(dir.path().join("root")).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(runs.len(), 1);
    let run = &runs[0];
    assert!(run.file_name().unwrap().to_str().unwrap().starts_with("ghz_mirror_4-"));
    assert!(run.join("calibration.json").exists());
    assert!(!run.join("results.json").exists());

    let out = run.to_str().unwrap();
    let refused = pcs(&["--config", &cfg, "--out", out], dir.path());
    assert_eq!(refused.status.code(), Some(2));
    let allowed = pcs(&["--config", &cfg, "--out", out, "--overwrite"], dir.path());
    assert!(allowed.status.success());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("malformed.json", "{\"shots\": 10,".to_string(), "parse error"),
        ("zero_shots.json", SMALL.replace("\"shots\": 2000", "\"shots\": 0"), "shots must be ≥ 1"),
        ("bad_check.json", SMALL.replace("\"auto-edge\"", "[{\"left\": \"+ZIII\", \"right\": \"+XIII\"}]"), "checks[0]"),
        ("missing.json", SMALL.replace("{\"regions\": 6, \"qubits_per_region\": 6, \"p_min\": 0.001, \"p_max\": 0.03}", "\"nowhere.json\""), "qpu: cannot read"),
        ("unknown_field.json", SMALL.replace("\"seed\": 5", "\"sed\": 5"), "unknown field"),
    ];
    for (name, text, needle) in cases {
        let cfg = write(dir.path(), name, &text);
        let o = pcs(&["--config", &cfg], dir.path());
        assert_eq!(o.status.code(), Some(2), "{name}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(needle), "{name}: {err}");
    }
    let o = pcs(&["--config", dir.path().join("absent.json").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let cfg = write(dir.path(), "ok.json", SMALL);
    assert_eq!(pcs(&["--config", &cfg, "--workers", "0"], dir.path()).status.code(), Some(2));
}

#[test]
fn run_failures_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.json", &SMALL.replace("\"all\"", "\"mitigate\""));
    let blocker = dir.path().join("not_a_dir");
    fs::write(&blocker, "x").unwrap();
    let o = pcs(&["--config", &cfg, "--out", blocker.join("sub").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn custom_circuit_files_run() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = r#"{"num_qubits": 3, "label": "bell_chain", "gates": [
        {"kind": "H", "qubits": [0]}, {"kind": "CX", "qubits": [0, 1]}, {"kind": "CX", "qubits": [1, 2]},
        {"kind": "CX", "qubits": [1, 2]}, {"kind": "CX", "qubits": [0, 1]}, {"kind": "H", "qubits": [0]},
        {"kind": "MEASURE", "qubits": [0], "clbit": 0}, {"kind": "MEASURE", "qubits": [1], "clbit": 1},
        {"kind": "MEASURE", "qubits": [2], "clbit": 2}]}"#;
    write(dir.path(), "circuit.json", circuit);
    write(dir.path(), "qpu.json", r#"{"rates": [0.002, 0.01, 0.02, 0.03], "qubits_per_region": 5, "grid": [2, 2]}"#);
    let cfg = write(
        dir.path(),
        "custom.json",
        r#"{"benchmark": {"type": "custom", "circuit": "circuit.json"}, "qpu": "qpu.json", "shots": 3000, "seed": 1}"#,
    );
    let out = dir.path().join("out");
    let o = pcs(&["--config", &cfg, "--out", out.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let results: serde_json::Value = serde_json::from_slice(&fs::read(out.join("results.json")).unwrap()).unwrap();
    assert_eq!(results["benchmark"], "bell_chain");
    assert!(results["fidelity"]["pcs"].as_f64().unwrap() > results["fidelity"]["base"].as_f64().unwrap());
}
