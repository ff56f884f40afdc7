//! Experiment configuration files.

use std::fmt;
use std::path::{Path, PathBuf};

use pcs_core::circuit::basis_state_prep;
use pcs_core::characterize::linear_grid;
use pcs_core::pcs::auto_edge_checks;
use pcs_core::sim::MAX_STATEVECTOR_QUBITS;
use pcs_core::{build_ghz_mirror, build_toffoli, CheckPair, Circuit, PauliString, QpuConfig, QpuModel};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Mitigate,
    Characterize,
    Calibrate,
    All,
}

impl Mode {
    pub fn mitigates(self) -> bool {
        matches!(self, Mode::Mitigate | Mode::All)
    }

    pub fn characterizes(self) -> bool {
        matches!(self, Mode::Characterize | Mode::All)
    }

    pub fn calibrates(self) -> bool {
        self != Mode::Mitigate
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BenchmarkSpec {
    GhzMirror {
        width: usize,
    },
    Toffoli {
        #[serde(default = "default_toffoli_input")]
        input_bits: String,
    },
    Custom {
        circuit: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        input_bits: Option<String>,
    },
}

fn default_toffoli_input() -> String {
    "110".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChecksSpec {
    Named(String),
    Explicit(Vec<CheckSpec>),
}

impl Default for ChecksSpec {
    fn default() -> Self {
        ChecksSpec::Named(AUTO_EDGE.into())
    }
}

pub const AUTO_EDGE: &str = "auto-edge";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub left: String,
    pub right: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QpuSpec {
    File(PathBuf),
    Inline(QpuConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum CalibrationSpec {
    Grid {
        grid: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shots: Option<u64>,
    },
    Linear {
        p_min: f64,
        p_max: f64,
        points: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shots: Option<u64>,
    },
}

impl Default for CalibrationSpec {
    fn default() -> Self {
        CalibrationSpec::Linear {
            p_min: 0.0,
            p_max: 0.05,
            points: 101,
            shots: None,
        }
    }
}

impl CalibrationSpec {
    pub fn grid(&self) -> Vec<f64> {
        match self {
            CalibrationSpec::Grid { grid, .. } => grid.clone(),
            CalibrationSpec::Linear { p_min, p_max, points, .. } => linear_grid(*p_min, *p_max, *points),
        }
    }

    pub fn shots(&self) -> Option<u64> {
        match self {
            CalibrationSpec::Grid { shots, .. } | CalibrationSpec::Linear { shots, .. } => *shots,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub benchmark: BenchmarkSpec,
    #[serde(default)]
    pub checks: ChecksSpec,
    pub qpu: QpuSpec,
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

#[derive(Debug)]
pub enum ConfigError {
    Read { path: PathBuf, source: std::io::Error },
    Parse { line: usize, column: usize, message: String },
    Invalid(Vec<String>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Read { path, source } => write!(f, "cannot read {}: {source}", path.display()),
            ConfigError::Parse { line, column, message } => {
                write!(f, "config parse error at line {line}, column {column}: {message}")
            }
            ConfigError::Invalid(violations) => {
                writeln!(f, "invalid config ({} problems):", violations.len())?;
                for v in violations {
                    writeln!(f, "  - {v}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

/// The resolved pieces an experiment runs on.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    /// Unprotected input-state preparation.
    pub prep: Circuit,
    pub payload: Circuit,
    pub checks: Vec<CheckPair>,
    pub qpu: QpuModel,
    pub calibration: CalibrationSpec,
}

pub fn load_config(path: &Path) -> Result<Experiment, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    validate_config(&text, path.parent())
}

/// Parses and checks a config, reporting every problem found. Relative
/// file references resolve against `base_dir`.
pub fn validate_config(raw: &str, base_dir: Option<&Path>) -> Result<Experiment, ConfigError> {
    let config: ExperimentConfig = serde_json::from_str(raw).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    resolve(config, base_dir)
}

fn resolve_path(p: &Path, base_dir: Option<&Path>) -> PathBuf {
    match base_dir {
        Some(base) if p.is_relative() => base.join(p),
        _ => p.to_path_buf(),
    }
}

/// Checks a parsed config and builds its circuits and QPU.
pub fn resolve(config: ExperimentConfig, base_dir: Option<&Path>) -> Result<Experiment, ConfigError> {
    let mut violations = Vec::new();

    if config.shots == 0 {
        violations.push("shots must be ≥ 1".to_string());
    }
    if config.workers == Some(0) {
        violations.push("workers must be ≥ 1".to_string());
    }

    let circuits = match benchmark_circuits(&config.benchmark, base_dir) {
        Ok(c) => Some(c),
        Err(v) => {
            violations.extend(v);
            None
        }
    };

    let checks = circuits.as_ref().and_then(|(_, payload)| match &config.checks {
        ChecksSpec::Named(name) if name == AUTO_EDGE => auto_edge_checks(payload)
            .map_err(|e| violations.push(format!("checks: {e}")))
            .ok(),
        ChecksSpec::Named(name) => {
            violations.push(format!("checks: unknown selection {name:?}, expected {AUTO_EDGE:?} or a list"));
            None
        }
        ChecksSpec::Explicit(list) => {
            let before = violations.len();
            let pairs: Vec<CheckPair> = list
                .iter()
                .enumerate()
                .filter_map(|(i, spec)| match explicit_check(spec, payload) {
                    Ok(pair) => Some(pair),
                    Err(e) => {
                        violations.push(format!("checks[{i}] ({}, {}): {e}", spec.left, spec.right));
                        None
                    }
                })
                .collect();
            (violations.len() == before).then_some(pairs)
        }
    });

    if let (Some((_, payload)), Some(checks)) = (&circuits, &checks) {
        let width = payload.num_qubits() + checks.len();
        if width > MAX_STATEVECTOR_QUBITS {
            violations.push(format!(
                "benchmark needs {width} qubits with its checks; the simulator handles at most {MAX_STATEVECTOR_QUBITS}"
            ));
        }
    }

    let qpu = match &config.qpu {
        QpuSpec::Inline(q) => Ok(q.clone()),
        QpuSpec::File(p) => {
            let path = resolve_path(p, base_dir);
            std::fs::read_to_string(&path)
                .map_err(|e| format!("qpu: cannot read {}: {e}", path.display()))
                .and_then(|text| {
                    serde_json::from_str::<QpuConfig>(&text)
                        .map_err(|e| format!("qpu: {}: {e}", path.display()))
                })
        }
    }
    .and_then(|q| q.build(config.seed).map_err(|e| format!("qpu: {e}")));
    let qpu = match qpu {
        Ok(q) => Some(q),
        Err(v) => {
            violations.push(v);
            None
        }
    };
    if let (Some(qpu), Some((_, payload)), Some(checks)) = (&qpu, &circuits, &checks) {
        let need = payload.num_qubits() + checks.len();
        if !qpu.regions().iter().any(|r| r.qubit_count >= need) {
            violations.push(format!(
                "qpu: no region holds a {need}-qubit thread ({} payload + {} ancilla)",
                payload.num_qubits(),
                checks.len()
            ));
        }
    }

    let calibration = config.calibration.clone().unwrap_or_default();
    let grid = calibration.grid();
    if grid.is_empty() {
        violations.push("calibration: grid is empty".into());
    }
    if grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
        violations.push("calibration: rates must lie in [0, 1]".into());
    }
    if grid.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        violations.push("calibration: grid must be strictly increasing".into());
    }
    if calibration.shots() == Some(0) {
        violations.push("calibration: shots must be ≥ 1".into());
    }

    match (violations.is_empty(), circuits, checks, qpu) {
        (true, Some((prep, payload)), Some(checks), Some(qpu)) => Ok(Experiment {
            config,
            prep,
            payload,
            checks,
            qpu,
            calibration,
        }),
        _ => Err(ConfigError::Invalid(violations)),
    }
}

fn benchmark_circuits(spec: &BenchmarkSpec, base_dir: Option<&Path>) -> Result<(Circuit, Circuit), Vec<String>> {
    let prep_for = |bits: &str, n: usize| -> Result<Circuit, String> {
        if bits.len() != n {
            return Err(format!(
                "benchmark: input_bits {bits:?} has {} bits, payload has {n} qubits",
                bits.len()
            ));
        }
        basis_state_prep(bits).map_err(|e| format!("benchmark: {e}"))
    };
    match spec {
        BenchmarkSpec::GhzMirror { width } => {
            let payload = build_ghz_mirror(*width).map_err(|_| vec![format!("benchmark: ghz_mirror width must be ≥ 2, got {width}")])?;
            Ok((Circuit::new(*width, 0), payload))
        }
        BenchmarkSpec::Toffoli { input_bits } => {
            let prep = prep_for(input_bits, 3).map_err(|e| vec![e])?;
            Ok((prep, build_toffoli()))
        }
        BenchmarkSpec::Custom { circuit, input_bits } => {
            let path = resolve_path(circuit, base_dir);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| vec![format!("benchmark: cannot read {}: {e}", path.display())])?;
            let payload =
                Circuit::from_json(&text).map_err(|e| vec![format!("benchmark: {}: {e}", path.display())])?;
            let mut problems = Vec::new();
            if !payload.has_measurements() {
                problems.push(format!("benchmark: {} has no measurements", path.display()));
            }
            let prep = match input_bits {
                Some(bits) => prep_for(bits, payload.num_qubits()).map_err(|e| problems.push(e)).ok(),
                None => Some(Circuit::new(payload.num_qubits(), 0)),
            };
            match prep {
                Some(prep) if problems.is_empty() => Ok((prep, payload)),
                _ => Err(problems),
            }
        }
    }
}

fn explicit_check(spec: &CheckSpec, payload: &Circuit) -> Result<CheckPair, String> {
    let left: PauliString = spec.left.parse().map_err(|e| format!("{e}"))?;
    let right: PauliString = spec.right.parse().map_err(|e| format!("{e}"))?;
    let n = payload.num_qubits();
    if left.num_qubits() != n || right.num_qubits() != n {
        return Err(format!("checks must act on all {n} payload qubits"));
    }
    CheckPair::new(left, right, payload).map_err(|e| format!("{e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const REPLICATION: &str = r#"{
        "benchmark": {"type": "ghz_mirror", "width": 8},
        "checks": [{"left": "+XIIIIIII", "right": "+XIIIIIII"},
                   {"left": "+IIIIIIIX", "right": "+IIIIIIIX"}],
        "qpu": {"regions": 60, "qubits_per_region": 10, "p_min": 0.0005, "p_max": 0.03, "grid": [6, 10]},
        "shots": 10000,
        "seed": 2024,
        "mode": "mitigate"
    }"#;

    #[test]
    fn replication_config_parses() {
        let exp = validate_config(REPLICATION, None).unwrap();
        assert_eq!(exp.qpu.regions().len(), 60);
        assert_eq!(exp.checks.len(), 2);
        assert_eq!(exp.config.shots, 10000);
    }

    #[test]
    fn round_trip() {
        let exp = validate_config(REPLICATION, None).unwrap();
        let text = serde_json::to_string(&exp.config).unwrap();
        let again = validate_config(&text, None).unwrap();
        assert_eq!(again.config, exp.config);
    }

    #[test]
    fn violations_are_aggregated() {
        let raw = r#"{
            "benchmark": {"type": "ghz_mirror", "width": 1},
            "qpu": {"regions": 4, "qubits_per_region": 10, "p_min": 0.02, "p_max": 0.01},
            "shots": 0,
            "workers": 0
        }"#;
        let Err(ConfigError::Invalid(v)) = validate_config(raw, None) else {
            panic!("expected violations");
        };
        assert!(v.iter().any(|s| s == "shots must be ≥ 1"), "{v:?}");
        assert!(v.iter().any(|s| s.contains("width")), "{v:?}");
        assert!(v.iter().any(|s| s.starts_with("qpu:")), "{v:?}");
        assert!(v.iter().any(|s| s.contains("workers")), "{v:?}");
    }

    #[test]
    fn invalid_check_is_named() {
        let raw = r#"{
            "benchmark": {"type": "toffoli"},
            "checks": [{"left": "+IIZ", "right": "+IIZ"}],
            "qpu": {"rates": [0.01], "qubits_per_region": 4},
            "shots": 10
        }"#;
        let Err(ConfigError::Invalid(v)) = validate_config(raw, None) else {
            panic!("expected violations");
        };
        assert_eq!(v.len(), 1);
        assert!(v[0].starts_with("checks[0] (+IIZ, +IIZ)"), "{v:?}");
    }

    #[test]
    fn parse_error_has_location() {
        let Err(ConfigError::Parse { line, .. }) = validate_config("{\n  \"shots\": ,\n}", None) else {
            panic!("expected parse error");
        };
        assert_eq!(line, 2);
    }

    #[test]
    fn missing_files_reported() {
        let raw = r#"{
            "benchmark": {"type": "custom", "circuit": "nope.json"},
            "qpu": "missing_qpu.json",
            "shots": 10
        }"#;
        let Err(ConfigError::Invalid(v)) = validate_config(raw, Some(Path::new("/nonexistent"))) else {
            panic!("expected violations");
        };
        assert_eq!(v.len(), 2, "{v:?}");
    }

    #[test]
    fn region_capacity_checked() {
        let raw = r#"{
            "benchmark": {"type": "ghz_mirror", "width": 8},
            "qpu": {"regions": 2, "qubits_per_region": 9, "p_min": 0.01, "p_max": 0.02},
            "shots": 10
        }"#;
        let Err(ConfigError::Invalid(v)) = validate_config(raw, None) else {
            panic!("expected violations");
        };
        assert!(v[0].contains("10-qubit thread"), "{v:?}");
    }
}
