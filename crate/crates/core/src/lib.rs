//! Pauli check sandwiching on an emulated, multi-programmed noisy QPU.
//!
//! The crate covers the whole pipeline: Pauli algebra and Clifford
//! conjugation ([`pauli`]), circuits and basis transpilation ([`circuit`],
//! [`transpile`]), trajectory and density-matrix simulation ([`sim`]),
//! check construction ([`pcs`]), the multi-region QPU ([`qpu`]), discard
//! filtering and weighted ensembles ([`postprocess`]) and noise-map
//! inference ([`characterize`]).

pub mod characterize;
pub mod circuit;
pub mod error;
pub mod pauli;
pub mod pcs;
pub mod postprocess;
pub mod qpu;
pub mod rng;
pub mod sim;
pub mod stats;
pub mod transpile;
pub mod unitary;

pub use characterize::{CalibrationCurve, NoiseEstimate};
pub use circuit::{build_ghz_mirror, build_toffoli, Circuit, Gate, GateKind};
pub use error::{Error, Result};
pub use pauli::{Pauli, PauliString, Phase};
pub use pcs::{CheckPair, SandwichedCircuit};
pub use postprocess::{EnsembleResult, Improvement, ThreadResult, WeightedCounts};
pub use qpu::{Allocation, AllocationPlan, QpuConfig, QpuModel, Region};
pub use sim::{CountsMap, Distribution, NoiseSpec};
