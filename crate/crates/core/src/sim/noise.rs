use serde::{Deserialize, Serialize};

use crate::circuit::GateKind;
use crate::error::{Error, Result};

/// Depolarizing probabilities applied after single- and two-qubit gates.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub p1: f64,
    pub p2: f64,
}

impl NoiseSpec {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        for (name, p) in [("p1", p1), ("p2", p2)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in [0, 1], got {p}"
                )));
            }
        }
        Ok(Self { p1, p2 })
    }

    /// Single-qubit rate `p` with two-qubit rate `2p`.
    pub fn from_single_qubit_rate(p: f64) -> Result<Self> {
        Self::new(p, 2.0 * p)
    }

    pub fn noiseless() -> Self {
        Self { p1: 0.0, p2: 0.0 }
    }

    pub fn is_noiseless(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0
    }

    /// Error probability attached to a gate. `RZ` and measurements are
    /// noiseless; three-qubit gates have no channel and are rejected.
    pub fn rate_for(&self, kind: &GateKind) -> Result<f64> {
        match kind {
            GateKind::RZ(_) | GateKind::Measure => Ok(0.0),
            GateKind::CCX => Err(Error::UnsupportedGate(
                "CCX has no noise channel; transpile before noisy simulation".into(),
            )),
            k if k.arity() == 2 => Ok(self.p2),
            _ => Ok(self.p1),
        }
    }
}
