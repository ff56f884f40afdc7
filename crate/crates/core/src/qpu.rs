//! The emulated multi-region QPU and multi-programmed execution.

use log::warn;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pcs::SandwichedCircuit;
use crate::rng::stream_rng;
use crate::sim::{run_trajectories_with_rng, CountsMap, NoiseSpec};
use crate::transpile::transpile_to_basis;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub id: usize,
    pub qubit_count: usize,
    /// Ground-truth noise, hidden from the characterization pipeline.
    pub noise: NoiseSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QpuModel {
    regions: Vec<Region>,
    grid: (usize, usize),
    /// `permutation[i]` is the sweep index whose rate region `i` received,
    /// when the layout was shuffled.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    permutation: Option<Vec<usize>>,
}

/// Most square `rows × cols == n` with `rows <= cols`.
pub fn default_grid(n: usize) -> (usize, usize) {
    let rows = (1..=n).take_while(|r| r * r <= n).filter(|r| n.is_multiple_of(*r)).last().unwrap_or(1);
    (rows, n / rows.max(1))
}

impl QpuModel {
    pub fn new(regions: Vec<Region>, grid: (usize, usize)) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::InvalidParameter("a QPU needs at least one region".into()));
        }
        if grid.0 * grid.1 != regions.len() {
            return Err(Error::InvalidParameter(format!(
                "grid {}x{} does not hold {} regions",
                grid.0,
                grid.1,
                regions.len()
            )));
        }
        for (i, r) in regions.iter().enumerate() {
            if r.id != i {
                return Err(Error::InvalidParameter(format!(
                    "region at position {i} has id {}",
                    r.id
                )));
            }
            NoiseSpec::new(r.noise.p1, r.noise.p2)?;
        }
        Ok(Self {
            regions,
            grid,
            permutation: None,
        })
    }

    /// Regions with `p1` evenly spaced over `[p_min, p_max]` and `p2 = 2·p1`.
    pub fn linear_sweep(regions: usize, qubits_per_region: usize, p_min: f64, p_max: f64) -> Result<Self> {
        if regions == 0 {
            return Err(Error::InvalidParameter("regions must be at least 1".into()));
        }
        if !(0.0 <= p_min && p_min <= p_max) {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= p_min <= p_max, got [{p_min}, {p_max}]"
            )));
        }
        let rates: Vec<f64> = (0..regions)
            .map(|i| {
                if regions == 1 {
                    p_min
                } else {
                    p_min + i as f64 * (p_max - p_min) / (regions - 1) as f64
                }
            })
            .collect();
        Self::from_rates(&rates, qubits_per_region, default_grid(regions))
    }

    /// One region per single-qubit rate, each with `p2 = 2·p1`.
    pub fn from_rates(rates: &[f64], qubits_per_region: usize, grid: (usize, usize)) -> Result<Self> {
        let regions = rates
            .iter()
            .enumerate()
            .map(|(id, &p)| {
                Ok(Region {
                    id,
                    qubit_count: qubits_per_region,
                    noise: NoiseSpec::from_single_qubit_rate(p)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(regions, grid)
    }

    pub fn with_grid(mut self, rows: usize, cols: usize) -> Result<Self> {
        if rows * cols != self.regions.len() {
            return Err(Error::InvalidParameter(format!(
                "grid {rows}x{cols} does not hold {} regions",
                self.regions.len()
            )));
        }
        self.grid = (rows, cols);
        Ok(self)
    }

    /// Randomly reassigns the noise levels among regions.
    pub fn shuffled(mut self, seed: u64) -> Self {
        let mut order: Vec<usize> = (0..self.regions.len()).collect();
        order.shuffle(&mut stream_rng(seed, "qpu-layout", 0));
        let noises: Vec<NoiseSpec> = self.regions.iter().map(|r| r.noise).collect();
        for (region, &src) in self.regions.iter_mut().zip(&order) {
            region.noise = noises[src];
        }
        self.permutation = Some(order);
        self
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region(&self, id: usize) -> Option<&Region> {
        self.regions.get(id)
    }

    pub fn grid(&self) -> (usize, usize) {
        self.grid
    }

    pub fn permutation(&self) -> Option<&[usize]> {
        self.permutation.as_deref()
    }

    pub fn total_qubits(&self) -> usize {
        self.regions.iter().map(|r| r.qubit_count).sum()
    }

    /// Row-major `(row, col)` heatmap cell of a region.
    pub fn cell(&self, region_id: usize) -> (usize, usize) {
        (region_id / self.grid.1, region_id % self.grid.1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub thread_id: usize,
    pub region_id: usize,
    pub shots: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SkippedRegion {
    pub region_id: usize,
    pub capacity: usize,
    pub required: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AllocationPlan {
    /// `⌊n / (q_algorithm + q_ancilla)⌋` over the whole chip.
    pub max_threads: usize,
    pub allocations: Vec<Allocation>,
    pub skipped: Vec<SkippedRegion>,
}

impl AllocationPlan {
    pub fn is_empty(&self) -> bool {
        self.allocations.is_empty()
    }
}

/// One thread per region that can hold `q_algorithm + q_ancilla` qubits.
///
/// The chip-wide bound `⌊n / (q_algorithm + q_ancilla)⌋` is reported
/// alongside; the two agree whenever every region is exactly one thread
/// wide.
pub fn allocate_threads(
    qpu: &QpuModel,
    q_algorithm: usize,
    q_ancilla: usize,
    shots: u64,
) -> Result<AllocationPlan> {
    let required = q_algorithm + q_ancilla;
    if required == 0 {
        return Err(Error::InvalidParameter(
            "a thread needs at least one qubit".into(),
        ));
    }
    let mut allocations = Vec::new();
    let mut skipped = Vec::new();
    for region in qpu.regions() {
        if region.qubit_count >= required {
            allocations.push(Allocation {
                thread_id: allocations.len(),
                region_id: region.id,
                shots,
            });
        } else {
            warn!(
                "region {} has {} qubits, thread needs {required}; skipped",
                region.id, region.qubit_count
            );
            skipped.push(SkippedRegion {
                region_id: region.id,
                capacity: region.qubit_count,
                required,
            });
        }
    }
    Ok(AllocationPlan {
        max_threads: qpu.total_qubits() / required,
        allocations,
        skipped,
    })
}

/// Runs one copy of `circuit` per allocation, each under its own region's
/// noise and its own random stream keyed by `(seed, tag, thread_id)`.
///
/// Work is spread over the current rayon pool; results come back ordered by
/// thread id and do not depend on scheduling.
pub fn run_multiprogram(
    qpu: &QpuModel,
    circuit: &SandwichedCircuit,
    shots: u64,
    seed: u64,
    tag: &str,
) -> Result<Vec<(Allocation, CountsMap)>> {
    let plan = allocate_threads(qpu, circuit.num_payload_qubits(), circuit.num_ancillas(), shots)?;
    if plan.is_empty() {
        return Err(Error::Contract(format!(
            "no region can hold a {}-qubit thread",
            circuit.circuit.num_qubits()
        )));
    }
    run_allocations(qpu, circuit, &plan.allocations, seed, tag)
}

pub fn run_allocations(
    qpu: &QpuModel,
    circuit: &SandwichedCircuit,
    allocations: &[Allocation],
    seed: u64,
    tag: &str,
) -> Result<Vec<(Allocation, CountsMap)>> {
    let executable = transpile_to_basis(&circuit.circuit)?;
    allocations
        .par_iter()
        .map(|alloc| {
            let region = qpu.region(alloc.region_id).ok_or_else(|| {
                Error::InvalidParameter(format!("unknown region {}", alloc.region_id))
            })?;
            let mut rng = stream_rng(seed, tag, alloc.thread_id as u64);
            let counts = run_trajectories_with_rng(&executable, &region.noise, alloc.shots, &mut rng)
                .map_err(|e| Error::Thread {
                    thread_id: alloc.thread_id,
                    source: Box::new(e),
                })?;
            Ok((alloc.clone(), counts))
        })
        .collect()
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// On-disk QPU description: either a linear sweep or explicit rates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum QpuConfig {
    Sweep {
        regions: usize,
        qubits_per_region: usize,
        p_min: f64,
        p_max: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid: Option<[usize; 2]>,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        shuffle: bool,
    },
    Explicit {
        rates: Vec<f64>,
        qubits_per_region: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid: Option<[usize; 2]>,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        shuffle: bool,
    },
}

impl QpuConfig {
    /// Builds the model; `seed` drives the layout shuffle when requested.
    pub fn build(&self, seed: u64) -> Result<QpuModel> {
        let (qpu, grid, shuffle) = match self {
            QpuConfig::Sweep {
                regions,
                qubits_per_region,
                p_min,
                p_max,
                grid,
                shuffle,
            } => (
                QpuModel::linear_sweep(*regions, *qubits_per_region, *p_min, *p_max)?,
                grid,
                *shuffle,
            ),
            QpuConfig::Explicit {
                rates,
                qubits_per_region,
                grid,
                shuffle,
            } => (
                QpuModel::from_rates(rates, *qubits_per_region, default_grid(rates.len().max(1)))?,
                grid,
                *shuffle,
            ),
        };
        let qpu = match grid {
            Some([r, c]) => qpu.with_grid(*r, *c)?,
            None => qpu,
        };
        Ok(if shuffle { qpu.shuffled(seed) } else { qpu })
    }
}
