//! Runs a validated experiment and writes its artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use log::info;
use pcs_core::characterize::{build_calibration_curve, estimate_noise_map, export_heatmap, HeatmapFiles};
use pcs_core::pcs::{sandwich_prepared, SandwichedCircuit};
use pcs_core::postprocess::{ensemble, fidelity, success_probability, sum_counts, thread_results};
use pcs_core::qpu::{allocate_threads, run_allocations, with_workers, SkippedRegion};
use pcs_core::sim::ideal_distribution;
use pcs_core::stats::spearman;
use pcs_core::{
    AllocationPlan, CalibrationCurve, Circuit, Distribution, Improvement, NoiseEstimate, ThreadResult, WeightedCounts,
};
use serde::Serialize;

use crate::config::Experiment;

pub const PCS_TAG: &str = "mitigate-pcs";
pub const BASELINE_TAG: &str = "mitigate-base";

#[derive(Clone, Debug, Serialize)]
pub struct QpuSummary {
    pub regions: usize,
    pub grid: [usize; 2],
    pub p1: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub permutation: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AllocationSummary {
    pub q_algorithm: usize,
    pub q_ancilla: usize,
    pub max_threads: usize,
    pub threads: usize,
    pub skipped: Vec<SkippedRegion>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ThreadRecord {
    pub thread_id: usize,
    pub region_id: usize,
    pub shots: u64,
    pub discarded: u64,
    pub d: f64,
    pub counts: BTreeMap<String, u64>,
    pub scaled: WeightedCounts,
}

impl From<&ThreadResult> for ThreadRecord {
    fn from(t: &ThreadResult) -> Self {
        Self {
            thread_id: t.thread_id,
            region_id: t.region_id,
            shots: t.shots,
            discarded: t.discarded,
            d: t.discard_fraction,
            counts: t.filtered.counts().clone(),
            scaled: t.scaled.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EnsembleRecord {
    pub pcs: WeightedCounts,
    pub pcs_unfiltered: WeightedCounts,
    pub baseline: WeightedCounts,
}

#[derive(Clone, Debug, Serialize)]
pub struct NoiseSummary {
    pub spearman_vs_truth: Option<f64>,
    pub estimates: Vec<NoiseEstimate>,
}

/// Everything written to `results.json`. Contains no timestamps or paths,
/// so identical inputs give identical bytes.
#[derive(Clone, Debug, Serialize)]
pub struct Results {
    pub benchmark: String,
    pub mode: crate::config::Mode,
    pub seed: u64,
    pub shots: u64,
    pub checks: Vec<[String; 2]>,
    pub ideal: Distribution,
    pub qpu: QpuSummary,
    pub allocation: AllocationSummary,
    pub threads: Vec<ThreadRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<Improvement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success_probability: Option<Improvement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSummary>,
}

#[derive(Debug)]
pub struct Outcome {
    pub results: Option<Results>,
    pub calibration: Option<CalibrationCurve>,
    pub heatmaps: Option<HeatmapFiles>,
    pub summary: String,
}

fn payload_circuit(exp: &Experiment) -> pcs_core::Result<Circuit> {
    let mut c = Circuit::new(exp.payload.num_qubits(), exp.payload.num_clbits()).with_label(exp.payload.label());
    c.append(&exp.prep)?;
    c.append(&exp.payload)?;
    Ok(c)
}

pub fn sandwiched(exp: &Experiment) -> pcs_core::Result<SandwichedCircuit> {
    sandwich_prepared(&exp.prep, &exp.payload, &exp.checks)
}

pub fn unprotected(exp: &Experiment) -> pcs_core::Result<SandwichedCircuit> {
    sandwich_prepared(&exp.prep, &exp.payload, &[])
}

/// Runs every stage the mode asks for and writes artifacts into `out`.
pub fn run_experiment(exp: &Experiment, out: &Path) -> anyhow::Result<Outcome> {
    let workers = exp.config.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let outcome = with_workers(workers, || compute(exp, out))??;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    if let Some(results) = &outcome.results {
        write_json(&out.join("results.json"), results)?;
    }
    if let Some(curve) = &outcome.calibration {
        write_json(&out.join("calibration.json"), curve)?;
    }
    let summary_path = out.join("summary.txt");
    fs::write(&summary_path, &outcome.summary).with_context(|| format!("writing {}", summary_path.display()))?;
    Ok(outcome)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// The experiment without the final file writes, except heatmaps which go
/// straight to `out`.
pub fn compute(exp: &Experiment, out: &Path) -> anyhow::Result<Outcome> {
    let cfg = &exp.config;
    let mode = cfg.mode;
    let pcs = sandwiched(exp)?;
    let mut summary = String::new();
    writeln!(summary, "benchmark: {}", exp.payload.label())?;
    writeln!(summary, "mode: {mode:?}, seed: {}, shots per thread: {}", cfg.seed, cfg.shots)?;
    for (i, c) in exp.checks.iter().enumerate() {
        writeln!(summary, "check {i}: L = {}, R = {}", c.left(), c.right())?;
    }

    let calibration = if mode.calibrates() {
        let shots = exp.calibration.shots().unwrap_or(cfg.shots);
        let grid = exp.calibration.grid();
        info!("calibrating over {} rates at {shots} shots", grid.len());
        let curve = build_calibration_curve(&pcs, &grid, shots, cfg.seed)?;
        writeln!(summary, "calibration: {} rates in [{}, {}], {shots} shots each", grid.len(), grid[0], grid[grid.len() - 1])?;
        Some(curve)
    } else {
        None
    };

    if mode == crate::config::Mode::Calibrate {
        return Ok(Outcome {
            results: None,
            calibration,
            heatmaps: None,
            summary,
        });
    }

    let plan = allocate_threads(&exp.qpu, pcs.num_payload_qubits(), pcs.num_ancillas(), cfg.shots)?;
    write_allocation(&mut summary, &plan, &pcs)?;
    anyhow::ensure!(!plan.is_empty(), "no region can hold one thread");
    info!("running {} threads with checks", plan.allocations.len());
    let runs = run_allocations(&exp.qpu, &pcs, &plan.allocations, cfg.seed, PCS_TAG)?;
    let threads = thread_results(&runs, &pcs.check_bits)?;
    writeln!(summary, "\nthread region        p1   discarded        d")?;
    for t in &threads {
        let p1 = exp.qpu.regions()[t.region_id].noise.p1;
        writeln!(summary, "{:>6} {:>6} {:>9.5} {:>11} {:>8.5}", t.thread_id, t.region_id, p1, t.discarded, t.discard_fraction)?;
    }

    let ideal = ideal_distribution(&payload_circuit(exp)?)?;
    let mut results = Results {
        benchmark: exp.payload.label().to_string(),
        mode,
        seed: cfg.seed,
        shots: cfg.shots,
        checks: exp.checks.iter().map(|c| [c.left().to_string(), c.right().to_string()]).collect(),
        ideal: ideal.clone(),
        qpu: QpuSummary {
            regions: exp.qpu.regions().len(),
            grid: [exp.qpu.grid().0, exp.qpu.grid().1],
            p1: exp.qpu.regions().iter().map(|r| r.noise.p1).collect(),
            permutation: exp.qpu.permutation().map(<[usize]>::to_vec),
        },
        allocation: AllocationSummary {
            q_algorithm: pcs.num_payload_qubits(),
            q_ancilla: pcs.num_ancillas(),
            max_threads: plan.max_threads,
            threads: plan.allocations.len(),
            skipped: plan.skipped.clone(),
        },
        threads: threads.iter().map(ThreadRecord::from).collect(),
        ensemble: None,
        fidelity: None,
        success_probability: None,
        noise: None,
    };

    let mut heatmaps = None;
    if let Some(curve) = calibration.as_ref().filter(|_| mode.characterizes()) {
        let estimates = estimate_noise_map(&threads, curve)?;
        let truth: Vec<f64> = estimates.iter().map(|e| exp.qpu.regions()[e.region_id].noise.p1).collect();
        let est: Vec<f64> = estimates.iter().map(|e| e.p_estimated).collect();
        let rho = spearman(&est, &truth);
        heatmaps = Some(export_heatmap(&estimates, &exp.qpu, out)?);
        writeln!(summary, "\nnoise map (model-dependent absolute rates):")?;
        for e in &estimates {
            writeln!(
                summary,
                "  region {:>3}: p_est {:.5} [{:.5}, {:.5}]{}",
                e.region_id,
                e.p_estimated,
                e.ci_low(),
                e.ci_high(),
                if e.saturated { " (clamped)" } else { "" }
            )?;
        }
        match rho {
            Some(r) => writeln!(summary, "  rank correlation with ground truth: {r:.4}")?,
            None => writeln!(summary, "  rank correlation with ground truth: undefined")?,
        }
        results.noise = Some(NoiseSummary {
            spearman_vs_truth: rho,
            estimates,
        });
    }

    if mode.mitigates() {
        let base = unprotected(exp)?;
        info!("running {} threads without checks", plan.allocations.len());
        let base_runs = run_allocations(&exp.qpu, &base, &plan.allocations, cfg.seed, BASELINE_TAG)?;
        let baseline = sum_counts(base_runs.iter().map(|(_, c)| c));
        let ens = ensemble(threads, &pcs.check_bits)?;
        let fid = Improvement::new(fidelity(&ens.cumulative, &ideal)?, fidelity(&baseline, &ideal)?);
        let succ = Improvement::new(
            success_probability(&ens.cumulative, &ideal)?,
            success_probability(&baseline, &ideal)?,
        );
        writeln!(summary, "\nfidelity (Bhattacharyya vs ideal):")?;
        write_improvement(&mut summary, &fid)?;
        writeln!(summary, "ideal-outcome probability:")?;
        write_improvement(&mut summary, &succ)?;
        results.ensemble = Some(EnsembleRecord {
            pcs: ens.cumulative,
            pcs_unfiltered: ens.unfiltered,
            baseline,
        });
        results.fidelity = Some(fid);
        results.success_probability = Some(succ);
    }

    Ok(Outcome {
        results: Some(results),
        calibration,
        heatmaps,
        summary,
    })
}

fn write_allocation(summary: &mut String, plan: &AllocationPlan, pcs: &SandwichedCircuit) -> std::fmt::Result {
    writeln!(
        summary,
        "\nthreads: {} allocated, chip bound floor(n / ({} + {})) = {}",
        plan.allocations.len(),
        pcs.num_payload_qubits(),
        pcs.num_ancillas(),
        plan.max_threads
    )?;
    for s in &plan.skipped {
        writeln!(summary, "  skipped region {}: {} qubits, {} needed", s.region_id, s.capacity, s.required)?;
    }
    Ok(())
}

fn write_improvement(summary: &mut String, i: &Improvement) -> std::fmt::Result {
    writeln!(summary, "  with checks: {:.6}", i.pcs)?;
    writeln!(summary, "  baseline:    {:.6}", i.base)?;
    writeln!(
        summary,
        "  improvement: {:+.6} absolute, {:+.2}% relative",
        i.improvement_abs,
        100.0 * i.improvement_rel
    )
}

/// Where a run writes: the explicit directory, or a fresh timestamped one
/// under `root`.
pub fn output_dir(explicit: Option<&Path>, root: &Path, label: &str, overwrite: bool) -> anyhow::Result<PathBuf> {
    match explicit {
        Some(dir) => {
            let occupied = dir.read_dir().map(|mut it| it.next().is_some()).unwrap_or(false);
            anyhow::ensure!(
                overwrite || !occupied,
                "output directory {} is not empty; pass --overwrite to replace its files",
                dir.display()
            );
            Ok(dir.to_path_buf())
        }
        None => {
            let stamp = chrono::Local::now().format("%Y%m%d-%H%M%S");
            let mut dir = root.join(format!("{label}-{stamp}"));
            let mut n = 1;
            while dir.exists() {
                dir = root.join(format!("{label}-{stamp}-{n}"));
                n += 1;
            }
            Ok(dir)
        }
    }
}
