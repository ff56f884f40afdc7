//! Noise-map inference from per-region discard fractions.
//!
//! A calibration curve maps a single-qubit rate `p` (with `p2 = 2p`) to the
//! expected discard fraction of a sandwiched benchmark. Observed discard
//! fractions are inverted through it to absolute rate estimates. The
//! absolute values are only as good as the depolarizing model behind the
//! curve; the ordering of regions does not depend on it.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pcs::SandwichedCircuit;
use crate::postprocess::{discard_fraction, filter_counts, ThreadResult};
use crate::qpu::QpuModel;
use crate::rng::stream_rng;
use crate::sim::{run_trajectories_with_rng, NoiseSpec};
use crate::stats::{isotonic_fit, wilson_interval, Z_95};
use crate::transpile::transpile_to_basis;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub p1: f64,
    /// Discard fraction measured at this rate.
    pub observed_discard: f64,
    /// Isotonic fit of the observed values.
    pub expected_discard: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCurve {
    pub benchmark_label: String,
    pub shots: u64,
    pub points: Vec<CalibrationPoint>,
}

/// `count` evenly spaced rates over `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + i as f64 * (hi - lo) / (count - 1) as f64)
            .collect(),
    }
}

/// Runs `benchmark` at every grid rate and fits a non-decreasing curve to
/// the discard fractions.
pub fn build_calibration_curve(
    benchmark: &SandwichedCircuit,
    p_grid: &[f64],
    shots: u64,
    seed: u64,
) -> Result<CalibrationCurve> {
    if p_grid.is_empty() {
        return Err(Error::InvalidParameter("calibration grid is empty".into()));
    }
    if p_grid.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::InvalidParameter(
            "calibration grid must be strictly increasing".into(),
        ));
    }
    let executable = transpile_to_basis(&benchmark.circuit)?;
    let observed = p_grid
        .par_iter()
        .enumerate()
        .map(|(i, &p)| {
            let noise = NoiseSpec::from_single_qubit_rate(p)?;
            let mut rng = stream_rng(seed, "calibrate", i as u64);
            let raw = run_trajectories_with_rng(&executable, &noise, shots, &mut rng)?;
            let (_, discarded) = filter_counts(&raw, &benchmark.check_bits)?;
            discard_fraction(discarded, raw.shots())
        })
        .collect::<Result<Vec<_>>>()?;
    let fitted = isotonic_fit(&observed, &vec![1.0; observed.len()]);
    Ok(CalibrationCurve {
        benchmark_label: benchmark.circuit.label().to_string(),
        shots,
        points: p_grid
            .iter()
            .zip(observed.iter().zip(fitted))
            .map(|(&p1, (&observed_discard, expected_discard))| CalibrationPoint {
                p1,
                observed_discard,
                expected_discard,
            })
            .collect(),
    })
}

impl CalibrationCurve {
    fn check(&self) -> Result<()> {
        let first = self.points.first().map(|p| p.expected_discard);
        if !self.points.iter().any(|p| Some(p.expected_discard) != first) {
            return Err(Error::Calibration(format!(
                "curve for {:?} has fewer than two distinct discard levels",
                self.benchmark_label
            )));
        }
        if self
            .points
            .windows(2)
            .any(|w| w[0].p1 >= w[1].p1 || w[0].expected_discard > w[1].expected_discard)
        {
            return Err(Error::Calibration(
                "curve must be increasing in p and non-decreasing in discard".into(),
            ));
        }
        Ok(())
    }

    /// Piecewise-linear inverse; the flag is set when `d` lies at or beyond
    /// either end of the curve and the rate is clamped.
    pub fn invert(&self, d: f64) -> Result<(f64, bool)> {
        self.check()?;
        let pts = &self.points;
        let (first, last) = (&pts[0], &pts[pts.len() - 1]);
        if d <= first.expected_discard {
            return Ok((first.p1, true));
        }
        if d > last.expected_discard {
            return Ok((last.p1, true));
        }
        // first knot reaching d, so ties resolve to the lowest rate
        let k = pts.partition_point(|p| p.expected_discard < d);
        let hi = &pts[k];
        if hi.expected_discard == d {
            return Ok((hi.p1, d == last.expected_discard));
        }
        let lo = &pts[k - 1];
        let t = (d - lo.expected_discard) / (hi.expected_discard - lo.expected_discard);
        Ok((lo.p1 + t * (hi.p1 - lo.p1), false))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseEstimate {
    pub region_id: usize,
    #[serde(rename = "d")]
    pub d_observed: f64,
    #[serde(rename = "p_est")]
    pub p_estimated: f64,
    #[serde(with = "ci_pair", rename = "ci")]
    pub ci: (f64, f64),
    pub saturated: bool,
}

impl NoiseEstimate {
    pub fn ci_low(&self) -> f64 {
        self.ci.0
    }

    pub fn ci_high(&self) -> f64 {
        self.ci.1
    }
}

mod ci_pair {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(ci: &(f64, f64), s: S) -> Result<S::Ok, S::Error> {
        [ci.0, ci.1].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(f64, f64), D::Error> {
        let [lo, hi] = <[f64; 2]>::deserialize(d)?;
        Ok((lo, hi))
    }
}

/// One estimate per thread, with a 95% Wilson interval on `d` carried
/// through the inverse curve.
pub fn estimate_noise_map(results: &[ThreadResult], curve: &CalibrationCurve) -> Result<Vec<NoiseEstimate>> {
    curve.check()?;
    results
        .iter()
        .map(|t| {
            let (p, saturated) = curve.invert(t.discard_fraction)?;
            let (d_lo, d_hi) = wilson_interval(t.discarded, t.shots, Z_95);
            let (lo, _) = curve.invert(d_lo)?;
            let (hi, _) = curve.invert(d_hi)?;
            Ok(NoiseEstimate {
                region_id: t.region_id,
                d_observed: t.discard_fraction,
                p_estimated: p,
                ci: (lo.min(p), hi.max(p)),
                saturated,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeatmapFiles {
    pub discard: PathBuf,
    pub p_estimated: PathBuf,
    pub ground_truth: PathBuf,
    pub estimates: PathBuf,
}

/// Writes row-major grid CSVs of observed discard, estimated rate and true
/// rate, plus the estimate records as JSON. Regions without an estimate
/// show as `nan`.
pub fn export_heatmap(estimates: &[NoiseEstimate], qpu: &QpuModel, dir: &Path) -> Result<HeatmapFiles> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (rows, cols) = qpu.grid();
    let mut discard = vec![f64::NAN; rows * cols];
    let mut p_est = vec![f64::NAN; rows * cols];
    for e in estimates {
        if qpu.region(e.region_id).is_none() {
            return Err(Error::InvalidParameter(format!(
                "estimate for unknown region {}",
                e.region_id
            )));
        }
        discard[e.region_id] = e.d_observed;
        p_est[e.region_id] = e.p_estimated;
    }
    let truth: Vec<f64> = qpu.regions().iter().map(|r| r.noise.p1).collect();

    let files = HeatmapFiles {
        discard: dir.join("discard_heatmap.csv"),
        p_estimated: dir.join("p_estimated_heatmap.csv"),
        ground_truth: dir.join("ground_truth_heatmap.csv"),
        estimates: dir.join("noise_estimates.json"),
    };
    write_grid(&files.discard, &discard, cols)?;
    write_grid(&files.p_estimated, &p_est, cols)?;
    write_grid(&files.ground_truth, &truth, cols)?;
    let json = serde_json::to_string_pretty(estimates)?;
    fs::write(&files.estimates, json + "\n").map_err(|e| Error::io(&files.estimates, e))?;
    Ok(files)
}

fn write_grid(path: &Path, values: &[f64], cols: usize) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in values.chunks(cols) {
        w.write_record(row.iter().map(|v| if v.is_nan() { "nan".to_string() } else { v.to_string() }))
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Parses a grid CSV written by [`export_heatmap`].
pub fn read_grid(path: &Path) -> Result<Vec<Vec<f64>>> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_err)?;
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            rec.iter()
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("{}: {v:?}: {e}", path.display())))
                })
                .collect()
        })
        .collect()
}
