//! Post-selection, discard-weighted scaling and ensembles.
//!
//! Per thread `i`: shots whose check bits are all 0 survive as `c_i`, the
//! rest are counted in `r_i`, and `d_i = r_i / shots_i`. The weighted map is
//! `s_i = c_i · min(d) / d_i` and the ensemble is `S = Σ s_i`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qpu::Allocation;
use crate::sim::{CountsMap, Distribution};

/// Real-valued outcome weights keyed by payload bit string.
pub type WeightedCounts = BTreeMap<String, f64>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThreadResult {
    pub thread_id: usize,
    pub region_id: usize,
    pub shots: u64,
    #[serde(skip)]
    pub raw: CountsMap,
    /// Surviving shots projected onto the payload bits (`c_i`).
    pub filtered: CountsMap,
    /// `r_i`
    pub discarded: u64,
    /// `d_i`
    pub discard_fraction: f64,
    /// `s_i`
    pub scaled: WeightedCounts,
}

/// Drops shots with any check bit set and projects survivors onto the
/// remaining bits, in order.
pub fn filter_counts(raw: &CountsMap, check_bits: &[usize]) -> Result<(CountsMap, u64)> {
    let Some(width) = raw.num_bits() else {
        return Ok((CountsMap::empty(), 0));
    };
    if let Some(&b) = check_bits.iter().find(|&&b| b >= width) {
        return Err(Error::InputShape(format!(
            "check bit {b} outside {width}-bit outcomes"
        )));
    }
    let payload_bits: Vec<usize> = (0..width).filter(|b| !check_bits.contains(b)).collect();
    let mut kept = BTreeMap::new();
    let mut discarded = 0;
    for (key, &n) in raw.iter() {
        let bytes = key.as_bytes();
        if check_bits.iter().any(|&b| bytes[b] == b'1') {
            discarded += n;
        } else {
            let k: String = payload_bits.iter().map(|&b| bytes[b] as char).collect();
            *kept.entry(k).or_insert(0) += n;
        }
    }
    Ok((CountsMap::from_counts(kept)?, discarded))
}

pub fn discard_fraction(discarded: u64, shots: u64) -> Result<f64> {
    if shots == 0 {
        return Err(Error::InvalidParameter("discard fraction needs shots >= 1".into()));
    }
    if discarded > shots {
        return Err(Error::InvalidParameter(format!(
            "discarded {discarded} exceeds shots {shots}"
        )));
    }
    Ok(discarded as f64 / shots as f64)
}

/// Weight applied to a thread with discard fraction `d`: `d_min / d`, with a
/// zero-discard thread weighted 1.
pub fn scale_factor(d: f64, d_min: f64) -> f64 {
    if d == 0.0 {
        1.0
    } else {
        d_min / d
    }
}

pub fn scale_counts(counts: &CountsMap, d: f64, d_min: f64) -> WeightedCounts {
    let w = scale_factor(d, d_min);
    counts.iter().map(|(k, &n)| (k.clone(), n as f64 * w)).collect()
}

/// Filters every thread, then weights each by `min(d) / d_i`.
pub fn thread_results(runs: &[(Allocation, CountsMap)], check_bits: &[usize]) -> Result<Vec<ThreadResult>> {
    let mut results = runs
        .iter()
        .map(|(alloc, raw)| {
            let (filtered, discarded) = filter_counts(raw, check_bits)?;
            Ok(ThreadResult {
                thread_id: alloc.thread_id,
                region_id: alloc.region_id,
                shots: raw.shots(),
                raw: raw.clone(),
                filtered,
                discarded,
                discard_fraction: discard_fraction(discarded, raw.shots())?,
                scaled: WeightedCounts::new(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let d_min = results
        .iter()
        .map(|t| t.discard_fraction)
        .fold(f64::INFINITY, f64::min);
    for t in &mut results {
        t.scaled = scale_counts(&t.filtered, t.discard_fraction, d_min);
    }
    Ok(results)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleResult {
    /// `S`, the keywise sum of the weighted maps.
    pub cumulative: WeightedCounts,
    /// Sum of every thread's raw counts projected onto the payload bits,
    /// with no filtering or weighting.
    pub unfiltered: WeightedCounts,
    pub per_thread: Vec<ThreadResult>,
}

pub fn ensemble(threads: Vec<ThreadResult>, check_bits: &[usize]) -> Result<EnsembleResult> {
    if threads.is_empty() {
        return Err(Error::Contract("ensemble needs at least one thread".into()));
    }
    let mut width = None;
    for t in threads.iter().filter(|t| !t.filtered.is_empty()) {
        let w = t.filtered.num_bits();
        match width {
            None => width = w,
            Some(_) if width != w => {
                return Err(Error::Contract(format!(
                    "thread {} has {:?} payload bits, expected {:?}",
                    t.thread_id, w, width
                )))
            }
            _ => {}
        }
    }
    let mut cumulative = WeightedCounts::new();
    let mut unfiltered = WeightedCounts::new();
    for t in &threads {
        for (k, v) in &t.scaled {
            *cumulative.entry(k.clone()).or_insert(0.0) += v;
        }
        if let Some(w) = t.raw.num_bits() {
            let payload: Vec<usize> = (0..w).filter(|b| !check_bits.contains(b)).collect();
            for (k, &n) in t.raw.project(&payload)?.iter() {
                *unfiltered.entry(k.clone()).or_insert(0.0) += n as f64;
            }
        }
    }
    Ok(EnsembleResult {
        cumulative,
        unfiltered,
        per_thread: threads,
    })
}

/// Unweighted keywise sum of plain count maps.
pub fn sum_counts<'a>(maps: impl IntoIterator<Item = &'a CountsMap>) -> WeightedCounts {
    let mut out = WeightedCounts::new();
    for m in maps {
        for (k, &n) in m.iter() {
            *out.entry(k.clone()).or_insert(0.0) += n as f64;
        }
    }
    out
}

fn normalized(dist: &WeightedCounts) -> Result<WeightedCounts> {
    if let Some((k, v)) = dist.iter().find(|(_, v)| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "weight {v} for outcome {k} is not a finite non-negative number"
        )));
    }
    let total: f64 = dist.values().sum();
    if total <= 0.0 {
        return Err(Error::UndefinedMetric(
            "distribution has no weight".into(),
        ));
    }
    Ok(dist.iter().map(|(k, v)| (k.clone(), v / total)).collect())
}

/// Classical (Bhattacharyya) fidelity `(Σ_x √(q_x·p_x))²` between `dist`
/// (normalized first) and the probability map `ideal`.
pub fn fidelity(dist: &WeightedCounts, ideal: &Distribution) -> Result<f64> {
    let total: f64 = ideal.values().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "ideal distribution sums to {total}"
        )));
    }
    let q = normalized(dist)?;
    let bc: f64 = q
        .iter()
        .filter_map(|(k, qv)| ideal.get(k).map(|pv| (qv * pv).sqrt()))
        .sum();
    Ok((bc * bc).min(1.0))
}

/// Probability mass `dist` puts on the outcomes `ideal` supports.
pub fn success_probability(dist: &WeightedCounts, ideal: &Distribution) -> Result<f64> {
    let q = normalized(dist)?;
    Ok(q.iter()
        .filter(|(k, _)| ideal.get(*k).is_some_and(|p| *p > 0.0))
        .map(|(_, v)| v)
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Improvement {
    pub pcs: f64,
    pub base: f64,
    /// `pcs − base`
    pub improvement_abs: f64,
    /// `(pcs − base) / base`
    pub improvement_rel: f64,
}

impl Improvement {
    pub fn new(pcs: f64, base: f64) -> Self {
        Self {
            pcs,
            base,
            improvement_abs: pcs - base,
            improvement_rel: if base > 0.0 { (pcs - base) / base } else { f64::INFINITY },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(pairs: &[(&str, u64)]) -> CountsMap {
        CountsMap::from_counts(pairs.iter().map(|(k, n)| (k.to_string(), *n)).collect()).unwrap()
    }

    fn alloc(i: usize) -> Allocation {
        Allocation {
            thread_id: i,
            region_id: i,
            shots: 0,
        }
    }

    #[test]
    fn filter_drops_flagged_shots() {
        let raw = counts(&[("000", 900), ("111", 100)]);
        let (f, r) = filter_counts(&raw, &[2]).unwrap();
        assert_eq!(f, counts(&[("00", 900)]));
        assert_eq!(r, 100);
    }

    #[test]
    fn filter_without_flags_is_projection() {
        let raw = counts(&[("010", 5), ("100", 7)]);
        let (f, r) = filter_counts(&raw, &[2]).unwrap();
        assert_eq!(f, raw.project(&[0, 1]).unwrap());
        assert_eq!(r, 0);
        let (e, r) = filter_counts(&CountsMap::empty(), &[0]).unwrap();
        assert!(e.is_empty() && r == 0);
        assert!(filter_counts(&raw, &[3]).is_err());
    }

    #[test]
    fn discard_fraction_examples() {
        assert_eq!(discard_fraction(0, 10000).unwrap(), 0.0);
        assert_eq!(discard_fraction(2500, 10000).unwrap(), 0.25);
        assert!(discard_fraction(1, 0).is_err());
        assert!(discard_fraction(3, 2).is_err());
    }

    #[test]
    fn scaling_examples() {
        let c = counts(&[("00", 800)]);
        assert_eq!(scale_counts(&c, 0.2, 0.1)["00"], 400.0);
        assert_eq!(scale_counts(&c, 0.1, 0.1)["00"], 800.0);
        assert_eq!(scale_counts(&c, 0.0, 0.0)["00"], 800.0);
        assert_eq!(scale_counts(&c, 0.3, 0.0)["00"], 0.0);
    }

    #[test]
    fn ensemble_linearity() {
        let raw = counts(&[("000", 90), ("011", 10)]);
        let runs = vec![(alloc(0), raw.clone()), (alloc(1), raw)];
        let threads = thread_results(&runs, &[2]).unwrap();
        let single = threads[0].scaled.clone();
        let e = ensemble(threads, &[2]).unwrap();
        assert_eq!(e.cumulative["00"], 2.0 * single["00"]);
        assert_eq!(e.unfiltered["00"], 180.0);
        assert_eq!(e.unfiltered["01"], 20.0);
    }

    #[test]
    fn ensemble_rejects_mixed_widths() {
        let runs = vec![
            (alloc(0), counts(&[("000", 1)])),
            (alloc(1), counts(&[("0000", 1)])),
        ];
        let threads = thread_results(&runs, &[0]).unwrap();
        assert!(matches!(ensemble(threads, &[0]), Err(Error::Contract(_))));
        assert!(ensemble(Vec::new(), &[]).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let ideal: Distribution = [("00000000".to_string(), 1.0)].into();
        let same: WeightedCounts = [("00000000".to_string(), 7.0)].into();
        assert!((fidelity(&same, &ideal).unwrap() - 1.0).abs() < 1e-15);
        let uniform: WeightedCounts = (0..256)
            .map(|i| (format!("{i:08b}"), 1.0))
            .collect();
        assert!((fidelity(&uniform, &ideal).unwrap() - 1.0 / 256.0).abs() < 1e-15);
        assert!(matches!(
            fidelity(&WeightedCounts::new(), &ideal),
            Err(Error::UndefinedMetric(_))
        ));
        let bad: Distribution = [("0".to_string(), 0.5)].into();
        assert!(fidelity(&same, &bad).is_err());
    }

    #[test]
    fn improvement_figures() {
        let i = Improvement::new(0.9, 0.75);
        assert!((i.improvement_abs - 0.15).abs() < 1e-12);
        assert!((i.improvement_rel - 0.2).abs() < 1e-12);
    }
}
