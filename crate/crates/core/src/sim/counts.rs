use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Measured outcome counts keyed by bit string (clbit 0 leftmost).
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawCounts")]
pub struct CountsMap {
    shots: u64,
    counts: BTreeMap<String, u64>,
}

#[derive(Deserialize)]
struct RawCounts {
    shots: u64,
    counts: BTreeMap<String, u64>,
}

impl TryFrom<RawCounts> for CountsMap {
    type Error = Error;

    fn try_from(raw: RawCounts) -> Result<Self> {
        let c = CountsMap::from_counts(raw.counts)?;
        if c.shots != raw.shots {
            return Err(Error::Contract(format!(
                "counts sum to {} but shots is {}",
                c.shots, raw.shots
            )));
        }
        Ok(c)
    }
}

impl CountsMap {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a map, dropping zero entries and checking key widths agree.
    pub fn from_counts(counts: BTreeMap<String, u64>) -> Result<Self> {
        let mut width = None;
        for key in counts.keys() {
            if !key.chars().all(|c| c == '0' || c == '1') {
                return Err(Error::Contract(format!("outcome key {key:?} is not a bit string")));
            }
            match width {
                None => width = Some(key.len()),
                Some(w) if w != key.len() => {
                    return Err(Error::Contract(format!(
                        "outcome keys have mixed widths {w} and {}",
                        key.len()
                    )))
                }
                _ => {}
            }
        }
        let counts: BTreeMap<String, u64> = counts.into_iter().filter(|(_, n)| *n > 0).collect();
        Ok(Self {
            shots: counts.values().sum(),
            counts,
        })
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn get(&self, key: &str) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    /// Key width, `None` when empty.
    pub fn num_bits(&self) -> Option<usize> {
        self.counts.keys().next().map(String::len)
    }

    pub fn is_empty(&self) -> bool {
        self.shots == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &u64)> {
        self.counts.iter()
    }

    /// Outcome frequencies; empty for an empty map.
    pub fn probabilities(&self) -> BTreeMap<String, f64> {
        self.counts
            .iter()
            .map(|(k, &n)| (k.clone(), n as f64 / self.shots as f64))
            .collect()
    }

    /// Keeps only the listed bit positions, in the listed order.
    pub fn project(&self, bits: &[usize]) -> Result<CountsMap> {
        let mut out = BTreeMap::new();
        for (key, &n) in &self.counts {
            let bytes = key.as_bytes();
            if let Some(&b) = bits.iter().find(|&&b| b >= bytes.len()) {
                return Err(Error::InputShape(format!(
                    "bit {b} outside {}-bit outcome",
                    bytes.len()
                )));
            }
            let projected: String = bits.iter().map(|&b| bytes[b] as char).collect();
            *out.entry(projected).or_insert(0) += n;
        }
        CountsMap::from_counts(out)
    }
}
