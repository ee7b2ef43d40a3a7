//! Measurement histograms and their CSV / JSON encodings.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Outcome histogram over an `num_qubits`-bit register. Outcomes are basis
/// indices; their bitstrings are written most significant bit (qubit 0) first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotRecord {
    num_qubits: usize,
    counts: BTreeMap<usize, u64>,
}

#[derive(Serialize, Deserialize)]
struct ShotRecordJson {
    num_qubits: usize,
    counts: BTreeMap<String, u64>,
}

impl ShotRecord {
    pub fn new(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > 63 {
            return Err(SimError::InvalidRegisterSize { got: num_qubits, max: 63 });
        }
        Ok(Self { num_qubits, counts: BTreeMap::new() })
    }

    pub fn from_counts(num_qubits: usize, counts: impl IntoIterator<Item = (usize, u64)>) -> Result<Self> {
        let mut record = Self::new(num_qubits)?;
        for (outcome, count) in counts {
            record.add(outcome, count)?;
        }
        Ok(record)
    }

    /// Builds a record from a dense count vector of length `2^num_qubits`.
    pub fn from_dense_counts(num_qubits: usize, counts: &[u64]) -> Result<Self> {
        if counts.len() != 1 << num_qubits {
            return Err(SimError::DimensionMismatch { expected: 1 << num_qubits, got: counts.len() });
        }
        Self::from_counts(num_qubits, counts.iter().copied().enumerate())
    }

    pub fn add(&mut self, outcome: usize, count: u64) -> Result<()> {
        if outcome >> self.num_qubits != 0 {
            return Err(SimError::QubitOutOfRange { index: outcome, num_qubits: self.num_qubits });
        }
        if count > 0 {
            *self.counts.entry(outcome).or_insert(0) += count;
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn total_shots(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total_shots() == 0
    }

    pub fn count_of(&self, outcome: usize) -> u64 {
        self.counts.get(&outcome).copied().unwrap_or(0)
    }

    /// Nonzero entries in ascending outcome order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    pub fn dense_counts(&self) -> Vec<u64> {
        let mut dense = vec![0; 1 << self.num_qubits];
        for (k, v) in self.iter() {
            dense[k] = v;
        }
        dense
    }

    /// Empirical distribution over all `2^n` outcomes.
    pub fn frequencies(&self) -> Result<Vec<f64>> {
        let total = self.total_shots();
        if total == 0 {
            return Err(SimError::EmptyInput("shot record has no shots"));
        }
        Ok(self.dense_counts().into_iter().map(|c| c as f64 / total as f64).collect())
    }

    pub fn bitstring(&self, outcome: usize) -> String {
        format!("{outcome:0width$b}", width = self.num_qubits)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("outcome,count\n");
        for (k, v) in self.iter() {
            out.push_str(&format!("{},{}\n", self.bitstring(k), v));
        }
        out
    }

    /// Parses `outcome,count` CSV. Lines starting with `#` are ignored; the
    /// register size is the width of the bitstrings, which must all agree.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some(h) if h.replace(' ', "") == "outcome,count" => {}
            other => return Err(SimError::Parse(format!("expected header `outcome,count`, found {other:?}"))),
        }
        let mut width = None;
        let mut entries = Vec::new();
        for line in lines {
            let (bits, count) =
                line.split_once(',').ok_or_else(|| SimError::Parse(format!("malformed row {line:?}")))?;
            let bits = bits.trim();
            let w = *width.get_or_insert(bits.len());
            if bits.len() != w {
                return Err(SimError::Parse(format!("outcome {bits:?} has width {} (expected {w})", bits.len())));
            }
            entries.push((parse_bits(bits)?, parse_count(count)?));
        }
        let width = width.ok_or(SimError::EmptyInput("shot record has no rows"))?;
        Self::from_counts(width, entries)
    }

    pub fn to_json(&self) -> String {
        let json = ShotRecordJson {
            num_qubits: self.num_qubits,
            counts: self.iter().map(|(k, v)| (self.bitstring(k), v)).collect(),
        };
        serde_json::to_string(&json).expect("shot record serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let json: ShotRecordJson = serde_json::from_str(text)?;
        let mut record = Self::new(json.num_qubits)?;
        for (bits, count) in json.counts {
            if bits.len() != json.num_qubits {
                return Err(SimError::Parse(format!("outcome {bits:?} does not have {} bits", json.num_qubits)));
            }
            record.add(parse_bits(&bits)?, count)?;
        }
        Ok(record)
    }

    /// Loads a record, choosing the format from the extension (`.json` or CSV otherwise).
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json(&text)
        } else {
            Self::from_csv(&text)
        }
    }
}

fn parse_bits(bits: &str) -> Result<usize> {
    if bits.is_empty() || !bits.chars().all(|c| c == '0' || c == '1') {
        return Err(SimError::Parse(format!("outcome {bits:?} is not a bitstring")));
    }
    usize::from_str_radix(bits, 2).map_err(|e| SimError::Parse(e.to_string()))
}

fn parse_count(count: &str) -> Result<u64> {
    count.trim().parse().map_err(|_| SimError::Parse(format!("count {count:?} is not a non-negative integer")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn csv_layout_is_msb_first() {
        let r = ShotRecord::from_counts(5, [(16, 3), (1, 2)]).unwrap();
        assert_eq!(r.to_csv(), "outcome,count\n00001,2\n10000,3\n");
        assert_eq!(r.to_json(), r#"{"num_qubits":5,"counts":{"00001":2,"10000":3}}"#);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(ShotRecord::from_csv("outcome,count\n001,1\n01,2\n").is_err());
        assert!(ShotRecord::from_csv("outcome,count\n0a1,1\n").is_err());
        assert!(ShotRecord::from_csv("x,y\n").is_err());
        assert!(ShotRecord::from_json(r#"{"num_qubits":3,"counts":{"01":1}}"#).is_err());
        assert!(ShotRecord::from_counts(2, [(4, 1)]).is_err());
    }

    #[test]
    fn comment_lines_are_skipped() {
        let r = ShotRecord::from_csv("# config: {}\noutcome,count\n11,4\n").unwrap();
        assert_eq!(r.num_qubits(), 2);
        assert_eq!(r.count_of(3), 4);
    }

    proptest! {
        #[test]
        fn encodings_round_trip(n in 1usize..8, raw in proptest::collection::vec(0u64..50, 1..40)) {
            let dim = 1usize << n;
            let r = ShotRecord::from_counts(n, raw.iter().enumerate().map(|(i, &c)| (i % dim, c))).unwrap();
            prop_assert_eq!(r.total_shots(), raw.iter().sum::<u64>());
            if !r.is_empty() {
                prop_assert_eq!(&ShotRecord::from_csv(&r.to_csv()).unwrap(), &r);
            }
            prop_assert_eq!(&ShotRecord::from_json(&r.to_json()).unwrap(), &r);
        }
    }
}
