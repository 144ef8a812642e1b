//! Union bounds on the block error probability and a low-weight codeword
//! harvester for the code-specific truncated bound.

mod pep;
mod search;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use pep::{hypergeometric_pmf, pep, q_function, tub_code, union_bound_ensemble, UnionBound, UnionTerm};
pub use search::{low_weight_codewords, low_weight_search, FoundCodeword, ImpulseSearch};

/// One spectrum line: `multiplicity` codewords of input weight `a` and
/// output weight `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub a: usize,
    pub b: usize,
    pub multiplicity: u64,
}

/// Partial input-output weight spectrum of one code, keyed by `(a, b)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpectrumList {
    entries: Vec<SpectrumEntry>,
}

impl SpectrumList {
    /// Collapses repeated `(a, b)` keys and drops empty or all-zero lines.
    pub fn from_entries(entries: Vec<SpectrumEntry>) -> Self {
        let mut map: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        for e in entries {
            if e.multiplicity == 0 || e.a + e.b == 0 {
                continue;
            }
            *map.entry((e.a, e.b)).or_default() += e.multiplicity;
        }
        SpectrumList {
            entries: map
                .into_iter()
                .map(|((a, b), multiplicity)| SpectrumEntry { a, b, multiplicity })
                .collect(),
        }
    }

    pub fn entries(&self) -> &[SpectrumEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Sum of two lists of disjoint codeword sets.
    pub fn merge(&self, other: &SpectrumList) -> SpectrumList {
        let mut all = self.entries.clone();
        all.extend_from_slice(&other.entries);
        SpectrumList::from_entries(all)
    }

    pub fn min_output_weight(&self) -> Option<usize> {
        self.entries.iter().map(|e| e.b).min()
    }

    /// Entries with `b <= max_b` only.
    pub fn truncate_output(&self, max_b: usize) -> SpectrumList {
        SpectrumList {
            entries: self.entries.iter().copied().filter(|e| e.b <= max_b).collect(),
        }
    }

    /// JSON array of `[a, b, multiplicity]` triples.
    pub fn to_json(&self) -> String {
        let triples: Vec<[u64; 3]> = self
            .entries
            .iter()
            .map(|e| [e.a as u64, e.b as u64, e.multiplicity])
            .collect();
        serde_json::to_string(&triples).expect("triples serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let triples: Vec<[u64; 3]> = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(SpectrumList::from_entries(
            triples
                .into_iter()
                .map(|[a, b, m]| SpectrumEntry {
                    a: a as usize,
                    b: b as usize,
                    multiplicity: m,
                })
                .collect(),
        ))
    }
}
