//! Error-impulse search for low-weight codewords.
//!
//! The decoder is fed a noiseless all-zero frame with one to three positions
//! pushed hard towards 1. When BP settles on a nonzero codeword instead of
//! the all-zero one, that codeword is close to the impulse and usually of low
//! weight. Companion positions are drawn from the two-hop neighbourhood of
//! the first one, and on quasi-cyclic lifts only block-leading positions
//! need to be tried first.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::decoder::{BpDecoder, DecoderConfig};
use crate::exec::{map_slice, Exec};
use crate::lift::LiftedCode;

use super::{SpectrumEntry, SpectrumList};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpulseSearch {
    /// Number of impulse patterns tried; each runs the amplitude ramp.
    pub effort: usize,
    /// Largest impulse pattern size (1 to 3).
    pub max_subset: usize,
    /// Operating point that sets the L-value of transmitted positions.
    pub es_n0_db: f64,
    /// L-value on punctured positions.
    pub prior: f64,
    /// Impulse strengths, as multiples of the transmitted-bit L-value.
    pub amplitudes: Vec<f64>,
    pub max_iterations: usize,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for ImpulseSearch {
    fn default() -> Self {
        ImpulseSearch {
            effort: 20_000,
            max_subset: 3,
            es_n0_db: 3.0,
            prior: 2.0,
            amplitudes: vec![2.0, 4.0, 8.0, 16.0, 32.0],
            max_iterations: 60,
            exec: Exec::Parallel,
        }
    }
}

/// A harvested codeword in canonical form together with the size of its
/// orbit under the cyclic shifts of the lift.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoundCodeword {
    pub a: usize,
    pub b: usize,
    pub orbit: u64,
    pub support: Vec<usize>,
}

/// Variable positions at distance two (through one check) from `v`.
fn two_hop(code: &LiftedCode, v: usize) -> Vec<usize> {
    let mut set = BTreeSet::new();
    for &c in &code.vars()[v] {
        for &u in &code.checks()[c] {
            if u != v {
                set.insert(u);
            }
        }
    }
    set.into_iter().collect()
}

fn impulse_patterns(code: &LiftedCode, opts: &ImpulseSearch) -> Vec<Vec<usize>> {
    let lift = code.lift();
    let reps: Vec<usize> = if code.is_quasi_cyclic() {
        (0..code.num_vars() / lift).map(|j| j * lift).collect()
    } else {
        (0..code.num_vars()).collect()
    };
    let mut out: Vec<Vec<usize>> = Vec::new();
    let max = opts.max_subset.clamp(1, 3);
    for &r in &reps {
        if out.len() >= opts.effort {
            return out;
        }
        out.push(vec![r]);
    }
    let hoods: Vec<Vec<usize>> = reps.iter().map(|&r| two_hop(code, r)).collect();
    if max >= 2 {
        for (&r, hood) in reps.iter().zip(&hoods) {
            for &u in hood {
                if out.len() >= opts.effort {
                    return out;
                }
                out.push(vec![r, u]);
            }
        }
    }
    if max >= 3 {
        for (&r, hood) in reps.iter().zip(&hoods) {
            for (i, &u) in hood.iter().enumerate() {
                for &w in &hood[i + 1..] {
                    if out.len() >= opts.effort {
                        return out;
                    }
                    out.push(vec![r, u, w]);
                }
            }
        }
    }
    out
}

/// Canonical representative under simultaneous cyclic shifts of all blocks,
/// and the orbit size.
fn canonical(code: &LiftedCode, support: &[usize]) -> (Vec<usize>, u64) {
    if !code.is_quasi_cyclic() {
        return (support.to_vec(), 1);
    }
    let lift = code.lift();
    let first_block = support[0] / lift;
    let rotate = |s: usize| -> Vec<usize> {
        let mut r: Vec<usize> = support
            .iter()
            .map(|&p| (p / lift) * lift + (p % lift + s) % lift)
            .collect();
        r.sort_unstable();
        r
    };
    let mut best: Option<Vec<usize>> = None;
    let mut hits = 0u64;
    for &p in support.iter().take_while(|&&p| p / lift == first_block) {
        let cand = rotate((lift - p % lift) % lift);
        match &best {
            Some(b) if cand > *b => {}
            Some(b) if cand == *b => hits += 1,
            _ => {
                best = Some(cand);
                hits = 1;
            }
        }
    }
    (best.expect("support is nonempty"), lift as u64 / hits)
}

/// Runs the impulse search and returns the distinct codewords found, sorted
/// by `(a + b, a, support)`.
pub fn low_weight_codewords(code: &LiftedCode, opts: &ImpulseSearch) -> Vec<FoundCodeword> {
    let h = code.h();
    let nvars = code.num_vars();
    let lc = ChannelParams::from_db(opts.es_n0_db).llr_mean();
    let mut base = vec![opts.prior; h];
    base.resize(nvars, lc);
    let top = opts.amplitudes.iter().copied().fold(1.0, f64::max);
    let cfg = DecoderConfig {
        max_iterations: opts.max_iterations,
        llr_clip: (top * lc).max(opts.prior) * 2.0,
        early_stop: true,
    };
    let patterns = impulse_patterns(code, opts);
    let chunks: Vec<&[Vec<usize>]> = patterns.chunks(32).collect();
    let harvested: Vec<Vec<Vec<usize>>> = map_slice(opts.exec, &chunks, |chunk| {
        let mut dec = BpDecoder::new(code, cfg);
        let mut llr = base.clone();
        let mut found = Vec::new();
        for pat in chunk.iter() {
            for &amp in &opts.amplitudes {
                for &p in pat {
                    llr[p] = -amp * lc;
                }
                let r = dec.decode(&llr, None);
                for &p in pat {
                    llr[p] = base[p];
                }
                if !r.syndrome_ok {
                    continue;
                }
                let support: Vec<usize> = r
                    .v_hat
                    .iter()
                    .chain(&r.c_hat)
                    .enumerate()
                    .filter(|&(_, &bit)| bit == 1)
                    .map(|(i, _)| i)
                    .collect();
                if !support.is_empty() {
                    found.push(support);
                    break;
                }
            }
        }
        found
    });
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for support in harvested.into_iter().flatten() {
        let (canon, orbit) = canonical(code, &support);
        if !seen.insert(canon.clone()) {
            continue;
        }
        let a = canon.iter().filter(|&&p| p < h).count();
        out.push(FoundCodeword {
            a,
            b: canon.len() - a,
            orbit,
            support: canon,
        });
    }
    out.sort_by(|x, y| (x.a + x.b, x.a, &x.support).cmp(&(y.a + y.b, y.a, &y.support)));
    out
}

/// Lower part of the input-output weight spectrum seen by the impulse
/// search; each codeword counts with its full cyclic orbit.
pub fn low_weight_search(code: &LiftedCode, opts: &ImpulseSearch) -> SpectrumList {
    SpectrumList::from_entries(
        low_weight_codewords(code, opts)
            .into_iter()
            .map(|c| SpectrumEntry {
                a: c.a,
                b: c.b,
                multiplicity: c.orbit,
            })
            .collect(),
    )
}
