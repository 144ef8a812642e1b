//! Pairwise error probability under the mismatched metric and the union
//! bounds built from it.

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::base::Protograph;
use crate::channel::ChannelParams;
use crate::decoder::prior_llr;
use crate::error::{Error, Result};
use crate::matcher::DmConfig;
use crate::spectrum::avg_io_weight_enum_capped;

use super::SpectrumList;

/// Gaussian tail `Q(x) = P[N(0,1) > x]`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Hypergeometric pmf of the number of ones hit when drawing `a` of `h`
/// positions of which `k` are ones. Returns the smallest support point and
/// the pmf from there on.
///
/// Built from successive pmf ratios in the log domain and normalized at the
/// end, so no large binomials are formed.
pub fn hypergeometric_pmf(h: usize, k: usize, a: usize) -> (usize, Vec<f64>) {
    assert!(k <= h && a <= h, "hypergeometric parameters out of range");
    let lo = a.saturating_sub(h - k);
    let hi = a.min(k);
    let mut logs = Vec::with_capacity(hi - lo + 1);
    let mut acc = 0.0f64;
    logs.push(0.0);
    for e in lo..hi {
        // P(e + 1) / P(e)
        let num = ((k - e) as f64).ln() + ((a - e) as f64).ln();
        let den = ((e + 1) as f64).ln() + ((h - k + e + 1 - a) as f64).ln();
        acc += num - den;
        logs.push(acc);
    }
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut pmf: Vec<f64> = logs.iter().map(|&l| (l - peak).exp()).collect();
    let total: f64 = pmf.iter().sum();
    pmf.iter_mut().for_each(|p| *p /= total);
    (lo, pmf)
}

/// Probability that a competing codeword at input distance `a` and output
/// distance `b` scores at least as well as the transmitted one.
pub fn pep(a: usize, b: usize, params: &ChannelParams, cfg: &DmConfig) -> f64 {
    let h = cfg.h();
    assert!(a <= h, "input weight exceeds the matcher length");
    let delta = prior_llr(cfg.omega());
    let var = params.variance();
    let sigma = params.sigma();
    let (lo, pmf) = hypergeometric_pmf(h, cfg.k(), a);
    let mut sum = 0.0;
    for (i, &p) in pmf.iter().enumerate() {
        let e = (lo + i) as f64;
        let t = (a as f64 - 2.0 * e) * delta;
        let q = if b == 0 {
            // no channel term: the prior comparison alone, ties lost
            if t > 0.0 {
                0.0
            } else {
                1.0
            }
        } else {
            let bf = b as f64;
            q_function((2.0 * bf / var + t) / (2.0 * bf.sqrt() / sigma))
        };
        sum += p * q;
    }
    sum.clamp(0.0, 1.0)
}

/// Truncated union bound over a harvested spectrum.
pub fn tub_code(list: &SpectrumList, params: &ChannelParams, cfg: &DmConfig) -> f64 {
    list.entries()
        .iter()
        .map(|e| e.multiplicity as f64 * pep(e.a, e.b, params, cfg))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnionTerm {
    pub a: usize,
    pub b: usize,
    pub enumerator: f64,
    pub pep: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnionBound {
    pub bound: f64,
    /// Whether the weight cap left part of the full `(a, b)` range out.
    pub truncated: bool,
    /// Nonzero terms, in `(a, b)` order.
    pub terms: Vec<UnionTerm>,
}

/// Ensemble-average union bound summed over `1 <= a + b` with
/// `a <= cap.0`, `b <= cap.1`.
pub fn union_bound_ensemble(
    proto: &Protograph,
    lift: usize,
    params: &ChannelParams,
    cfg: &DmConfig,
    cap: (usize, usize),
) -> Result<UnionBound> {
    let h = proto.h0() * lift;
    let n = proto.n0() * lift;
    if cfg.h() != h {
        return Err(Error::InvalidArgument(format!(
            "matcher length {} does not match the {} punctured bits of the lift",
            cfg.h(),
            h
        )));
    }
    let (amax, bmax) = (cap.0.min(h), cap.1.min(n));
    let mut terms = Vec::new();
    let mut bound = 0.0;
    for a in 0..=amax {
        for b in 0..=bmax {
            if a + b == 0 {
                continue;
            }
            let avg = avg_io_weight_enum_capped(proto, lift, a, b, crate::spectrum::DEFAULT_TERM_CAP)?;
            let enumerator = avg.to_f64().unwrap_or(f64::INFINITY);
            if enumerator == 0.0 {
                continue;
            }
            let p = pep(a, b, params, cfg);
            let contribution = enumerator * p;
            bound += contribution;
            terms.push(UnionTerm {
                a,
                b,
                enumerator,
                pep: p,
                contribution,
            });
        }
    }
    Ok(UnionBound {
        bound,
        truncated: amax < h || bmax < n,
        terms,
    })
}
