//! Bisection for the smallest SNR at which the analysis converges.

use serde::{Deserialize, Serialize};

use super::pexit;
use super::quantized::{self, QuantGrid};
use crate::base::Protograph;
use crate::error::{Error, Result};

pub const DEFAULT_BRACKET: (f64, f64) = (-15.0, 10.0);
pub const DEFAULT_RESOLUTION_DB: f64 = 0.01;
const EXPAND_LIMIT_DB: (f64, f64) = (-40.0, 30.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    QuantizedDe,
    Pexit,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "de" | "quantized_de" | "quantized-de" => Ok(Method::QuantizedDe),
            "pexit" => Ok(Method::Pexit),
            other => Err(Error::InvalidArgument(format!("unknown method {other}"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::QuantizedDe => "de",
            Method::Pexit => "pexit",
        })
    }
}

/// Settings shared by all threshold searches.
#[derive(Debug, Clone)]
pub struct ThresholdOptions {
    pub grid: QuantGrid,
    pub max_iter: usize,
    pub resolution_db: f64,
    /// Initial bracket; expanded outward when it does not straddle the
    /// threshold.
    pub bracket: (f64, f64),
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        ThresholdOptions {
            grid: QuantGrid::default(),
            max_iter: quantized::DEFAULT_MAX_ITER,
            resolution_db: DEFAULT_RESOLUTION_DB,
            bracket: DEFAULT_BRACKET,
        }
    }
}

impl ThresholdOptions {
    pub fn with_bracket(mut self, lo: f64, hi: f64) -> Self {
        self.bracket = (lo, hi);
        self
    }
}

pub fn converges(proto: &Protograph, omega: f64, es_n0_db: f64, method: Method, opts: &ThresholdOptions) -> bool {
    match method {
        Method::QuantizedDe => {
            quantized::de_quantized_converges(proto, omega, es_n0_db, &opts.grid, opts.max_iter)
        }
        Method::Pexit => pexit::pexit_converges(proto, omega, es_n0_db, opts.max_iter),
    }
}

/// Threshold `gamma*` in dB, within `opts.resolution_db`. The returned value
/// is the lowest SNR verified to converge.
pub fn threshold_search(
    proto: &Protograph,
    omega: f64,
    method: Method,
    opts: &ThresholdOptions,
) -> Result<f64> {
    let test = |db: f64| converges(proto, omega, db, method, opts);
    let (mut lo, mut hi) = opts.bracket;
    let width = (hi - lo).max(1.0);
    while !test(hi) {
        lo = hi;
        hi += width;
        if hi > EXPAND_LIMIT_DB.1 {
            return Err(Error::NoConvergenceInBracket {
                lo_db: opts.bracket.0,
                hi_db: EXPAND_LIMIT_DB.1,
            });
        }
    }
    while test(lo) {
        hi = lo;
        lo -= width;
        if lo < EXPAND_LIMIT_DB.0 {
            return Err(Error::NoConvergenceInBracket {
                lo_db: EXPAND_LIMIT_DB.0,
                hi_db: opts.bracket.1,
            });
        }
    }
    while hi - lo > opts.resolution_db {
        let mid = 0.5 * (lo + hi);
        if test(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Quantized-DE threshold with the bracket seeded from PEXIT, which is
/// never far above it.
pub fn de_threshold_seeded(proto: &Protograph, omega: f64, opts: &ThresholdOptions) -> Result<f64> {
    let px = threshold_search(proto, omega, Method::Pexit, opts)?;
    let seeded = opts.clone().with_bracket(px - 0.25, px + 1.25);
    threshold_search(proto, omega, Method::QuantizedDe, &seeded)
}
