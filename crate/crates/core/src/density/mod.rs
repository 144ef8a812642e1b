//! Decoding-threshold analysis of protograph MN ensembles: quantized density
//! evolution and protograph EXIT.

pub mod jfunc;
pub mod pexit;
pub mod quantized;
pub mod threshold;

pub use pexit::{pexit_converges, pexit_run, MiState, PexitOutcome};
pub use quantized::{de_quantized_converges, de_quantized_run, DeOutcome, EdgePmfs, QuantGrid};
pub use threshold::{de_threshold_seeded, threshold_search, Method, ThresholdOptions};
