//! Weight-enumerator analysis: exact finite-length averages and the
//! asymptotic growth rate.

pub mod enumerator;
pub mod growth;

pub use enumerator::{avg_io_weight_enum, avg_io_weight_enum_capped, cn_generating_coeff, DEFAULT_TERM_CAP};
pub use growth::{
    classify_ensemble, grid_axis, growth_rate, growth_row, growth_rate_with, weight_direction_feasible, ClassifyReport, EnsembleClass, GrowthOptions, GrowthSolution,
};
