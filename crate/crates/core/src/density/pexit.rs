//! Protograph EXIT analysis: one mutual-information value per edge type
//! and direction, Gaussian messages throughout.

use super::jfunc::{j, j_inv, j_inv_complement, one_minus_j};
use crate::base::Protograph;
use crate::channel::{capacity_bsc, sigma_from_db};

pub const DEFAULT_MAX_ITER: usize = 2000;
/// A-posteriori MI target for convergence.
pub const MI_TARGET: f64 = 1.0 - 1e-6;

/// Per-pair mutual informations, indexed like `Protograph::pairs`.
#[derive(Debug, Clone, PartialEq)]
pub struct MiState {
    /// VN-to-CN.
    pub vc: Vec<f64>,
    /// CN-to-VN.
    pub cv: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PexitOutcome {
    pub converged: bool,
    pub iterations: usize,
    /// Smallest a-posteriori MI over VN types at exit.
    pub min_app_mi: f64,
    pub state: MiState,
}

/// Channel `s` parameter per VN type: BSC(omega) for punctured types,
/// `2/sigma` for transmitted ones.
fn channel_s(proto: &Protograph, omega: f64, es_n0_db: f64) -> Vec<f64> {
    let s_awgn = if es_n0_db == f64::INFINITY {
        super::jfunc::S_MAX
    } else {
        (2.0 / sigma_from_db(es_n0_db)).min(super::jfunc::S_MAX)
    };
    let s_bsc = j_inv(capacity_bsc(omega));
    (0..proto.num_vn())
        .map(|vn| if vn < proto.h0() { s_bsc } else { s_awgn })
        .collect()
}

/// Runs the recursion and reports the trajectory end point.
pub fn pexit_run(proto: &Protograph, omega: f64, es_n0_db: f64, max_iter: usize) -> PexitOutcome {
    let pairs = proto.pairs();
    let ch = channel_s(proto, omega, es_n0_db);
    let ch2: Vec<f64> = ch.iter().map(|s| s * s).collect();
    let mut state = MiState {
        vc: vec![0.0; pairs.len()],
        cv: vec![0.0; pairs.len()],
    };
    let mut cv_s2 = vec![0.0; pairs.len()];
    let mut vc_s2c = vec![0.0; pairs.len()];

    let app = |cv_s2: &[f64]| -> f64 {
        (0..proto.num_vn())
            .map(|vn| {
                let tot: f64 = ch2[vn]
                    + proto
                        .vn_pairs(vn)
                        .iter()
                        .map(|&p| pairs[p].mult as f64 * cv_s2[p])
                        .sum::<f64>();
                j(tot.sqrt())
            })
            .fold(1.0, f64::min)
    };

    let mut min_app = app(&cv_s2);
    if min_app > MI_TARGET {
        return PexitOutcome {
            converged: true,
            iterations: 0,
            min_app_mi: min_app,
            state,
        };
    }
    for it in 1..=max_iter {
        // VN update
        for vn in 0..proto.num_vn() {
            let tot: f64 = ch2[vn]
                + proto
                    .vn_pairs(vn)
                    .iter()
                    .map(|&p| pairs[p].mult as f64 * cv_s2[p])
                    .sum::<f64>();
            for &p in proto.vn_pairs(vn) {
                let s = (tot - cv_s2[p]).max(0.0).sqrt();
                state.vc[p] = j(s);
                // The CN side works with J^{-1}(1 - I_vc); take it from the
                // complement so I_vc close to 1 keeps its precision.
                vc_s2c[p] = j_inv(one_minus_j(s)).powi(2);
            }
        }
        // CN update
        for cn in 0..proto.n0() {
            let tot: f64 = proto
                .cn_pairs(cn)
                .iter()
                .map(|&p| pairs[p].mult as f64 * vc_s2c[p])
                .sum();
            for &p in proto.cn_pairs(cn) {
                let s = (tot - vc_s2c[p]).max(0.0).sqrt();
                // I_cv = 1 - J(s)
                let comp = j(s);
                state.cv[p] = 1.0 - comp;
                cv_s2[p] = j_inv_complement(comp).powi(2);
            }
        }
        let next = app(&cv_s2);
        if next > MI_TARGET {
            return PexitOutcome {
                converged: true,
                iterations: it,
                min_app_mi: next,
                state,
            };
        }
        if (next - min_app).abs() < 1e-14 && it > 1 {
            return PexitOutcome {
                converged: false,
                iterations: it,
                min_app_mi: next,
                state,
            };
        }
        min_app = next;
    }
    PexitOutcome {
        converged: false,
        iterations: max_iter,
        min_app_mi: min_app,
        state,
    }
}

pub fn pexit_converges(proto: &Protograph, omega: f64, es_n0_db: f64, max_iter: usize) -> bool {
    pexit_run(proto, omega, es_n0_db, max_iter).converged
}
