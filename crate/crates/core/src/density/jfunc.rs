//! The EXIT `J` function: mutual information between a bit and a consistent
//! Gaussian L-value `L ~ N(s^2/2, s^2)`.
//!
//! `J` is tabulated once as `ln(1 - J)` on a fine grid in `s` and
//! interpolated linearly in `s^2`, which is exact to first order near the
//! origin and keeps the relative accuracy of `1 - J` when `J` is close to 1.

use std::sync::OnceLock;

/// Largest tabulated `s`; `1 - J(S_MAX)` is about `1e-49`.
pub const S_MAX: f64 = 30.0;
const STEP: f64 = 0.005;

struct Table {
    s2: Vec<f64>,
    log_comp: Vec<f64>,
}

fn table() -> &'static Table {
    static T: OnceLock<Table> = OnceLock::new();
    T.get_or_init(|| {
        let n = (S_MAX / STEP).round() as usize;
        let mut s2 = Vec::with_capacity(n + 1);
        let mut log_comp = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let s = k as f64 * STEP;
            s2.push(s * s);
            log_comp.push(log_one_minus_j_quadrature(s));
        }
        Table { s2, log_comp }
    })
}

/// `ln(ln(1 + e^{-l}) / ln 2)` without underflow for large `l`.
fn ln_log2_one_plus_exp_neg(l: f64) -> f64 {
    let sp = if l > 30.0 {
        // ln(1 + x) = x (1 - x/2 + ...), x = e^{-l}
        return -l + (-0.5 * (-l).exp()).ln_1p() - std::f64::consts::LN_2.ln();
    } else if l > 0.0 {
        (-l).exp().ln_1p()
    } else {
        -l + l.exp().ln_1p()
    };
    sp.ln() - std::f64::consts::LN_2.ln()
}

/// `ln(1 - J(s))` by Simpson's rule over the standard-normal variable, in
/// the log domain. The integrand peaks at `t = -s`, hence the shifted span.
pub(crate) fn log_one_minus_j_quadrature(s: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let lo = -s - 12.0;
    let hi = 12.0;
    let n = (((hi - lo) / 0.004).ceil() as usize).next_multiple_of(2);
    let h = (hi - lo) / n as f64;
    let half_ln_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    let ln_f = |t: f64| {
        let l = 0.5 * s * s + s * t;
        -0.5 * t * t - half_ln_2pi + ln_log2_one_plus_exp_neg(l)
    };
    let vals: Vec<f64> = (0..=n).map(|i| ln_f(lo + i as f64 * h)).collect();
    let m = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut acc = 0.0;
    for (i, v) in vals.iter().enumerate() {
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * (v - m).exp();
    }
    m + (acc * h / 3.0).ln()
}

fn log_one_minus_j(s: f64) -> f64 {
    let t = table();
    if s <= 0.0 {
        return 0.0;
    }
    if s >= S_MAX {
        return *t.log_comp.last().unwrap();
    }
    let k = ((s / STEP) as usize).min(t.s2.len() - 2);
    let u = s * s;
    let frac = (u - t.s2[k]) / (t.s2[k + 1] - t.s2[k]);
    t.log_comp[k] + frac * (t.log_comp[k + 1] - t.log_comp[k])
}

/// `J(s)`.
pub fn j(s: f64) -> f64 {
    -log_one_minus_j(s).exp_m1()
}

/// `1 - J(s)`, accurate when `J` is close to 1.
pub fn one_minus_j(s: f64) -> f64 {
    log_one_minus_j(s).exp()
}

/// Inverse of `J`, saturating at `0` and `S_MAX`.
pub fn j_inv(mi: f64) -> f64 {
    if mi <= 0.0 {
        return 0.0;
    }
    j_inv_from_log_comp((-mi).ln_1p())
}

/// `J^{-1}(1 - c)` for a complement `c = 1 - I`, accurate for tiny `c`.
pub fn j_inv_complement(c: f64) -> f64 {
    if c >= 1.0 {
        return 0.0;
    }
    if c <= 0.0 {
        return S_MAX;
    }
    j_inv_from_log_comp(c.ln())
}

fn j_inv_from_log_comp(g: f64) -> f64 {
    let t = table();
    if g >= 0.0 {
        return 0.0;
    }
    let last = t.log_comp.len() - 1;
    if g <= t.log_comp[last] {
        return S_MAX;
    }
    // log_comp is strictly decreasing
    let k = t.log_comp.partition_point(|&v| v > g).max(1) - 1;
    let (g0, g1) = (t.log_comp[k], t.log_comp[k + 1]);
    let frac = (g - g0) / (g1 - g0);
    (t.s2[k] + frac * (t.s2[k + 1] - t.s2[k])).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain trapezoid on `J` directly, independent of the log-domain table.
    fn j_oracle(s: f64) -> f64 {
        let n = 200_000;
        let (lo, hi) = (-14.0, 14.0);
        let h = (hi - lo) / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let t = lo + i as f64 * h;
            let l = 0.5 * s * s + s * t;
            let f = if l > 0.0 {
                (-l).exp().ln_1p()
            } else {
                -l + l.exp().ln_1p()
            } / std::f64::consts::LN_2;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            acc += w * f * (-0.5 * t * t).exp();
        }
        1.0 - acc * h / (2.0 * std::f64::consts::PI).sqrt()
    }

    #[test]
    fn matches_oracle() {
        let mut worst = 0.0f64;
        for i in 0..400 {
            let s = 0.013 + i as f64 * 0.0497;
            worst = worst.max((j(s) - j_oracle(s)).abs());
        }
        assert!(worst < 1e-5, "max abs error {worst:e}");
    }

    #[test]
    fn inverse_and_limits() {
        assert_eq!(j(0.0), 0.0);
        assert_eq!(j(S_MAX), 1.0);
        assert!(one_minus_j(S_MAX) < 1e-40);
        for i in 1..200 {
            let mi = i as f64 / 200.0;
            assert!((j(j_inv(mi)) - mi).abs() < 1e-9);
        }
        for c in [1e-3, 1e-6, 1e-9, 1e-20] {
            let s = j_inv_complement(c);
            assert!((one_minus_j(s) / c - 1.0).abs() < 1e-6);
        }
        assert_eq!(j_inv(1.0), S_MAX);
        let mut prev = -1.0;
        for i in 0..6000 {
            let v = j(i as f64 * 0.005);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn agrees_with_awgn_capacity() {
        // J(2/sigma) is the biAWGN capacity.
        for db in [-8.0, -2.0, 0.0, 3.0] {
            let s = crate::channel::sigma_from_db(db);
            let c = crate::channel::capacity_biawgn(db);
            assert!((j(2.0 / s) - c).abs() < 1e-5);
        }
    }
}
