//! biAWGN communication channel, the weight-constrained a-priori channel of
//! the equivalent parallel channel model, and capacity helpers.

use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// SNRs above this are treated as "infinite" by the capacity inverse.
pub const SNR_CAP_DB: f64 = 30.0;
const SNR_FLOOR_DB: f64 = -60.0;
const GL_NODES: usize = 10;
/// Standardized noise values beyond this carry negligible probability.
const NOISE_SPAN: f64 = 14.0;

/// Noise level of the biAWGN channel, with `Es/N0 = 1/(2 sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    es_n0_db: f64,
    sigma: f64,
}

impl ChannelParams {
    pub fn from_db(es_n0_db: f64) -> Self {
        ChannelParams {
            es_n0_db,
            sigma: sigma_from_db(es_n0_db),
        }
    }

    pub fn from_sigma(sigma: f64) -> Self {
        assert!(sigma > 0.0, "sigma must be positive");
        ChannelParams {
            es_n0_db: db_from_sigma(sigma),
            sigma,
        }
    }

    pub fn es_n0_db(&self) -> f64 {
        self.es_n0_db
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }

    /// Mean of the channel LLR given `x = +1`; the variance is twice this.
    pub fn llr_mean(&self) -> f64 {
        2.0 / self.variance()
    }
}

pub fn sigma_from_db(es_n0_db: f64) -> f64 {
    (1.0 / (2.0 * 10f64.powf(es_n0_db / 10.0))).sqrt()
}

pub fn db_from_sigma(sigma: f64) -> f64 {
    10.0 * (1.0 / (2.0 * sigma * sigma)).log10()
}

/// `y = x + n` with i.i.d. Gaussian noise.
pub fn biawgn_sample<R: Rng + ?Sized>(x: &[f64], params: &ChannelParams, rng: &mut R) -> Vec<f64> {
    let s = params.sigma();
    x.iter()
        .map(|&xi| {
            let n: f64 = rng.sample(StandardNormal);
            xi + s * n
        })
        .collect()
}

/// `L_i = 2 y_i / sigma^2`.
pub fn channel_llrs(y: &[f64], params: &ChannelParams) -> Vec<f64> {
    let scale = 2.0 / params.variance();
    y.iter().map(|&yi| scale * yi).collect()
}

/// Adds a uniformly drawn weight-`k` word to `w` (bits as 0/1 bytes).
pub fn apriori_sample<R: Rng + ?Sized>(w: &[u8], k: usize, rng: &mut R) -> Vec<u8> {
    assert!(k <= w.len(), "flip count exceeds word length");
    let mut idx: Vec<usize> = (0..w.len()).collect();
    let (chosen, _) = idx.partial_shuffle(rng, k);
    let mut z = w.to_vec();
    for &i in chosen.iter() {
        z[i] ^= 1;
    }
    z
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Binary entropy in nats.
pub fn binary_entropy_nats(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.ln() - (1.0 - p) * (1.0 - p).ln()
}

/// Inverse of the binary entropy on `[0, 1/2]`.
pub fn binary_entropy_inv(h: f64) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    if h >= 1.0 {
        return 0.5;
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid) < h {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-17 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Matcher weight fraction `omega` that realizes rate `rate` asymptotically
/// on an inner code of rate `inner_rate`.
pub fn omega_for_rate(rate: f64, inner_rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate <= inner_rate + 1e-12) {
        return Err(Error::RateOutOfRange(rate));
    }
    Ok(binary_entropy_inv((rate / inner_rate).min(1.0)))
}

pub fn capacity_bsc(omega: f64) -> f64 {
    1.0 - binary_entropy(omega)
}

fn gauss_legendre() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    NODES.get_or_init(|| legendre_rule(GL_NODES))
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / dp;
            if (z - z1).abs() <= 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// `log2(1 + e^{-l})` without overflow.
fn log2_one_plus_exp_neg(l: f64) -> f64 {
    let v = if l > 0.0 {
        (-l).exp().ln_1p()
    } else {
        -l + l.exp().ln_1p()
    };
    v / std::f64::consts::LN_2
}

/// Mutual information of the biAWGN channel with uniform +-1 input.
pub fn capacity_biawgn(es_n0_db: f64) -> f64 {
    if es_n0_db == f64::INFINITY {
        return 1.0;
    }
    if es_n0_db == f64::NEG_INFINITY {
        return 0.0;
    }
    let sigma = sigma_from_db(es_n0_db);
    let (nodes, weights) = gauss_legendre();
    // Composite rule over the standardized noise, with a breakpoint where
    // the received value crosses zero and panels no wider than sigma / 2.
    let kink = -1.0 / sigma;
    let mut breaks = vec![-NOISE_SPAN];
    if kink > -NOISE_SPAN {
        breaks.push(kink);
    }
    breaks.push(NOISE_SPAN);
    let width = (0.5 * sigma).min(0.5);
    let norm = (2.0 * std::f64::consts::PI).sqrt();
    // Kahan-compensated sum of the panel contributions.
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for seg in breaks.windows(2) {
        let panels = ((seg[1] - seg[0]) / width).ceil().max(1.0) as usize;
        let h = (seg[1] - seg[0]) / panels as f64;
        for p in 0..panels {
            let mid = seg[0] + (p as f64 + 0.5) * h;
            let mut panel = 0.0;
            for (&u, &w) in nodes.iter().zip(weights) {
                let t = mid + 0.5 * h * u;
                let y = 1.0 + sigma * t;
                panel += w * (-0.5 * t * t).exp() * log2_one_plus_exp_neg(2.0 * y / (sigma * sigma));
            }
            let term = 0.5 * h * panel / norm - comp;
            let next = sum + term;
            comp = (next - sum) - term;
            sum = next;
        }
    }
    (1.0 - sum).clamp(0.0, 1.0)
}

/// Smallest `Es/N0` (dB) whose biAWGN capacity reaches `rate`.
pub fn shannon_limit_inverse(rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::RateOutOfRange(rate));
    }
    if capacity_biawgn(SNR_CAP_DB) < rate {
        return Err(Error::RateOutOfRange(rate));
    }
    let (mut lo, mut hi) = (SNR_FLOOR_DB, SNR_CAP_DB);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let c = capacity_biawgn(mid);
        if (c - rate).abs() < 1e-12 || hi - lo < 1e-12 {
            return Ok(mid);
        }
        if c < rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    /// Dense trapezoid over the Gaussian density; independent of the
    /// quadrature rule.
    fn capacity_oracle(es_n0_db: f64) -> f64 {
        let s = sigma_from_db(es_n0_db);
        let n = 400_000;
        let span = 14.0;
        let h = 2.0 * span / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let t = -span + i as f64 * h;
            let wgt = if i == 0 || i == n { 0.5 } else { 1.0 };
            let y = 1.0 + s * t;
            let dens = (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
            acc += wgt * dens * log2_one_plus_exp_neg(2.0 * y / (s * s));
        }
        1.0 - acc * h
    }

    #[test]
    fn db_sigma_roundtrip() {
        for db in [-12.0, -2.04, 0.0, 3.5, 10.0] {
            let p = ChannelParams::from_db(db);
            assert!((ChannelParams::from_sigma(p.sigma()).es_n0_db() - db).abs() < 1e-12);
        }
        // 10^(-0.204) = 0.62517...
        assert!((sigma_from_db(-2.04) - 0.894303).abs() < 1e-5);
    }

    #[test]
    fn llrs() {
        let p = ChannelParams::from_sigma(1.0);
        assert_eq!(channel_llrs(&[0.5, 0.0], &p), vec![1.0, 0.0]);
        let p = ChannelParams::from_sigma(0.5f64.sqrt());
        assert!((channel_llrs(&[-1.0], &p)[0] + 4.0).abs() < 1e-12);
    }

    #[test]
    fn noise_moments() {
        let p = ChannelParams::from_db(1.0);
        let mut rng = stream_rng(7, 0);
        let x = vec![1.0; 1_000_000];
        let y = biawgn_sample(&x, &p, &mut rng);
        let n = y.len() as f64;
        let mean = y.iter().map(|v| v - 1.0).sum::<f64>() / n;
        let var = y.iter().map(|v| (v - 1.0 - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 5e-3);
        assert!((var / p.variance() - 1.0).abs() < 0.01);
        // LLR moments given X = +1: mean 2/sigma^2, variance 4/sigma^2.
        let l = channel_llrs(&y, &p);
        let lm = l.iter().sum::<f64>() / n;
        let lv = l.iter().map(|v| (v - lm).powi(2)).sum::<f64>() / n;
        assert!((lm / p.llr_mean() - 1.0).abs() < 0.01);
        assert!((lv / (2.0 * p.llr_mean()) - 1.0).abs() < 0.01);
    }

    #[test]
    fn noiseless_limit() {
        let p = ChannelParams::from_sigma(1e-12);
        let mut rng = stream_rng(1, 1);
        let y = biawgn_sample(&[1.0, -1.0, 1.0], &p, &mut rng);
        for (a, b) in y.iter().zip([1.0, -1.0, 1.0]) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn apriori_flips_exactly_k() {
        let mut rng = stream_rng(3, 0);
        assert_eq!(apriori_sample(&[0; 8], 0, &mut rng), vec![0; 8]);
        for k in 0..=10 {
            let w: Vec<u8> = (0..10).map(|i| (i % 3 == 0) as u8).collect();
            let z = apriori_sample(&w, k, &mut rng);
            let d = w.iter().zip(&z).filter(|(a, b)| a != b).count();
            assert_eq!(d, k);
        }
    }

    #[test]
    fn apriori_support_is_uniform() {
        // 15 cells of C(6,2); chi-square with 14 dof, p = 0.001 at 36.12.
        let mut rng = stream_rng(11, 0);
        let mut counts = std::collections::HashMap::new();
        let draws = 100_000;
        for _ in 0..draws {
            let z = apriori_sample(&[0; 6], 2, &mut rng);
            *counts.entry(z).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 15);
        let expect = draws as f64 / 15.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| (c as f64 - expect).powi(2) / expect)
            .sum();
        assert!(chi2 < 36.12, "chi2 = {chi2}");
    }

    #[test]
    fn bsc_capacity() {
        assert_eq!(capacity_bsc(0.0), 1.0);
        assert!(capacity_bsc(0.5).abs() < 1e-15);
        assert!((capacity_bsc(0.11) - 0.5).abs() < 1e-3);
        assert!((binary_entropy(0.11) - 0.49998).abs() < 1e-4);
    }

    #[test]
    fn entropy_inverse() {
        for h in [0.01, 0.2, 0.5, 0.9, 0.999] {
            assert!((binary_entropy(binary_entropy_inv(h)) - h).abs() < 1e-12);
        }
        assert!((omega_for_rate(0.5, 0.5).unwrap() - 0.5).abs() < 1e-9);
        assert!(omega_for_rate(0.6, 0.5).is_err());
    }

    #[test]
    fn biawgn_capacity_matches_oracle() {
        let mut worst = 0.0f64;
        for i in 0..=44 {
            let db = -20.0 + i as f64;
            let err = (capacity_biawgn(db) - capacity_oracle(db)).abs();
            worst = worst.max(err);
        }
        assert!(worst < 1e-9, "max abs error {worst:e}");
    }

    #[test]
    fn biawgn_capacity_shape() {
        assert!(capacity_biawgn(-50.0) < 1e-4);
        assert!(capacity_biawgn(25.0) > 1.0 - 1e-12);
        let mut prev = 0.0;
        for i in 0..200 {
            let c = capacity_biawgn(-20.0 + 0.2 * i as f64);
            assert!(c >= prev);
            prev = c;
        }
        assert!((capacity_biawgn(-2.82) - 0.5).abs() < 2e-3);
    }

    #[test]
    fn shannon_limit() {
        let g = shannon_limit_inverse(0.5).unwrap();
        assert!((g + 2.82).abs() < 0.01, "{g}");
        for r in [0.05, 0.1, 0.3, 0.666, 0.9] {
            let g = shannon_limit_inverse(r).unwrap();
            assert!((capacity_biawgn(g) - r).abs() < 1e-8);
        }
        assert!(shannon_limit_inverse(1.0).is_err());
        assert!(shannon_limit_inverse(0.0).is_err());
        assert!(shannon_limit_inverse(f64::NAN).is_err());
    }
}
