//! Constant-composition distribution matcher.
//!
//! Messages are indices `0 <= m < C(h, k)`; codewords are the length-`h`
//! binary words of weight exactly `k`, ranked by the lexicographic order of
//! their support sets (bit 0 is the leftmost position). Index 0 is therefore
//! `1...10...0`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::channel::binary_entropy;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DmConfig {
    h: usize,
    k: usize,
    size: BigUint,
}

/// `C(n, r)` exactly.
pub fn binomial(n: usize, r: usize) -> BigUint {
    if r > n {
        return BigUint::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    for i in 0..r {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `log2` of an arbitrarily large integer.
pub fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).log2();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap();
    top.log2() + shift as f64
}

impl DmConfig {
    /// Matcher of block length `h` and output weight `k`, `0 <= k <= h`.
    /// The degenerate weights 0 and `h` give a single codeword.
    pub fn new(h: usize, k: usize) -> Result<Self> {
        if h == 0 || k > h {
            return Err(Error::BadComposition { h, k });
        }
        Ok(DmConfig {
            h,
            k,
            size: binomial(h, k),
        })
    }

    /// `k = round(omega * h)`.
    pub fn from_omega(h: usize, omega: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&omega) {
            return Err(Error::InvalidArgument(format!("omega {omega} outside [0,1]")));
        }
        Self::new(h, (omega * h as f64).round() as usize)
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn omega(&self) -> f64 {
        self.k as f64 / self.h as f64
    }

    /// Number of codewords `M = C(h, k)`.
    pub fn size(&self) -> &BigUint {
        &self.size
    }

    /// `R_O = log2(M) / h`.
    pub fn rate(&self) -> f64 {
        log2_big(&self.size) / self.h as f64
    }

    /// Limit of `R_O` for large `h`.
    pub fn asymptotic_rate(&self) -> f64 {
        binary_entropy(self.omega())
    }

    /// Bits per message when driven from a bit stream: `floor(log2 M)`.
    pub fn message_bits(&self) -> usize {
        (self.size.bits() as usize).saturating_sub(1)
    }
}

/// Outer rate, overall rate for inner rate `inner_rate`, and the asymptotic
/// overall rate `H_b(omega) R_I`.
pub fn dm_rate(cfg: &DmConfig, inner_rate: f64) -> (f64, f64, f64) {
    let ro = cfg.rate();
    (ro, ro * inner_rate, cfg.asymptotic_rate() * inner_rate)
}

/// Maps message index `m` to its weight-`k` word.
pub fn cc_encode(m: &BigUint, cfg: &DmConfig) -> Result<Vec<u8>> {
    if m >= &cfg.size {
        return Err(Error::IndexOutOfRange);
    }
    let h = cfg.h;
    let mut out = vec![0u8; h];
    let mut m = m.clone();
    let mut r = cfg.k;
    if r == 0 {
        return Ok(out);
    }
    // c = C(remaining positions after i, r - 1)
    let mut c = binomial(h - 1, r - 1);
    for (i, bit) in out.iter_mut().enumerate() {
        if r == 0 {
            break;
        }
        let rest = h - i - 1;
        if m < c {
            *bit = 1;
            if rest > 0 {
                c = c * (r - 1) / rest;
            }
            r -= 1;
        } else {
            m -= &c;
            if rest > 0 {
                c = c * (rest - (r - 1)) / rest;
            }
        }
    }
    debug_assert_eq!(r, 0);
    Ok(out)
}

/// Inverse of [`cc_encode`]; words of the wrong weight are a decoding
/// failure.
pub fn cc_decode(v: &[u8], cfg: &DmConfig) -> Result<BigUint> {
    if v.len() != cfg.h {
        return Err(Error::LengthMismatch {
            expected: cfg.h,
            found: v.len(),
        });
    }
    let w = v.iter().filter(|&&b| b != 0).count();
    if w != cfg.k {
        return Err(Error::CompositionMismatch {
            expected: cfg.k,
            found: w,
        });
    }
    let h = cfg.h;
    let mut m = BigUint::zero();
    let mut r = cfg.k;
    if r == 0 {
        return Ok(m);
    }
    let mut c = binomial(h - 1, r - 1);
    for (i, &bit) in v.iter().enumerate() {
        if r == 0 {
            break;
        }
        let rest = h - i - 1;
        if bit != 0 {
            if rest > 0 {
                c = c * (r - 1) / rest;
            }
            r -= 1;
        } else {
            m += &c;
            if rest > 0 {
                c = c * (rest - (r - 1)) / rest;
            }
        }
    }
    Ok(m)
}

/// Reads `cfg.message_bits()` bits (MSB first) as a message index, which is
/// always in range.
pub fn index_from_bits(bits: &[u8], cfg: &DmConfig) -> Result<BigUint> {
    let nb = cfg.message_bits();
    if bits.len() != nb {
        return Err(Error::LengthMismatch {
            expected: nb,
            found: bits.len(),
        });
    }
    let mut m = BigUint::zero();
    for &b in bits {
        m <<= 1;
        if b != 0 {
            m += 1u32;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(s: &str) -> Vec<u8> {
        s.bytes().map(|b| b - b'0').collect()
    }

    /// All weight-k words of length h in lexicographic support order.
    fn enumerate(h: usize, k: usize) -> Vec<Vec<u8>> {
        fn rec(start: usize, h: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<u8>>) {
            if cur.len() == k {
                let mut w = vec![0u8; h];
                cur.iter().for_each(|&i| w[i] = 1);
                out.push(w);
                return;
            }
            for i in start..h {
                cur.push(i);
                rec(i + 1, h, k, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(0, h, k, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn unranking_vectors() {
        let c = DmConfig::new(4, 1).unwrap();
        assert_eq!(cc_encode(&0u32.into(), &c).unwrap(), word("1000"));
        assert_eq!(cc_encode(&3u32.into(), &c).unwrap(), word("0001"));
        assert_eq!(cc_decode(&word("1000"), &c).unwrap(), 0u32.into());
        assert_eq!(
            cc_decode(&word("1100"), &c),
            Err(Error::CompositionMismatch { expected: 1, found: 2 })
        );
        let full = DmConfig::new(3, 3).unwrap();
        assert_eq!(full.size(), &BigUint::one());
        assert_eq!(cc_encode(&0u32.into(), &full).unwrap(), word("111"));
        assert_eq!(cc_encode(&4u32.into(), &c), Err(Error::IndexOutOfRange));
    }

    #[test]
    fn matches_enumeration_oracle() {
        for h in 1..=9 {
            for k in 0..=h {
                let cfg = DmConfig::new(h, k).unwrap();
                let all = enumerate(h, k);
                assert_eq!(BigUint::from(all.len()), *cfg.size());
                for (m, w) in all.iter().enumerate() {
                    assert_eq!(&cc_encode(&m.into(), &cfg).unwrap(), w);
                }
            }
        }
    }

    #[test]
    fn rates() {
        let c = DmConfig::new(4, 2).unwrap();
        assert_eq!(c.size(), &BigUint::from(6u32));
        assert!((c.rate() - 6f64.log2() / 4.0).abs() < 1e-12);
        let c = DmConfig::new(600, 300).unwrap();
        let (ro, r, ra) = dm_rate(&c, 0.5);
        assert!(r < 0.5 && r > 0.49);
        assert!((ra - 0.5).abs() < 1e-12);
        assert!(ro < c.asymptotic_rate() + 1e-12);
        for h in [10, 50, 200, 5000] {
            for k in [1, h / 7, h / 3, h / 2] {
                let c = DmConfig::new(h, k).unwrap();
                assert!(c.rate() < c.asymptotic_rate() + 1e-12);
            }
        }
    }

    #[test]
    fn bitstream_helper() {
        let c = DmConfig::new(6, 3).unwrap(); // M = 20
        assert_eq!(c.message_bits(), 4);
        let m = index_from_bits(&[1, 1, 1, 1], &c).unwrap();
        assert_eq!(m, 15u32.into());
        assert!(cc_encode(&m, &c).is_ok());
    }

    #[test]
    fn log2_of_huge_binomial() {
        let c = binomial(6000, 3000);
        let exact: f64 = (1..=3000)
            .map(|i| ((3000 + i) as f64 / i as f64).log2())
            .sum();
        assert!((log2_big(&c) - exact).abs() < 1e-6);
    }
}
