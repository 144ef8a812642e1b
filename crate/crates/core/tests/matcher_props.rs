use num_bigint::BigUint;
use proptest::prelude::*;

use protomn::matcher::{cc_decode, cc_encode, index_from_bits, DmConfig};

/// Weight-`k` words of length `h` in the order the matcher ranks them:
/// ones before zeros, position 0 most significant.
fn ranked_words(h: usize, k: usize) -> Vec<u32> {
    let mut v: Vec<u32> = (0u32..(1 << h)).filter(|w| w.count_ones() as usize == k).collect();
    // bit i of the mask is position h-1-i, so the order is plain descending
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

fn bits_of(mask: u32, h: usize) -> Vec<u8> {
    (0..h).map(|i| ((mask >> (h - 1 - i)) & 1) as u8).collect()
}

#[test]
fn exhaustive_roundtrip_small_lengths() {
    for h in 1..=14 {
        for k in 0..=h {
            let cfg = DmConfig::new(h, k).unwrap();
            for (m, &mask) in ranked_words(h, k).iter().enumerate() {
                let m = BigUint::from(m);
                let v = cc_encode(&m, &cfg).unwrap();
                assert_eq!(v, bits_of(mask, h));
                assert_eq!(cc_decode(&v, &cfg).unwrap(), m);
            }
            assert!(cc_encode(cfg.size(), &cfg).is_err());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn long_words_have_exact_weight(k in 0usize..=6000, seed in any::<u64>()) {
        let cfg = DmConfig::new(6000, k).unwrap();
        let mut state = seed;
        let bits: Vec<u8> = (0..cfg.message_bits())
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 63) as u8
            })
            .collect();
        let m = index_from_bits(&bits, &cfg).unwrap();
        let v = cc_encode(&m, &cfg).unwrap();
        prop_assert_eq!(v.iter().filter(|&&b| b == 1).count(), k);
        prop_assert_eq!(cc_decode(&v, &cfg).unwrap(), m);
    }

    #[test]
    fn wrong_weight_is_rejected(h in 2usize..200, k in 1usize..200, flip in any::<prop::sample::Index>()) {
        prop_assume!(k < h);
        let cfg = DmConfig::new(h, k).unwrap();
        let mut v = cc_encode(&BigUint::from(0u32), &cfg).unwrap();
        let i = flip.index(h);
        v[i] ^= 1;
        prop_assert!(cc_decode(&v, &cfg).is_err());
    }
}
