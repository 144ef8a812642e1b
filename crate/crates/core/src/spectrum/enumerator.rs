//! Exact finite-length ensemble-average input-output weight enumerators.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::base::Protograph;
use crate::error::{Error, Result};
use crate::matcher::binomial;

/// Default cap on the number of VN weight vectors visited by
/// [`avg_io_weight_enum`].
pub const DEFAULT_TERM_CAP: u128 = 10_000_000;

/// Number of ways to place, for every edge of one CN type, `counts[g]` ones
/// on distinct copies among `lift` copies so that every copy sees an even
/// number of ones. This is the coefficient of `z^counts` in `S(z)^lift`.
pub fn cn_generating_coeff(lift: usize, counts: &[usize]) -> BigUint {
    if counts.iter().any(|&k| k > lift) {
        return BigUint::zero();
    }
    let binom: Vec<Vec<BigUint>> = (0..=lift)
        .map(|n| (0..=n).map(|r| binomial(n, r)).collect())
        .collect();
    // ways[o]: number of placements so far leaving o copies with odd parity
    let mut ways = vec![BigUint::zero(); lift + 1];
    ways[0] = BigUint::one();
    for &k in counts {
        let mut next = vec![BigUint::zero(); lift + 1];
        for (odd, w) in ways.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            // j ones land on odd copies, k - j on even ones
            for j in k.saturating_sub(lift - odd)..=k.min(odd) {
                let to = odd - j + (k - j);
                next[to] += w * &binom[odd][j] * &binom[lift - odd][k - j];
            }
        }
        ways = next;
    }
    ways.swap_remove(0)
}

/// Calls `f` for every vector of `parts` entries in `0..=cap` summing to
/// `total`, in lexicographic order.
fn for_each_composition(total: usize, parts: usize, cap: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(rem: usize, idx: usize, cap: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        let parts = cur.len();
        if idx + 1 == parts {
            if rem <= cap {
                cur[idx] = rem;
                f(cur);
            }
            return;
        }
        // the remaining parts must be able to absorb what is left
        let lo = rem.saturating_sub(cap * (parts - idx - 1));
        for v in lo..=rem.min(cap) {
            cur[idx] = v;
            rec(rem - v, idx + 1, cap, cur, f);
        }
    }
    if parts == 0 {
        if total == 0 {
            f(&[]);
        }
        return;
    }
    if total > parts * cap {
        return;
    }
    let mut cur = vec![0; parts];
    rec(total, 0, cap, &mut cur, f);
}

fn composition_count(total: usize, parts: usize, cap: usize) -> u128 {
    // dp over parts, saturating
    let mut dp = vec![0u128; total + 1];
    dp[0] = 1;
    for _ in 0..parts {
        let mut next = vec![0u128; total + 1];
        for (s, &w) in dp.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for v in 0..=cap.min(total - s) {
                next[s + v] = next[s + v].saturating_add(w);
            }
        }
        dp = next;
    }
    dp[total]
}

/// Ensemble-average number of codewords with input (punctured) weight `a`
/// and output (transmitted) weight `b`, as an exact rational.
pub fn avg_io_weight_enum(proto: &Protograph, lift: usize, a: usize, b: usize) -> Result<BigRational> {
    avg_io_weight_enum_capped(proto, lift, a, b, DEFAULT_TERM_CAP)
}

pub fn avg_io_weight_enum_capped(
    proto: &Protograph,
    lift: usize,
    a: usize,
    b: usize,
    cap: u128,
) -> Result<BigRational> {
    let h0 = proto.h0();
    let n0 = proto.n0();
    let terms = composition_count(a, h0, lift).saturating_mul(composition_count(b, n0, lift));
    if terms > cap {
        return Err(Error::ComplexityCap { needed: terms, cap });
    }
    let nv = proto.num_vn();
    let binom: Vec<BigUint> = (0..=lift).map(|r| binomial(lift, r)).collect();
    let mut total = BigRational::zero();
    let mut eps = vec![0usize; nv];
    for_each_composition(a, h0, lift, &mut |left| {
        eps[..h0].copy_from_slice(left);
        for_each_composition(b, n0, lift, &mut |right| {
            eps[h0..].copy_from_slice(right);
            let mut num = BigUint::one();
            for cn in 0..n0 {
                let counts: Vec<usize> = proto
                    .cn_edges(cn)
                    .iter()
                    .map(|&g| eps[proto.edges()[g].vn])
                    .collect();
                let c = cn_generating_coeff(lift, &counts);
                if c.is_zero() {
                    return;
                }
                num *= c;
            }
            let mut den = BigUint::one();
            for (j, &e) in eps.iter().enumerate() {
                let d = proto.vn_degree(j);
                for _ in 1..d {
                    den *= &binom[e];
                }
            }
            total += BigRational::new(BigInt::from(num), BigInt::from(den));
        });
    });
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::catalog;

    /// Direct count over all placements, independent of the DP.
    fn coeff_brute(lift: usize, counts: &[usize]) -> u64 {
        let subsets: Vec<Vec<u32>> = counts
            .iter()
            .map(|&k| (0u32..1 << lift).filter(|m| m.count_ones() as usize == k).collect())
            .collect();
        let mut n = 0;
        let mut idx = vec![0usize; counts.len()];
        'outer: loop {
            let x = idx.iter().zip(&subsets).fold(0u32, |acc, (&i, s)| acc ^ s[i]);
            if x == 0 {
                n += 1;
            }
            for d in 0..idx.len() {
                idx[d] += 1;
                if idx[d] < subsets[d].len() {
                    continue 'outer;
                }
                idx[d] = 0;
            }
            break;
        }
        n
    }

    #[test]
    fn coefficient_vectors() {
        assert_eq!(cn_generating_coeff(2, &[1, 1]), BigUint::from(2u32));
        assert_eq!(cn_generating_coeff(7, &[0, 0, 0]), BigUint::one());
        assert_eq!(cn_generating_coeff(1, &[1, 1, 0]), BigUint::one());
        assert_eq!(cn_generating_coeff(1, &[1, 0, 0]), BigUint::zero());
        assert_eq!(cn_generating_coeff(3, &[4, 0]), BigUint::zero());
    }

    #[test]
    fn coefficient_matches_brute_force() {
        for lift in 1..=5 {
            for counts in [[0, 1, 1, 2], [1, 2, 3, 2], [2, 2, 2, 2], [3, 1, 0, 2], [1, 1, 1, 1]] {
                let counts: Vec<usize> = counts.iter().map(|&c| c.min(lift)).collect();
                assert_eq!(
                    cn_generating_coeff(lift, &counts),
                    BigUint::from(coeff_brute(lift, &counts)),
                    "lift {lift} counts {counts:?}"
                );
            }
        }
    }

    #[test]
    fn symmetric_in_counts() {
        let a = cn_generating_coeff(9, &[2, 5, 3, 4]);
        let b = cn_generating_coeff(9, &[4, 3, 5, 2]);
        assert_eq!(a, b);
    }

    #[test]
    fn trivial_enumerator_values() {
        let p = catalog::rate_half().protograph();
        assert_eq!(avg_io_weight_enum(&p, 4, 0, 0).unwrap(), BigRational::one());
        let err = avg_io_weight_enum_capped(&p, 50, 30, 60, 10).unwrap_err();
        assert!(matches!(err, Error::ComplexityCap { .. }));
    }

    #[test]
    fn composition_enumeration() {
        let mut seen = Vec::new();
        for_each_composition(3, 2, 2, &mut |c| seen.push(c.to_vec()));
        assert_eq!(seen, vec![vec![1, 2], vec![2, 1]]);
        assert_eq!(composition_count(3, 2, 2), 2);
        assert_eq!(composition_count(10, 3, 10), 66);
    }
}
