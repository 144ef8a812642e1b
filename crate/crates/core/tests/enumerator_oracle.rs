//! Ensemble-average input-output enumerators against brute force over every
//! lifted graph, and their exponential growth against the asymptotic rate.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use protomn::base::{catalog, BaseMatrix};
use protomn::spectrum::{avg_io_weight_enum, growth_rate};

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![0]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Averages the (a, b) codeword counts over every assignment of one
/// permutation per protograph edge. Parallel edges landing on the same pair
/// of copies add twice, i.e. cancel over GF(2).
fn brute_force_average(base: &BaseMatrix, lift: usize) -> BTreeMap<(usize, usize), BigRational> {
    let mut edges = Vec::new();
    for (i, row) in base.rows().iter().enumerate() {
        for (j, &m) in row.iter().enumerate() {
            for _ in 0..m {
                edges.push((i, j));
            }
        }
    }
    let perms = permutations(lift);
    let rows = base.rows().len() * lift;
    let cols = base.cols() * lift;
    let h = base.h0() * lift;
    let mut totals: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut choice = vec![0usize; edges.len()];
    let mut graphs = 0u64;
    loop {
        // row masks over GF(2)
        let mut hm = vec![0u64; rows];
        for (e, &(i, j)) in edges.iter().enumerate() {
            let p = &perms[choice[e]];
            for t in 0..lift {
                hm[i * lift + t] ^= 1 << (j * lift + p[t]);
            }
        }
        for word in 0u64..(1 << cols) {
            if hm.iter().all(|r| (r & word).count_ones() % 2 == 0) {
                let a = (word & ((1 << h) - 1)).count_ones() as usize;
                let b = (word >> h).count_ones() as usize;
                *totals.entry((a, b)).or_default() += 1;
            }
        }
        graphs += 1;
        let mut k = 0;
        loop {
            if k == choice.len() {
                return totals
                    .into_iter()
                    .map(|(key, c)| (key, BigRational::new(c.into(), graphs.into())))
                    .collect();
            }
            choice[k] += 1;
            if choice[k] < perms.len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

fn check_exact(base: &BaseMatrix, lift: usize) {
    let proto = base.protograph();
    let oracle = brute_force_average(base, lift);
    let h = base.h0() * lift;
    let n = base.n0() * lift;
    for a in 0..=h {
        for b in 0..=n {
            let got = avg_io_weight_enum(&proto, lift, a, b).unwrap();
            let want = oracle.get(&(a, b)).cloned().unwrap_or_else(BigRational::zero);
            assert_eq!(got, want, "a={a} b={b}");
        }
    }
}

#[test]
fn toy_protograph_exact_at_lift_two() {
    check_exact(&catalog::toy_parallel(), 2);
}

#[test]
fn all_ones_exact_at_lift_two_and_three() {
    check_exact(&catalog::all_ones_2x3(), 2);
    check_exact(&catalog::all_ones_2x3(), 3);
}

fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

fn normalized_log_enum(base: &BaseMatrix, lift: usize, alpha: f64, beta: f64) -> f64 {
    let n = base.n0() * lift;
    let a = (alpha * n as f64).round() as usize;
    let b = (beta * n as f64).round() as usize;
    let v = avg_io_weight_enum(&base.protograph(), lift, a, b).unwrap();
    (ln_big(v.numer().magnitude()) - ln_big(v.denom().magnitude())) / n as f64
}

#[test]
fn finite_length_exponent_approaches_growth_rate() {
    let base = catalog::all_ones_2x3();
    let proto = base.protograph();
    for (alpha, beta) in [(0.1, 0.2), (0.2, 0.25), (0.25, 0.4)] {
        let g = growth_rate(&proto, alpha, beta).unwrap().g;
        let gaps: Vec<f64> = [20, 40, 80]
            .iter()
            .map(|&l| (normalized_log_enum(&base, l, alpha, beta) - g).abs())
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "({alpha},{beta}): {gaps:?}");
    }
}
