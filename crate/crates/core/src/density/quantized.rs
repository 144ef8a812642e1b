//! Quantized density evolution over a protograph.
//!
//! Messages are L-values on a uniform grid of `bins` points spanning
//! `[-range, +range]`; the end points absorb everything beyond. Densities are
//! conditioned on the all-zero codeword. VN updates convolve in the integer
//! index domain on a double-width scratch grid and clip once at the end; CN
//! updates fold a precomputed two-input boxplus table.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::base::Protograph;
use crate::channel::sigma_from_db;

pub const DEFAULT_BINS: usize = 255;
pub const DEFAULT_RANGE: f64 = 25.0;
pub const DEFAULT_MAX_ITER: usize = 2000;
/// Error-probability target for convergence.
pub const PE_TARGET: f64 = 1e-9;
/// Masses below this are skipped in the inner loops.
const NEGLIGIBLE: f64 = 1e-30;

/// Uniform L-value quantizer with an odd number of bins (a centre bin at 0).
#[derive(Debug, Clone)]
pub struct QuantGrid {
    bins: usize,
    range: f64,
    step: f64,
    /// `table[a * bins + b]` = bin of `a boxplus b`.
    boxplus: Vec<u16>,
}

impl QuantGrid {
    pub fn new(bins: usize, range: f64) -> Self {
        assert!(bins % 2 == 1 && bins >= 3, "bin count must be odd");
        assert!(range > 0.0);
        let half = (bins - 1) / 2;
        let step = range / half as f64;
        let mut g = QuantGrid {
            bins,
            range,
            step,
            boxplus: Vec::new(),
        };
        let tanh_half: Vec<f64> = (0..bins).map(|i| (0.5 * g.center(i)).tanh()).collect();
        let mut table = vec![0u16; bins * bins];
        for a in 0..bins {
            for b in 0..bins {
                let prod = (tanh_half[a] * tanh_half[b]).clamp(-1.0, 1.0);
                let v = 2.0 * prod.atanh();
                table[a * bins + b] = g.quantize(v) as u16;
            }
        }
        g.boxplus = table;
        g
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn half(&self) -> usize {
        (self.bins - 1) / 2
    }

    pub fn center(&self, idx: usize) -> f64 {
        (idx as f64 - self.half() as f64) * self.step
    }

    /// Nearest bin, saturating at the ends.
    pub fn quantize(&self, v: f64) -> usize {
        let h = self.half() as f64;
        let k = (v / self.step).round().clamp(-h, h);
        (k + h) as usize
    }

    /// Gaussian `N(mean, var)` integrated over the bins.
    pub fn gaussian_pmf(&self, mean: f64, var: f64) -> Vec<f64> {
        let mut p = vec![0.0; self.bins];
        if var <= 0.0 || !var.is_finite() {
            p[self.quantize(mean)] = 1.0;
            return p;
        }
        let nd = Normal::new(mean, var.sqrt()).expect("valid normal");
        let mut prev = 0.0;
        for (i, slot) in p.iter_mut().enumerate() {
            let upper = if i + 1 == self.bins {
                1.0
            } else {
                nd.cdf(self.center(i) + 0.5 * self.step)
            };
            *slot = (upper - prev).max(0.0);
            prev = upper;
        }
        normalize(&mut p);
        p
    }

    /// Two-point density with mass `1 - omega` at `+delta` and `omega` at
    /// `-delta`.
    pub fn two_point_pmf(&self, omega: f64, delta: f64) -> Vec<f64> {
        let mut p = vec![0.0; self.bins];
        p[self.quantize(delta)] += 1.0 - omega;
        p[self.quantize(-delta)] += omega;
        p
    }

    /// Mass on negative values plus half the zero bin.
    pub fn error_probability(&self, p: &[f64]) -> f64 {
        let h = self.half();
        p[..h].iter().sum::<f64>() + 0.5 * p[h]
    }

    fn delta(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.bins];
        p[self.half()] = 1.0;
        p
    }

    pub fn boxplus_pmf(&self, a: &[f64], b: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let n = self.bins;
        for (i, &pa) in a.iter().enumerate() {
            if pa < NEGLIGIBLE {
                continue;
            }
            let row = &self.boxplus[i * n..(i + 1) * n];
            for (&pb, &t) in b.iter().zip(row) {
                if pb >= NEGLIGIBLE {
                    out[t as usize] += pa * pb;
                }
            }
        }
    }
}

impl Default for QuantGrid {
    fn default() -> Self {
        QuantGrid::new(DEFAULT_BINS, DEFAULT_RANGE)
    }
}

fn normalize(p: &mut [f64]) {
    let s: f64 = p.iter().sum();
    if s > 0.0 {
        p.iter_mut().for_each(|v| *v /= s);
    }
}

/// Sum-density of L-values on a wide scratch grid of `2 * wide_half + 1`
/// points centred at 0, saturating at the scratch ends.
#[derive(Clone)]
struct Wide {
    half: usize,
    p: Vec<f64>,
}

impl Wide {
    fn from_narrow(narrow: &[f64], wide_half: usize) -> Self {
        let nh = (narrow.len() - 1) / 2;
        let mut p = vec![0.0; 2 * wide_half + 1];
        p[wide_half - nh..wide_half + nh + 1].copy_from_slice(narrow);
        Wide { half: wide_half, p }
    }

    /// Adds an independent narrow-grid L-value.
    fn add(&self, narrow: &[f64]) -> Wide {
        let nh = (narrow.len() - 1) as isize / 2;
        let last = self.p.len() as isize - 1;
        let mut out = vec![0.0; self.p.len()];
        for (i, &pa) in self.p.iter().enumerate() {
            if pa < NEGLIGIBLE {
                continue;
            }
            let base = i as isize - nh;
            if base >= 0 && base + 2 * nh <= last {
                let dst = &mut out[base as usize..base as usize + narrow.len()];
                for (d, &pb) in dst.iter_mut().zip(narrow) {
                    *d += pa * pb;
                }
            } else {
                for (j, &pb) in narrow.iter().enumerate() {
                    let t = (base + j as isize).clamp(0, last) as usize;
                    out[t] += pa * pb;
                }
            }
        }
        Wide {
            half: self.half,
            p: out,
        }
    }

    fn clip(&self, nh: usize) -> Vec<f64> {
        let mut out = vec![0.0; 2 * nh + 1];
        let off = self.half - nh;
        out.copy_from_slice(&self.p[off..off + 2 * nh + 1]);
        out[0] += self.p[..off].iter().sum::<f64>();
        out[2 * nh] += self.p[off + 2 * nh + 1..].iter().sum::<f64>();
        out
    }
}

#[derive(Debug, Clone)]
pub struct DeOutcome {
    pub converged: bool,
    pub iterations: usize,
    /// Largest a-posteriori error probability over VN types at exit.
    pub max_error_probability: f64,
}

/// Per-pair message densities, indexed like `Protograph::pairs`.
#[derive(Debug, Clone)]
pub struct EdgePmfs {
    pub vc: Vec<Vec<f64>>,
    pub cv: Vec<Vec<f64>>,
}

/// Initial L-value densities per VN type.
pub fn channel_pmfs(proto: &Protograph, omega: f64, es_n0_db: f64, grid: &QuantGrid) -> Vec<Vec<f64>> {
    let delta = ((1.0 - omega) / omega).ln();
    let punct = grid.two_point_pmf(omega, delta);
    let trans = if es_n0_db == f64::INFINITY {
        let mut p = vec![0.0; grid.bins()];
        p[grid.bins() - 1] = 1.0;
        p
    } else {
        let s2 = sigma_from_db(es_n0_db).powi(2);
        grid.gaussian_pmf(2.0 / s2, 4.0 / s2)
    };
    (0..proto.num_vn())
        .map(|vn| if vn < proto.h0() { punct.clone() } else { trans.clone() })
        .collect()
}

/// Leave-one-out products over `factors` with a binary operation; returns
/// for each index the fold of all other factors (`None` for an empty fold).
fn leave_one_out<T: Clone>(factors: &[T], op: impl Fn(&T, &T) -> T) -> Vec<Option<T>> {
    let m = factors.len();
    let mut prefix: Vec<Option<T>> = vec![None; m + 1];
    let mut suffix: Vec<Option<T>> = vec![None; m + 1];
    for i in 0..m {
        prefix[i + 1] = Some(match &prefix[i] {
            None => factors[i].clone(),
            Some(acc) => op(acc, &factors[i]),
        });
    }
    for i in (0..m).rev() {
        suffix[i] = Some(match &suffix[i + 1] {
            None => factors[i].clone(),
            Some(acc) => op(&factors[i], acc),
        });
    }
    (0..m)
        .map(|i| match (&prefix[i], &suffix[i + 1]) {
            (None, None) => None,
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(b.clone()),
            (Some(a), Some(b)) => Some(op(a, b)),
        })
        .collect()
}

/// Quantized DE state machine for one `(protograph, omega, SNR)` point.
pub struct DensityEvolution<'a> {
    proto: &'a Protograph,
    grid: &'a QuantGrid,
    channel: Vec<Vec<f64>>,
    pub pmfs: EdgePmfs,
    /// A-posteriori error probability per VN type after the last VN update.
    app_error: Vec<f64>,
}

impl<'a> DensityEvolution<'a> {
    pub fn new(proto: &'a Protograph, omega: f64, es_n0_db: f64, grid: &'a QuantGrid) -> Self {
        let channel = channel_pmfs(proto, omega, es_n0_db, grid);
        let npairs = proto.pairs().len();
        let pmfs = EdgePmfs {
            vc: proto
                .pairs()
                .iter()
                .map(|p| channel[p.vn].clone())
                .collect(),
            cv: vec![grid.delta(); npairs],
        };
        let app_error = channel.iter().map(|p| grid.error_probability(p)).collect();
        DensityEvolution {
            proto,
            grid,
            channel,
            pmfs,
            app_error,
        }
    }

    /// Largest a-posteriori error probability over VN types. Outgoing
    /// messages of degree-1 types never improve on the channel, so the
    /// criterion looks at the full sums.
    pub fn max_error_probability(&self) -> f64 {
        self.app_error.iter().copied().fold(0.0, f64::max)
    }

    fn cn_update(&mut self) {
        let pairs = self.proto.pairs();
        let grid = self.grid;
        let bp = |a: &Vec<f64>, b: &Vec<f64>| {
            let mut out = vec![0.0; grid.bins()];
            grid.boxplus_pmf(a, b, &mut out);
            out
        };
        for cn in 0..self.proto.n0() {
            let cp = self.proto.cn_pairs(cn);
            // One factor per edge; output for a pair leaves out one copy.
            let mut factors = Vec::new();
            let mut first_slot = Vec::new();
            for &p in cp {
                first_slot.push(factors.len());
                for _ in 0..pairs[p].mult {
                    factors.push(self.pmfs.vc[p].clone());
                }
            }
            let loo = leave_one_out(&factors, bp);
            for (k, &p) in cp.iter().enumerate() {
                let mut out = loo[first_slot[k]].clone().unwrap_or_else(|| grid.delta());
                // total mass is an unstable fixed point of the recursion
                normalize(&mut out);
                self.pmfs.cv[p] = out;
            }
        }
    }

    fn vn_update(&mut self) {
        let pairs = self.proto.pairs();
        let nh = self.grid.half();
        let wide_half = 2 * nh;
        for vn in 0..self.proto.num_vn() {
            let vp = self.proto.vn_pairs(vn);
            let mut factors: Vec<&[f64]> = Vec::new();
            let mut first_slot = Vec::new();
            for &p in vp {
                first_slot.push(factors.len());
                for _ in 0..pairs[p].mult {
                    factors.push(&self.pmfs.cv[p]);
                }
            }
            let m = factors.len();
            // prefix[i]: channel plus factors[..i]; suffix added per output.
            let mut prefix = Vec::with_capacity(m + 1);
            prefix.push(Wide::from_narrow(&self.channel[vn], wide_half));
            for f in &factors {
                let next = prefix.last().unwrap().add(f);
                prefix.push(next);
            }
            self.app_error[vn] = self.grid.error_probability(&prefix[m].clip(nh));
            let mut outs = Vec::with_capacity(vp.len());
            for &slot in &first_slot {
                let mut acc = prefix[slot].clone();
                for f in &factors[slot + 1..] {
                    acc = acc.add(f);
                }
                let mut out = acc.clip(nh);
                normalize(&mut out);
                outs.push(out);
            }
            for (k, &p) in vp.iter().enumerate() {
                self.pmfs.vc[p] = std::mem::take(&mut outs[k]);
            }
        }
    }

    /// One flooding iteration (CN then VN).
    pub fn step(&mut self) {
        self.cn_update();
        self.vn_update();
    }

    pub fn run(&mut self, max_iter: usize) -> DeOutcome {
        let mut pe = self.max_error_probability();
        if pe < PE_TARGET {
            return DeOutcome {
                converged: true,
                iterations: 0,
                max_error_probability: pe,
            };
        }
        let mut history = Vec::with_capacity(max_iter + 1);
        history.push(pe);
        for it in 1..=max_iter {
            self.step();
            pe = self.max_error_probability();
            if pe < PE_TARGET {
                return DeOutcome {
                    converged: true,
                    iterations: it,
                    max_error_probability: pe,
                };
            }
            history.push(pe);
            if stalled(&history) {
                return DeOutcome {
                    converged: false,
                    iterations: it,
                    max_error_probability: pe,
                };
            }
        }
        DeOutcome {
            converged: false,
            iterations: max_iter,
            max_error_probability: pe,
        }
    }
}

/// Fixed point reached: no measurable progress over a window of iterations.
fn stalled(history: &[f64]) -> bool {
    const WINDOW: usize = 25;
    let n = history.len();
    if n <= WINDOW {
        return false;
    }
    let now = history[n - 1];
    let then = history[n - 1 - WINDOW];
    now >= then * (1.0 - 1e-7)
}

pub fn de_quantized_run(
    proto: &Protograph,
    omega: f64,
    es_n0_db: f64,
    grid: &QuantGrid,
    max_iter: usize,
) -> DeOutcome {
    DensityEvolution::new(proto, omega, es_n0_db, grid).run(max_iter)
}

pub fn de_quantized_converges(
    proto: &Protograph,
    omega: f64,
    es_n0_db: f64,
    grid: &QuantGrid,
    max_iter: usize,
) -> bool {
    de_quantized_run(proto, omega, es_n0_db, grid, max_iter).converged
}
