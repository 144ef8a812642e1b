//! Asymptotic growth rate `G(alpha, beta)` of the ensemble-average
//! input-output weight enumerator, and the good/bad classifier built on it.
//!
//! The stationarity system is solved by damped Newton in the variables
//! `x_g = ln z_g`, `u_j = logit(n0 * theta_j)`, `mu1`, `mu2`. With reduction
//! on, parallel edges between one (CN, VN) pair share a single `z`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::base::Protograph;
use crate::error::{Error, Result};
use crate::exec::{map_range, Exec};
use crate::rng::stream_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSolution {
    pub alpha: f64,
    pub beta: f64,
    /// One value per protograph edge.
    pub z: Vec<f64>,
    /// Normalized weight per VN type, `epsilon_j / n` in the limit.
    pub theta: Vec<f64>,
    pub mu1: f64,
    pub mu2: f64,
    pub g: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct GrowthOptions {
    /// Share one variable among parallel edges of a (CN, VN) pair.
    pub reduce: bool,
    pub tolerance: f64,
    pub max_newton: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for GrowthOptions {
    fn default() -> Self {
        GrowthOptions {
            reduce: true,
            tolerance: 1e-10,
            max_newton: 200,
            restarts: 8,
            seed: 0x6d6e,
        }
    }
}

/// Variable groups: one per pair (reduced) or per edge.
struct System<'a> {
    proto: &'a Protograph,
    /// (cn, vn, multiplicity) per group
    groups: Vec<(usize, usize, usize)>,
    cn_groups: Vec<Vec<usize>>,
    vn_groups: Vec<Vec<usize>>,
    /// Group of every protograph edge.
    edge_group: Vec<usize>,
    alpha: f64,
    beta: f64,
}

fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Natural binary entropy.
fn entropy_nats(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.ln() - (1.0 - p) * (-p).ln_1p()
}

impl<'a> System<'a> {
    fn new(proto: &'a Protograph, alpha: f64, beta: f64, reduce: bool) -> Self {
        let mut groups = Vec::new();
        let mut edge_group = vec![0; proto.edges().len()];
        if reduce {
            for p in proto.pairs() {
                groups.push((p.cn, p.vn, p.mult as usize));
            }
            for (g, e) in proto.edges().iter().enumerate() {
                edge_group[g] = proto
                    .pairs()
                    .iter()
                    .position(|p| p.cn == e.cn && p.vn == e.vn)
                    .expect("edge has a pair");
            }
        } else {
            for (g, e) in proto.edges().iter().enumerate() {
                groups.push((e.cn, e.vn, 1));
                edge_group[g] = g;
            }
        }
        let mut cn_groups = vec![Vec::new(); proto.n0()];
        let mut vn_groups = vec![Vec::new(); proto.num_vn()];
        for (q, &(c, v, _)) in groups.iter().enumerate() {
            cn_groups[c].push(q);
            vn_groups[v].push(q);
        }
        System {
            proto,
            groups,
            cn_groups,
            vn_groups,
            edge_group,
            alpha,
            beta,
        }
    }

    fn dim(&self) -> usize {
        self.groups.len() + self.proto.num_vn() + 2
    }

    /// `(1 - z) / (1 + z)` from `x = ln z`, computed as `-tanh(x / 2)`.
    fn ratio(x: f64) -> f64 {
        -(0.5 * x).tanh()
    }

    /// `z d ln S / dz` for group `q` at its CN.
    fn edge_term(&self, x: &[f64], q: usize) -> f64 {
        let cn = self.groups[q].0;
        let mut rho = 1.0;
        for &o in &self.cn_groups[cn] {
            let m = self.groups[o].2 - usize::from(o == q);
            rho *= Self::ratio(x[o]).powi(m as i32);
        }
        let z = x[q].exp();
        if z.is_infinite() {
            return 1.0;
        }
        z * (1.0 - rho) / ((1.0 + z) + rho * (1.0 - z))
    }

    /// `ln S_i`.
    fn log_s(&self, x: &[f64], cn: usize) -> f64 {
        let mut sum = -std::f64::consts::LN_2;
        let mut r = 1.0;
        for &q in &self.cn_groups[cn] {
            let m = self.groups[q].2 as f64;
            // ln(1 + z) = softplus(x)
            let xq = x[q];
            let sp = if xq > 0.0 { xq + (-xq).exp().ln_1p() } else { xq.exp().ln_1p() };
            sum += m * sp;
            r *= Self::ratio(xq).powi(self.groups[q].2 as i32);
        }
        sum + r.ln_1p()
    }

    fn residual(&self, v: &[f64]) -> Vec<f64> {
        let ng = self.groups.len();
        let nv = self.proto.num_vn();
        let h0 = self.proto.h0();
        let n0 = self.proto.n0() as f64;
        let x = &v[..ng];
        let u = &v[ng..ng + nv];
        let (mu1, mu2) = (v[ng + nv], v[ng + nv + 1]);
        let mut r = Vec::with_capacity(self.dim());
        for q in 0..ng {
            let vn = self.groups[q].1;
            r.push(self.edge_term(x, q) - sigmoid(u[vn]));
        }
        for j in 0..nv {
            let d = self.proto.vn_degree(j) as f64;
            let s: f64 = self.vn_groups[j].iter().map(|&q| self.groups[q].2 as f64 * x[q]).sum();
            let mu = if j < h0 { mu1 } else { mu2 };
            r.push((d - 1.0) * u[j] - s - mu);
        }
        r.push(u[..h0].iter().map(|&uj| sigmoid(uj)).sum::<f64>() / n0 - self.alpha);
        r.push(u[h0..].iter().map(|&uj| sigmoid(uj)).sum::<f64>() / n0 - self.beta);
        r
    }

    /// `rho` for group `q` (product over the other edges at its CN) and its
    /// partial derivatives with respect to every group at that CN.
    fn rho_and_grad(&self, x: &[f64], q: usize) -> (f64, Vec<(usize, f64)>) {
        let cn = self.groups[q].0;
        let gs = &self.cn_groups[cn];
        let exps: Vec<i32> = gs
            .iter()
            .map(|&o| (self.groups[o].2 - usize::from(o == q)) as i32)
            .collect();
        let f: Vec<f64> = gs.iter().map(|&o| Self::ratio(x[o])).collect();
        let rho: f64 = f.iter().zip(&exps).map(|(fo, &e)| fo.powi(e)).product();
        let grad = gs
            .iter()
            .enumerate()
            .map(|(k, &o)| {
                let e = exps[k];
                if e == 0 {
                    return (o, 0.0);
                }
                let others: f64 = f
                    .iter()
                    .zip(&exps)
                    .enumerate()
                    .filter(|&(kk, _)| kk != k)
                    .map(|(_, (fo, &ee))| fo.powi(ee))
                    .product();
                // d/dx of -tanh(x/2)
                let df = -0.5 / (0.5 * x[o]).cosh().powi(2);
                (o, others * e as f64 * f[k].powi(e - 1) * df)
            })
            .collect();
        (rho, grad)
    }

    fn jacobian(&self, v: &[f64]) -> DMatrix<f64> {
        let ng = self.groups.len();
        let nv = self.proto.num_vn();
        let h0 = self.proto.h0();
        let n0 = self.proto.n0() as f64;
        let n = self.dim();
        let x = &v[..ng];
        let mut jac = DMatrix::zeros(n, n);
        for q in 0..ng {
            let vn = self.groups[q].1;
            let (rho, grad) = self.rho_and_grad(x, q);
            let z = x[q].exp();
            let d = (1.0 + z) + rho * (1.0 - z);
            let d2 = d * d;
            // dF/dx_q through z, and dF/drho
            jac[(q, q)] += z * (1.0 - rho * rho) / d2;
            let df_drho = -2.0 * z / d2;
            for (o, g) in grad {
                jac[(q, o)] += df_drho * g;
            }
            let s = sigmoid(v[ng + vn]);
            jac[(q, ng + vn)] = -s * (1.0 - s);
        }
        for j in 0..nv {
            let row = ng + j;
            jac[(row, ng + j)] = self.proto.vn_degree(j) as f64 - 1.0;
            for &q in &self.vn_groups[j] {
                jac[(row, q)] = -(self.groups[q].2 as f64);
            }
            jac[(row, ng + nv + usize::from(j >= h0))] = -1.0;
        }
        for j in 0..nv {
            let s = sigmoid(v[ng + j]);
            let row = ng + nv + usize::from(j >= h0);
            jac[(row, ng + j)] = s * (1.0 - s) / n0;
        }
        jac
    }

    fn initial(&self) -> Vec<f64> {
        let ng = self.groups.len();
        let nv = self.proto.num_vn();
        let h0 = self.proto.h0();
        let n0 = self.proto.n0() as f64;
        let clampp = |p: f64| p.clamp(1e-12, 1.0 - 1e-6);
        let t: Vec<f64> = (0..nv)
            .map(|j| {
                if j < h0 {
                    clampp(n0 * self.alpha / h0 as f64)
                } else {
                    clampp(self.beta)
                }
            })
            .collect();
        let mut v = vec![0.0; self.dim()];
        for q in 0..ng {
            let (cn, vn, _) = self.groups[q];
            let deg = self.proto.cn_degree(cn) as f64;
            v[q] = 0.5 * (t[vn] / deg).ln();
        }
        for j in 0..nv {
            v[ng + j] = logit(t[j]);
        }
        let mut acc = [(0.0, 0usize); 2];
        for j in 0..nv {
            let d = self.proto.vn_degree(j) as f64;
            let s: f64 = self.vn_groups[j].iter().map(|&q| self.groups[q].2 as f64 * v[q]).sum();
            let k = usize::from(j >= h0);
            acc[k].0 += (d - 1.0) * v[ng + j] - s;
            acc[k].1 += 1;
        }
        v[ng + nv] = acc[0].0 / acc[0].1.max(1) as f64;
        v[ng + nv + 1] = acc[1].0 / acc[1].1.max(1) as f64;
        v
    }

    /// Max-norm; any NaN entry makes it infinite.
    fn norm(r: &[f64]) -> f64 {
        r.iter().fold(0.0, |m: f64, x| if x.is_nan() { f64::INFINITY } else { m.max(x.abs()) })
    }

    /// Damped Newton from `start`; returns the end point and its residual.
    fn newton(&self, start: Vec<f64>, opts: &GrowthOptions) -> (Vec<f64>, f64) {
        let mut v = start;
        let mut r = self.residual(&v);
        let mut nr = Self::norm(&r);
        for _ in 0..opts.max_newton {
            if !nr.is_finite() || nr < opts.tolerance {
                break;
            }
            let jac = self.jacobian(&v);
            let rhs = DVector::from_iterator(r.len(), r.iter().map(|x| -x));
            let Some(step) = jac.lu().solve(&rhs) else {
                break;
            };
            let mut t = 1.0;
            let mut improved = false;
            for _ in 0..40 {
                let cand: Vec<f64> = v
                    .iter()
                    .zip(step.iter())
                    .map(|(a, s)| (a + t * s).clamp(-60.0, 60.0))
                    .collect();
                let rc = self.residual(&cand);
                let nc = Self::norm(&rc);
                if nc.is_finite() && nc < nr {
                    v = cand;
                    r = rc;
                    nr = nc;
                    improved = true;
                    break;
                }
                t *= 0.5;
            }
            if !improved {
                break;
            }
        }
        (v, nr)
    }

    fn solution(&self, v: &[f64], residual: f64) -> GrowthSolution {
        let ng = self.groups.len();
        let nv = self.proto.num_vn();
        let n0 = self.proto.n0() as f64;
        let x = &v[..ng];
        let p: Vec<f64> = (0..nv).map(|j| sigmoid(v[ng + j])).collect();
        let mut g: f64 = (0..self.proto.n0()).map(|i| self.log_s(x, i)).sum::<f64>() / n0;
        for j in 0..nv {
            let d = self.proto.vn_degree(j) as f64;
            let theta = p[j] / n0;
            let s: f64 = self.vn_groups[j].iter().map(|&q| self.groups[q].2 as f64 * x[q]).sum();
            g -= (d - 1.0) / n0 * entropy_nats(p[j]) + theta * s;
        }
        GrowthSolution {
            alpha: self.alpha,
            beta: self.beta,
            z: self.edge_group.iter().map(|&q| x[q].exp()).collect(),
            theta: p.iter().map(|pj| pj / n0).collect(),
            mu1: v[ng + nv],
            mu2: v[ng + nv + 1],
            g,
            residual,
        }
    }

    fn from_solution(&self, s: &GrowthSolution) -> Vec<f64> {
        let ng = self.groups.len();
        let nv = self.proto.num_vn();
        let n0 = self.proto.n0() as f64;
        let mut v = vec![0.0; self.dim()];
        for (g, &q) in self.edge_group.iter().enumerate() {
            v[q] = s.z[g].ln();
        }
        for j in 0..nv {
            v[ng + j] = logit((s.theta[j] * n0).clamp(1e-15, 1.0 - 1e-15));
        }
        v[ng + nv] = s.mu1;
        v[ng + nv + 1] = s.mu2;
        v
    }
}

/// Largest `sum(theta[num])` over weight profiles with `sum(theta[den]) <= 1`
/// in which every single-edge VN type at a CN can be paired with ones from
/// the other edges there. `None` when unbounded.
fn max_weight_ratio(proto: &Protograph, num: &dyn Fn(usize) -> bool, den: &dyn Fn(usize) -> bool) -> Option<f64> {
    let nv = proto.num_vn();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs = Vec::new();
    for p in proto.pairs().iter().filter(|p| p.mult == 1) {
        let mut row = vec![0.0; nv];
        for o in proto.pairs().iter().filter(|o| o.cn == p.cn) {
            row[o.vn] -= o.mult as f64;
        }
        row[p.vn] += 2.0;
        rows.push(row);
        rhs.push(0.0);
    }
    rows.push((0..nv).map(|j| if den(j) { 1.0 } else { 0.0 }).collect());
    rhs.push(1.0);
    let cost: Vec<f64> = (0..nv).map(|j| if num(j) { 1.0 } else { 0.0 }).collect();
    simplex_max(&rows, &rhs, &cost)
}

/// Maximizes `c x` subject to `A x <= b`, `x >= 0`, with `b >= 0`, by the
/// tableau method with Bland's rule. `None` when unbounded.
fn simplex_max(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<f64> {
    const EPS: f64 = 1e-12;
    let (m, n) = (a.len(), c.len());
    let w = n + m + 1;
    let mut t = vec![vec![0.0; w]; m + 1];
    for i in 0..m {
        t[i][..n].copy_from_slice(&a[i]);
        t[i][n + i] = 1.0;
        t[i][w - 1] = b[i];
    }
    for j in 0..n {
        t[m][j] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    loop {
        let Some(col) = (0..n + m).find(|&j| t[m][j] < -EPS) else {
            return Some(t[m][w - 1]);
        };
        let mut pick: Option<(usize, f64)> = None;
        for i in 0..m {
            if t[i][col] > EPS {
                let r = t[i][w - 1] / t[i][col];
                let better = match pick {
                    None => true,
                    Some((k, best)) => r < best - EPS || (r <= best + EPS && basis[i] < basis[k]),
                };
                if better {
                    pick = Some((i, r));
                }
            }
        }
        let (row, _) = pick?;
        let pv = t[row][col];
        t[row].iter_mut().for_each(|x| *x /= pv);
        let prow = t[row].clone();
        for (i, r) in t.iter_mut().enumerate() {
            if i != row && r[col] != 0.0 {
                let f = r[col];
                r.iter_mut().zip(&prow).for_each(|(x, y)| *x -= f * y);
            }
        }
        basis[row] = col;
    }
}

/// Whether some codeword weight profile reaches the direction `(alpha, beta)`.
/// Outside this cone the average enumerator vanishes and `G = -inf`. The
/// per-type limit `theta_j <= 1 / n0` is not checked, so the test is exact
/// only at small weights.
pub fn weight_direction_feasible(proto: &Protograph, alpha: f64, beta: f64) -> bool {
    let h0 = proto.h0();
    let info = |j: usize| j < h0;
    let parity = |j: usize| j >= h0;
    const SLACK: f64 = 1e-9;
    let up = max_weight_ratio(proto, &info, &parity).is_none_or(|r| alpha <= r * beta * (1.0 + SLACK));
    let down = max_weight_ratio(proto, &parity, &info).is_none_or(|r| beta <= r * alpha * (1.0 + SLACK));
    up && down
}

/// `G(alpha, beta)` with default options.
pub fn growth_rate(proto: &Protograph, alpha: f64, beta: f64) -> Result<GrowthSolution> {
    growth_rate_with(proto, alpha, beta, &GrowthOptions::default(), None)
}

/// Solves the stationarity system at `(alpha, beta)`, optionally warm
/// started from a nearby solution.
pub fn growth_rate_with(
    proto: &Protograph,
    alpha: f64,
    beta: f64,
    opts: &GrowthOptions,
    warm: Option<&GrowthSolution>,
) -> Result<GrowthSolution> {
    let amax = proto.h0() as f64 / proto.n0() as f64;
    if !(alpha > 0.0 && alpha < amax && beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "growth rate needs 0 < alpha < {amax} and 0 < beta < 1"
        )));
    }
    if !weight_direction_feasible(proto, alpha, beta) {
        return Ok(GrowthSolution {
            alpha,
            beta,
            z: Vec::new(),
            theta: Vec::new(),
            mu1: f64::NAN,
            mu2: f64::NAN,
            g: f64::NEG_INFINITY,
            residual: 0.0,
        });
    }
    let sys = System::new(proto, alpha, beta, opts.reduce);
    let mut starts = Vec::new();
    if let Some(w) = warm.filter(|w| w.g.is_finite()) {
        starts.push(sys.from_solution(w));
    }
    let base = sys.initial();
    starts.push(base.clone());
    let mut best: Option<(Vec<f64>, f64)> = None;
    let seed_bits = alpha.to_bits() ^ beta.to_bits().rotate_left(17);
    let mut rng = stream_rng(opts.seed, seed_bits);
    let mut attempt = 0;
    loop {
        let start = if attempt < starts.len() {
            starts[attempt].clone()
        } else {
            base.iter()
                .map(|&b| b + rng.sample::<f64, _>(StandardNormal))
                .collect()
        };
        let (v, res) = sys.newton(start, opts);
        if res < opts.tolerance {
            let s = sys.solution(&v, res);
            if s.g.is_finite() {
                return Ok(s);
            }
        }
        if best.as_ref().is_none_or(|(_, b)| res < *b) {
            best = Some((v, res));
        }
        attempt += 1;
        if attempt >= starts.len() + opts.restarts {
            break;
        }
    }
    Err(Error::SolverDiverged {
        residual: best.map_or(f64::INFINITY, |(_, r)| r),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleClass {
    Good,
    Bad,
    Undetermined,
}

impl std::fmt::Display for EnsembleClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EnsembleClass::Good => "good",
            EnsembleClass::Bad => "bad",
            EnsembleClass::Undetermined => "undetermined",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub class: EnsembleClass,
    pub points: usize,
    pub positive: usize,
    pub negative: usize,
    pub failures: usize,
    pub max_g: f64,
}

pub const SIGN_TOLERANCE: f64 = 1e-9;
/// Smallest grid coordinate; `G(0, 0) = 0` trivially.
pub const GRID_FLOOR: f64 = 1e-4;

/// One grid row `alpha` fixed, `beta` ascending, warm-started along the row.
/// Points that fail are retried once from their right-hand neighbour.
pub fn growth_row(proto: &Protograph, alpha: f64, betas: &[f64], opts: &GrowthOptions) -> Vec<Result<GrowthSolution>> {
    let mut prev: Option<GrowthSolution> = None;
    let mut row: Vec<Result<GrowthSolution>> = betas
        .iter()
        .map(|&b| {
            let r = growth_rate_with(proto, alpha, b, opts, prev.as_ref());
            if let Ok(s) = &r {
                prev = Some(s.clone());
            }
            r
        })
        .collect();
    for k in (0..row.len().saturating_sub(1)).rev() {
        if row[k].is_err() {
            if let Ok(next) = &row[k + 1] {
                if next.g.is_finite() {
                    if let Ok(s) = growth_rate_with(proto, alpha, betas[k], opts, Some(next)) {
                        row[k] = Ok(s);
                    }
                }
            }
        }
    }
    row
}

/// Grid coordinates `step, 2 step, ..., <= max`, floored at
/// [`GRID_FLOOR`].
pub fn grid_axis(max: f64, step: f64) -> Vec<f64> {
    let n = (max / step + 1e-9).floor() as usize;
    (1..=n).map(|k| (k as f64 * step).max(GRID_FLOOR)).collect()
}

/// Sign of `G` over `(0, xi]^2`.
pub fn classify_ensemble(proto: &Protograph, xi: f64, step: f64, exec: Exec) -> ClassifyReport {
    let amax = proto.h0() as f64 / proto.n0() as f64;
    let alphas: Vec<f64> = grid_axis(xi, step).into_iter().filter(|&a| a < amax).collect();
    let betas = grid_axis(xi, step);
    let opts = GrowthOptions::default();
    let rows = map_range(exec, 0..alphas.len(), |k| growth_row(proto, alphas[k], &betas, &opts));
    let mut rep = ClassifyReport {
        class: EnsembleClass::Undetermined,
        points: 0,
        positive: 0,
        negative: 0,
        failures: 0,
        max_g: f64::NEG_INFINITY,
    };
    for r in rows.iter().flatten() {
        rep.points += 1;
        match r {
            Ok(s) => {
                rep.max_g = rep.max_g.max(s.g);
                if s.g > SIGN_TOLERANCE {
                    rep.positive += 1;
                } else if s.g < -SIGN_TOLERANCE {
                    rep.negative += 1;
                }
            }
            Err(_) => rep.failures += 1,
        }
    }
    rep.class = if rep.positive > 0 {
        EnsembleClass::Bad
    } else if rep.negative == rep.points && rep.points > 0 {
        EnsembleClass::Good
    } else {
        EnsembleClass::Undetermined
    };
    rep
}
