//! Lifting base matrices into sparse parity-check matrices `H = [H1 | H2]`,
//! and encoding for the resulting MN mother codes.
//!
//! Column `j * l + t` is copy `t` of VN type `j`, row `i * l + t` is copy `t`
//! of CN type `i`, so the `h = h0 * l` punctured columns come first.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::base::{BaseMatrix, BaseMatrixFile};
use crate::error::{Error, Result};
use crate::gf2::{pack, BitMatrix};
use crate::rng::stream_rng;

pub const DEFAULT_MAX_ATTEMPTS: usize = 16;

/// What to do when `H2` turns out singular.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum H2Policy {
    /// Fail with `SingularH2`.
    #[default]
    Strict,
    /// Keep the code but mark it non-encodable; it can still be decoded
    /// and searched, and simulated in the all-zero reference mode.
    Lenient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiftMethod {
    CirculantPeg,
    /// Edge-by-edge progressive edge growth inside the protograph
    /// structure, without circulant symmetry.
    ProtographPeg,
    UniformRandom,
    /// Rebuilt from an explicit check list.
    Explicit,
}

#[derive(Debug, Clone, Copy)]
pub struct LiftOptions {
    pub policy: H2Policy,
    pub max_attempts: usize,
}

impl Default for LiftOptions {
    fn default() -> Self {
        LiftOptions {
            policy: H2Policy::Strict,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }
}

impl LiftOptions {
    pub fn lenient() -> Self {
        LiftOptions {
            policy: H2Policy::Lenient,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone)]
enum Encoder {
    /// `(row, col)` pairs: row `row` of `H2` determines column `col` once
    /// the earlier ones are known.
    Peeling(Vec<(usize, usize)>),
    Dense(BitMatrix),
}

/// Shifts per `(cn type, vn type)`; CN copy `t` meets VN copy `t + s mod l`.
pub type ShiftTable = Vec<Vec<Vec<usize>>>;

#[derive(Debug, Clone)]
pub struct LiftedCode {
    base: BaseMatrix,
    lift: usize,
    seed: u64,
    method: LiftMethod,
    shifts: Option<ShiftTable>,
    checks: Vec<Vec<usize>>,
    vars: Vec<Vec<usize>>,
    encoder: Option<Encoder>,
}

/// True when `B2 mod 2` is singular. Summing all copies of the CN types in
/// a left null vector of `B2 mod 2` then gives the zero row for any lift, so
/// `H2` can never be inverted.
pub fn h2_structurally_singular(base: &BaseMatrix) -> bool {
    let h0 = base.h0();
    let rows: Vec<Vec<u8>> = base
        .rows()
        .iter()
        .map(|r| r[h0..].iter().map(|&b| (b & 1) as u8).collect())
        .collect();
    BitMatrix::from_rows(&rows).rank() < base.n0()
}

fn check_lift(base: &BaseMatrix, lift: usize) -> Result<()> {
    let m = base.max_entry();
    if lift == 0 || (lift as u64) < m as u64 {
        return Err(Error::LiftTooSmall {
            lift,
            multiplicity: m,
        });
    }
    Ok(())
}

/// Circulant lift with shifts chosen greedily for large local girth.
pub fn lift_circulant_peg(base: &BaseMatrix, lift: usize, seed: u64) -> Result<LiftedCode> {
    lift_circulant_peg_with(base, lift, seed, LiftOptions::default())
}

pub fn lift_circulant_peg_with(base: &BaseMatrix, lift: usize, seed: u64, opts: LiftOptions) -> Result<LiftedCode> {
    check_lift(base, lift)?;
    let singular = h2_structurally_singular(base);
    if singular && opts.policy == H2Policy::Strict {
        return Err(Error::SingularH2 { attempts: 0 });
    }
    let attempts = if singular { 1 } else { opts.max_attempts.max(1) };
    let mut last = None;
    for attempt in 0..attempts {
        let shifts = peg_shifts(base, lift, seed, attempt as u64);
        let code = LiftedCode::from_shifts(base.clone(), lift, seed, shifts, LiftMethod::CirculantPeg);
        if code.is_encodable() {
            return Ok(code);
        }
        last = Some(code);
    }
    match opts.policy {
        H2Policy::Strict => Err(Error::SingularH2 { attempts }),
        H2Policy::Lenient => Ok(last.expect("at least one attempt")),
    }
}

/// Progressive edge growth on the lifted graph itself: VN copies in order
/// of increasing degree, each edge to the farthest CN copy of the required
/// type that still has room for that VN type, ties to the lowest current
/// degree and then at random.
pub fn lift_protograph_peg(base: &BaseMatrix, lift: usize, seed: u64) -> Result<LiftedCode> {
    lift_protograph_peg_with(base, lift, seed, LiftOptions::default())
}

pub fn lift_protograph_peg_with(base: &BaseMatrix, lift: usize, seed: u64, opts: LiftOptions) -> Result<LiftedCode> {
    check_lift(base, lift)?;
    let singular = h2_structurally_singular(base);
    if singular && opts.policy == H2Policy::Strict {
        return Err(Error::SingularH2 { attempts: 0 });
    }
    let attempts = if singular { 1 } else { opts.max_attempts.max(1) };
    let mut last = None;
    for attempt in 0..attempts {
        let checks = protograph_peg_checks(base, lift, seed, attempt as u64);
        let code = LiftedCode::from_checks(base.clone(), lift, seed, checks, LiftMethod::ProtographPeg, None);
        if code.is_encodable() {
            return Ok(code);
        }
        last = Some(code);
    }
    match opts.policy {
        H2Policy::Strict => Err(Error::SingularH2 { attempts }),
        H2Policy::Lenient => Ok(last.expect("at least one attempt")),
    }
}

fn protograph_peg_checks(base: &BaseMatrix, lift: usize, seed: u64, attempt: u64) -> Vec<Vec<usize>> {
    let n0 = base.n0();
    let nv = base.cols();
    let mut rng = stream_rng(seed, 2 << 32 | attempt);
    let mut checks: Vec<Vec<usize>> = vec![Vec::new(); n0 * lift];
    let mut vars: Vec<Vec<usize>> = vec![Vec::new(); nv * lift];
    // edges of each VN type already placed at each CN copy
    let mut room = vec![vec![0u32; nv]; n0 * lift];
    let mut order: Vec<usize> = (0..nv).collect();
    order.sort_by_key(|&j| (base.vn_degree(j), j));
    let mut cn_dist = vec![usize::MAX; n0 * lift];
    let mut vn_seen = vec![false; nv * lift];
    let mut queue = VecDeque::new();
    for j in order {
        let mut copies: Vec<usize> = (0..lift).collect();
        copies.shuffle(&mut rng);
        for t in copies {
            let v = j * lift + t;
            for i in 0..n0 {
                for _ in 0..base.entry(i, j) {
                    cn_dist.iter_mut().for_each(|d| *d = usize::MAX);
                    if !vars[v].is_empty() {
                        vn_seen.iter_mut().for_each(|x| *x = false);
                        vn_seen[v] = true;
                        queue.push_back((v, 0usize));
                        while let Some((u, d)) = queue.pop_front() {
                            for &c in &vars[u] {
                                if cn_dist[c] == usize::MAX {
                                    cn_dist[c] = d + 1;
                                    for &w in &checks[c] {
                                        if !vn_seen[w] {
                                            vn_seen[w] = true;
                                            queue.push_back((w, d + 2));
                                        }
                                    }
                                }
                            }
                        }
                    }
                    let open: Vec<usize> = (i * lift..(i + 1) * lift)
                        .filter(|&c| room[c][j] < base.entry(i, j) && !vars[v].contains(&c))
                        .collect();
                    let key = |c: usize| (cn_dist[c], std::cmp::Reverse(checks[c].len()));
                    let best = open.iter().map(|&c| key(c)).max().expect("a CN copy with room is always left");
                    let cands: Vec<usize> = open.into_iter().filter(|&c| key(c) == best).collect();
                    let c = cands[rng.random_range(0..cands.len())];
                    checks[c].push(v);
                    vars[v].push(c);
                    room[c][j] += 1;
                }
            }
        }
    }
    checks
}

/// Lift with every edge interleaver drawn uniformly. Parallel edges of one
/// type pair are redrawn until they hit distinct positions, so the lifted
/// node degrees match the protograph.
pub fn lift_uniform_random(base: &BaseMatrix, lift: usize, seed: u64) -> Result<LiftedCode> {
    lift_uniform_random_with(base, lift, seed, LiftOptions::default())
}

pub fn lift_uniform_random_with(base: &BaseMatrix, lift: usize, seed: u64, opts: LiftOptions) -> Result<LiftedCode> {
    check_lift(base, lift)?;
    let singular = h2_structurally_singular(base);
    if singular && opts.policy == H2Policy::Strict {
        return Err(Error::SingularH2 { attempts: 0 });
    }
    let attempts = if singular { 1 } else { opts.max_attempts.max(1) };
    let mut last = None;
    for attempt in 0..attempts {
        let mut rng = stream_rng(seed, attempt as u64);
        let mut checks = vec![Vec::new(); base.n0() * lift];
        for (i, row) in base.rows().iter().enumerate() {
            for (j, &b) in row.iter().enumerate() {
                let mut taken: Vec<Vec<usize>> = vec![Vec::new(); lift];
                for _ in 0..b {
                    let mut perm: Vec<usize> = (0..lift).collect();
                    loop {
                        perm.shuffle(&mut rng);
                        if perm.iter().enumerate().all(|(t, p)| !taken[t].contains(p)) {
                            break;
                        }
                    }
                    for (t, &p) in perm.iter().enumerate() {
                        taken[t].push(p);
                        checks[i * lift + t].push(j * lift + p);
                    }
                }
            }
        }
        let code = LiftedCode::from_checks(base.clone(), lift, seed, checks, LiftMethod::UniformRandom, None);
        if code.is_encodable() {
            return Ok(code);
        }
        last = Some(code);
    }
    match opts.policy {
        H2Policy::Strict => Err(Error::SingularH2 { attempts }),
        H2Policy::Lenient => Ok(last.expect("at least one attempt")),
    }
}

/// Greedy circulant PEG. VN types are processed by increasing degree; each
/// edge picks the CN copy (relative to VN copy 0) farthest from VN copy 0 in
/// the graph built so far, ties broken at random. The quasi-cyclic symmetry
/// makes one BFS per edge enough.
fn peg_shifts(base: &BaseMatrix, lift: usize, seed: u64, attempt: u64) -> ShiftTable {
    let n0 = base.n0();
    let nv = base.cols();
    let mut rng = stream_rng(seed, 1 << 32 | attempt);
    let mut shifts: ShiftTable = vec![vec![Vec::new(); nv]; n0];
    let mut order: Vec<usize> = (0..nv).collect();
    order.sort_by_key(|&j| (base.vn_degree(j), j));
    for j in order {
        for i in 0..n0 {
            for _ in 0..base.entry(i, j) {
                let dist = qc_cn_distances(&shifts, lift, j);
                let used: Vec<usize> = shifts[i][j].iter().map(|&s| (lift - s) % lift).collect();
                let block = &dist[i * lift..(i + 1) * lift];
                let best = (0..lift)
                    .filter(|t| !used.contains(t))
                    .map(|t| block[t])
                    .max()
                    .expect("lift exceeds multiplicity");
                let cands: Vec<usize> = (0..lift)
                    .filter(|t| !used.contains(t) && block[*t] == best)
                    .collect();
                // the other translates of the new edge can close shorter
                // cycles than the distance above predicts
                let mut cycle = vec![0usize; cands.len()];
                for (c, &t) in cands.iter().enumerate() {
                    let s = (lift - t) % lift;
                    shifts[i][j].push(s);
                    cycle[c] = qc_cycle_through(&shifts, lift, i, j, s);
                    shifts[i][j].pop();
                }
                let longest = *cycle.iter().max().expect("candidate set is never empty");
                let cands: Vec<usize> = cands
                    .iter()
                    .zip(&cycle)
                    .filter(|(_, &c)| c == longest)
                    .map(|(&t, _)| t)
                    .collect();
                let t = cands[rng.random_range(0..cands.len())];
                shifts[i][j].push((lift - t) % lift);
            }
        }
    }
    shifts
}

/// Length of the shortest cycle through the edge between VN copy 0 of type
/// `vn` and CN copy `-s` of type `cn` (`usize::MAX` if there is none).
fn qc_cycle_through(shifts: &ShiftTable, lift: usize, cn: usize, vn: usize, s: usize) -> usize {
    let n0 = shifts.len();
    let nv = shifts.first().map_or(0, Vec::len);
    let start = (lift - s) % lift;
    let skip = |ci: usize, cu: usize, vj: usize, vt: usize, sh: usize| {
        ci == cn && cu == start && vj == vn && vt == 0 && sh == s
    };
    let mut cn_dist = vec![usize::MAX; n0 * lift];
    let mut vn_dist = vec![usize::MAX; nv * lift];
    let mut queue = VecDeque::new();
    cn_dist[cn * lift + start] = 0;
    queue.push_back((true, cn, start));
    while let Some((is_cn, ty, copy)) = queue.pop_front() {
        if is_cn {
            let d = cn_dist[ty * lift + copy];
            for (j, sh) in shifts[ty].iter().enumerate() {
                for &e in sh {
                    let t = (copy + e) % lift;
                    if skip(ty, copy, j, t, e) {
                        continue;
                    }
                    if j == vn && t == 0 {
                        return d + 2;
                    }
                    if vn_dist[j * lift + t] == usize::MAX {
                        vn_dist[j * lift + t] = d + 1;
                        queue.push_back((false, j, t));
                    }
                }
            }
        } else {
            let d = vn_dist[ty * lift + copy];
            for (i, row) in shifts.iter().enumerate() {
                for &e in &row[ty] {
                    let u = (copy + lift - e) % lift;
                    if skip(i, u, ty, copy, e) {
                        continue;
                    }
                    if cn_dist[i * lift + u] == usize::MAX {
                        cn_dist[i * lift + u] = d + 1;
                        queue.push_back((true, i, u));
                    }
                }
            }
        }
    }
    usize::MAX
}

/// BFS distances from VN copy 0 of type `root` to every CN copy
/// (`usize::MAX` when unreachable).
fn qc_cn_distances(shifts: &ShiftTable, lift: usize, root: usize) -> Vec<usize> {
    let n0 = shifts.len();
    let nv = shifts.first().map_or(0, Vec::len);
    let mut cn_dist = vec![usize::MAX; n0 * lift];
    let mut vn_dist = vec![usize::MAX; nv * lift];
    let mut queue = VecDeque::new();
    vn_dist[root * lift] = 0;
    // queue entries: (is_cn, type, copy)
    queue.push_back((false, root, 0usize));
    while let Some((is_cn, ty, copy)) = queue.pop_front() {
        if is_cn {
            let d = cn_dist[ty * lift + copy];
            for (j, sh) in shifts[ty].iter().enumerate() {
                for &s in sh {
                    let v = j * lift + (copy + s) % lift;
                    if vn_dist[v] == usize::MAX {
                        vn_dist[v] = d + 1;
                        queue.push_back((false, j, (copy + s) % lift));
                    }
                }
            }
        } else {
            let d = vn_dist[ty * lift + copy];
            for (i, row) in shifts.iter().enumerate() {
                for &s in &row[ty] {
                    let u = (copy + lift - s) % lift;
                    if cn_dist[i * lift + u] == usize::MAX {
                        cn_dist[i * lift + u] = d + 1;
                        queue.push_back((true, i, u));
                    }
                }
            }
        }
    }
    cn_dist
}

impl LiftedCode {
    pub fn from_shifts(base: BaseMatrix, lift: usize, seed: u64, shifts: ShiftTable, method: LiftMethod) -> Self {
        let mut checks = vec![Vec::new(); base.n0() * lift];
        for (i, row) in shifts.iter().enumerate() {
            for (j, sh) in row.iter().enumerate() {
                for &s in sh {
                    for (t, check) in checks[i * lift..(i + 1) * lift].iter_mut().enumerate() {
                        check.push(j * lift + (t + s) % lift);
                    }
                }
            }
        }
        Self::from_checks(base, lift, seed, checks, method, Some(shifts))
    }

    fn from_checks(
        base: BaseMatrix,
        lift: usize,
        seed: u64,
        mut checks: Vec<Vec<usize>>,
        method: LiftMethod,
        shifts: Option<ShiftTable>,
    ) -> Self {
        let ncols = base.cols() * lift;
        for c in checks.iter_mut() {
            c.sort_unstable();
        }
        let mut vars = vec![Vec::new(); ncols];
        for (r, c) in checks.iter().enumerate() {
            for &v in c {
                vars[v].push(r);
            }
        }
        let mut code = LiftedCode {
            base,
            lift,
            seed,
            method,
            shifts,
            checks,
            vars,
            encoder: None,
        };
        code.encoder = code.build_encoder();
        code
    }

    fn build_encoder(&self) -> Option<Encoder> {
        let h = self.h();
        let n = self.n();
        // peeling over H2
        let mut unknown: Vec<usize> = self
            .checks
            .iter()
            .map(|c| c.iter().filter(|&&v| v >= h).count())
            .collect();
        let mut known = vec![false; n];
        let mut row_used = vec![false; n];
        let mut queue: VecDeque<usize> = (0..n).filter(|&r| unknown[r] == 1).collect();
        let mut schedule = Vec::with_capacity(n);
        while let Some(r) = queue.pop_front() {
            if row_used[r] || unknown[r] != 1 {
                continue;
            }
            let col = self.checks[r]
                .iter()
                .find(|&&v| v >= h && !known[v - h])
                .map(|&v| v - h)
                .expect("one unknown column");
            row_used[r] = true;
            known[col] = true;
            schedule.push((r, col));
            for &rr in &self.vars[h + col] {
                unknown[rr] -= 1;
                if unknown[rr] == 1 && !row_used[rr] {
                    queue.push_back(rr);
                }
            }
        }
        if schedule.len() == n {
            return Some(Encoder::Peeling(schedule));
        }
        self.h2_dense().inverse().map(Encoder::Dense)
    }

    /// `H2` as a dense matrix.
    pub fn h2_dense(&self) -> BitMatrix {
        let h = self.h();
        let mut m = BitMatrix::zeros(self.n(), self.n());
        for (r, c) in self.checks.iter().enumerate() {
            for &v in c.iter().filter(|&&v| v >= h) {
                m.flip(r, v - h);
            }
        }
        m
    }

    pub fn base(&self) -> &BaseMatrix {
        &self.base
    }

    pub fn lift(&self) -> usize {
        self.lift
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn method(&self) -> LiftMethod {
        self.method
    }

    pub fn shifts(&self) -> Option<&ShiftTable> {
        self.shifts.as_ref()
    }

    /// Punctured length `h = h0 l`.
    pub fn h(&self) -> usize {
        self.base.h0() * self.lift
    }

    /// Transmitted length `n = n0 l`, also the number of checks.
    pub fn n(&self) -> usize {
        self.base.n0() * self.lift
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    /// Column indices per check.
    pub fn checks(&self) -> &[Vec<usize>] {
        &self.checks
    }

    /// Check indices per column.
    pub fn vars(&self) -> &[Vec<usize>] {
        &self.vars
    }

    pub fn edge_count(&self) -> usize {
        self.checks.iter().map(Vec::len).sum()
    }

    pub fn is_encodable(&self) -> bool {
        self.encoder.is_some()
    }

    /// True if every column of `H` is a circulant block (fixed by the shift
    /// `t -> t + 1` within each type).
    pub fn is_quasi_cyclic(&self) -> bool {
        self.shifts.is_some()
    }

    /// Transmitted part `c` with `H1 v + H2 c = 0`.
    pub fn encode(&self, v: &[u8]) -> Result<Vec<u8>> {
        let h = self.h();
        if v.len() != h {
            return Err(Error::LengthMismatch {
                expected: h,
                found: v.len(),
            });
        }
        let enc = self.encoder.as_ref().ok_or(Error::NotEncodable)?;
        let s: Vec<u8> = self
            .checks
            .iter()
            .map(|c| c.iter().take_while(|&&x| x < h).fold(0u8, |a, &x| a ^ v[x]))
            .collect();
        Ok(match enc {
            Encoder::Peeling(schedule) => {
                let mut c = vec![0u8; self.n()];
                for &(r, col) in schedule {
                    let acc = self.checks[r]
                        .iter()
                        .filter(|&&x| x >= h && x - h != col)
                        .fold(s[r], |a, &x| a ^ c[x - h]);
                    c[col] = acc;
                }
                c
            }
            Encoder::Dense(inv) => inv.mul_packed(&pack(&s)),
        })
    }

    /// `H [v | c]^T == 0` for a full word.
    pub fn is_codeword(&self, word: &[u8]) -> bool {
        word.len() == self.num_vars()
            && self
                .checks
                .iter()
                .all(|c| c.iter().fold(0u8, |a, &x| a ^ word[x]) == 0)
    }

    /// Length of the shortest cycle in the Tanner graph.
    pub fn girth(&self) -> Option<usize> {
        let nv = self.num_vars();
        let nc = self.n();
        let mut best = usize::MAX;
        // nodes: 0..nv variables, nv.. checks
        let mut dist = vec![usize::MAX; nv + nc];
        let mut parent = vec![usize::MAX; nv + nc];
        for src in 0..nv {
            dist.iter_mut().for_each(|d| *d = usize::MAX);
            dist[src] = 0;
            let mut queue = VecDeque::from([src]);
            'bfs: while let Some(u) = queue.pop_front() {
                if 2 * dist[u] >= best {
                    break;
                }
                let nbrs: Vec<usize> = if u < nv {
                    self.vars[u].iter().map(|&r| nv + r).collect()
                } else {
                    self.checks[u - nv].clone()
                };
                let mut seen_parent = false;
                for w in nbrs {
                    if w == parent[u] && !seen_parent {
                        seen_parent = true;
                        continue;
                    }
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        parent[w] = u;
                        queue.push_back(w);
                    } else {
                        best = best.min(dist[u] + dist[w] + 1);
                        if best == 4 {
                            break 'bfs;
                        }
                    }
                }
            }
            if best == 4 {
                break;
            }
        }
        (best != usize::MAX).then_some(best)
    }

    pub fn to_file(&self) -> CodeFile {
        CodeFile {
            base: self.base.to_file(),
            lift: self.lift,
            seed: self.seed,
            method: self.method,
            encodable: self.is_encodable(),
            shifts: self.shifts.clone(),
            checks: self.checks.clone(),
        }
    }

    pub fn from_file(file: CodeFile) -> Result<Self> {
        let base = BaseMatrix::with_cap(file.base.rows, file.base.h0, u32::MAX)?;
        if file.checks.len() != base.n0() * file.lift
            || file.checks.iter().flatten().any(|&v| v >= base.cols() * file.lift)
        {
            return Err(Error::Parse("check list does not fit the base matrix and lift".into()));
        }
        let method = if file.shifts.is_some() { file.method } else { LiftMethod::Explicit };
        Ok(Self::from_checks(base, file.lift, file.seed, file.checks, method, file.shifts))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CodeFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_json(&text)
    }

    /// Sparse matrix in the alist text format (1-based indices).
    pub fn to_alist(&self) -> String {
        use std::fmt::Write;
        let ncols = self.num_vars();
        let nrows = self.n();
        let maxc = self.vars.iter().map(Vec::len).max().unwrap_or(0);
        let maxr = self.checks.iter().map(Vec::len).max().unwrap_or(0);
        let mut s = String::new();
        writeln!(s, "{ncols} {nrows}").unwrap();
        writeln!(s, "{maxc} {maxr}").unwrap();
        let join = |v: &mut dyn Iterator<Item = usize>| v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        writeln!(s, "{}", join(&mut self.vars.iter().map(Vec::len))).unwrap();
        writeln!(s, "{}", join(&mut self.checks.iter().map(Vec::len))).unwrap();
        for v in &self.vars {
            let mut idx: Vec<usize> = v.iter().map(|r| r + 1).collect();
            idx.resize(maxc, 0);
            writeln!(s, "{}", join(&mut idx.into_iter())).unwrap();
        }
        for c in &self.checks {
            let mut idx: Vec<usize> = c.iter().map(|v| v + 1).collect();
            idx.resize(maxr, 0);
            writeln!(s, "{}", join(&mut idx.into_iter())).unwrap();
        }
        s
    }
}

/// Serialized lifted code: metadata plus the explicit check lists.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeFile {
    pub base: BaseMatrixFile,
    pub lift: usize,
    pub seed: u64,
    pub method: LiftMethod,
    pub encodable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shifts: Option<ShiftTable>,
    pub checks: Vec<Vec<usize>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::catalog;

    #[test]
    fn structural_singularity() {
        assert!(!h2_structurally_singular(&catalog::rate_half()));
        assert!(!h2_structurally_singular(&catalog::rate_two_thirds_b()));
        assert!(h2_structurally_singular(&catalog::rate_two_thirds_a()));
        assert!(h2_structurally_singular(&catalog::toy_parallel()));
        for seed in 0..5 {
            let c = lift_uniform_random_with(&catalog::toy_parallel(), 3, seed, LiftOptions::lenient()).unwrap();
            assert_eq!(c.h2_dense().rank() < c.n(), true);
        }
    }

    #[test]
    fn peg_lift_shape() {
        let b = catalog::rate_half();
        let c = lift_circulant_peg(&b, 300, 1).unwrap();
        assert_eq!((c.n(), c.h(), c.num_vars()), (1200, 600, 1800));
        for (j, v) in c.vars().iter().enumerate() {
            assert_eq!(v.len(), b.vn_degree(j / 300) as usize);
        }
        assert_eq!(c.edge_count(), 300 * b.edge_count());
        assert!(c.is_encodable());
        assert!(c.girth().unwrap() >= 6);
    }

    #[test]
    fn lift_errors() {
        let b = catalog::rate_half();
        assert_eq!(
            lift_circulant_peg(&b, 2, 0).unwrap_err(),
            Error::LiftTooSmall { lift: 2, multiplicity: 3 }
        );
        assert!(matches!(
            lift_circulant_peg(&catalog::rate_two_thirds_a(), 50, 0),
            Err(Error::SingularH2 { .. })
        ));
        let ok = BaseMatrix::new(vec![vec![1, 1, 0], vec![1, 0, 1]], 1).unwrap();
        let c = lift_uniform_random(&ok, 1, 0).unwrap();
        assert_eq!(c.checks(), &[vec![0, 1], vec![0, 2]]);
    }

    #[test]
    fn deterministic() {
        let b = catalog::rate_two_thirds_b();
        let a = lift_circulant_peg(&b, 40, 9).unwrap();
        let c = lift_circulant_peg(&b, 40, 9).unwrap();
        assert_eq!(a.checks(), c.checks());
        let a = lift_uniform_random(&b, 40, 9).unwrap();
        let c = lift_uniform_random(&b, 40, 9).unwrap();
        assert_eq!(a.checks(), c.checks());
    }

    #[test]
    fn file_roundtrip() {
        let c = lift_circulant_peg(&catalog::rate_half(), 12, 3).unwrap();
        let back = LiftedCode::from_json(&c.to_json()).unwrap();
        assert_eq!(back.checks(), c.checks());
        assert_eq!(back.shifts(), c.shifts());
        let alist = c.to_alist();
        assert!(alist.starts_with("72 48\n"));
    }
}
