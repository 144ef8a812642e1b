//! Protograph base matrices `B = [B1 | B2]`.
//!
//! The first `h0` columns are punctured variable-node types (they carry the
//! matcher output), the remaining `n0` columns are transmitted and form a
//! square right block.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on edge multiplicities.
pub const DEFAULT_ENTRY_CAP: u32 = 3;

/// A validated protograph base matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BaseMatrix {
    rows: Vec<Vec<u32>>,
    h0: usize,
    n0: usize,
}

/// One protograph edge, connecting VN type `vn` to CN type `cn`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub cn: usize,
    pub vn: usize,
}

/// A (CN type, VN type) pair with its multiplicity `b[cn][vn] > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgePair {
    pub cn: usize,
    pub vn: usize,
    pub mult: u32,
}

/// Graph view of a base matrix.
///
/// Edges are numbered row-major: CN type 0 first, within a row by VN type,
/// parallel edges consecutively.
#[derive(Debug, Clone)]
pub struct Protograph {
    base: BaseMatrix,
    edges: Vec<Edge>,
    pairs: Vec<EdgePair>,
    cn_edges: Vec<Vec<usize>>,
    vn_edges: Vec<Vec<usize>>,
    cn_pairs: Vec<Vec<usize>>,
    vn_pairs: Vec<Vec<usize>>,
}

/// On-disk form: `{"h0": int, "rows": [[int,...],...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaseMatrixFile {
    pub h0: usize,
    pub rows: Vec<Vec<u32>>,
}

impl BaseMatrix {
    /// Validates `raw` with the default entry cap.
    pub fn new(raw: Vec<Vec<u32>>, h0: usize) -> Result<Self> {
        Self::with_cap(raw, h0, DEFAULT_ENTRY_CAP)
    }

    pub fn with_cap(raw: Vec<Vec<u32>>, h0: usize, cap: u32) -> Result<Self> {
        let n_rows = raw.len();
        let n_cols = raw.first().map_or(0, Vec::len);
        if n_rows == 0 || n_cols == 0 || raw.iter().any(|r| r.len() != n_cols) {
            return Err(Error::MalformedMatrix);
        }
        if h0 == 0 || h0 >= n_cols {
            return Err(Error::BadPuncturedSplit { h0, cols: n_cols });
        }
        if n_cols - h0 != n_rows {
            return Err(Error::NonSquareRightPart {
                rows: n_rows,
                cols: n_cols - h0,
            });
        }
        for (i, row) in raw.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > cap {
                    return Err(Error::EntryCapExceeded {
                        row: i,
                        col: j,
                        value: v,
                        cap,
                    });
                }
            }
            if row.iter().all(|&v| v == 0) {
                return Err(Error::ZeroRow(i));
            }
        }
        for j in 0..n_cols {
            if raw.iter().all(|r| r[j] == 0) {
                return Err(Error::ZeroColumn(j));
            }
        }
        Ok(BaseMatrix {
            rows: raw,
            h0,
            n0: n_rows,
        })
    }

    /// Number of CN types (also the number of transmitted VN types).
    pub fn n0(&self) -> usize {
        self.n0
    }

    /// Number of punctured VN types.
    pub fn h0(&self) -> usize {
        self.h0
    }

    pub fn cols(&self) -> usize {
        self.h0 + self.n0
    }

    pub fn entry(&self, cn: usize, vn: usize) -> u32 {
        self.rows[cn][vn]
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn max_entry(&self) -> u32 {
        self.rows.iter().flatten().copied().max().unwrap_or(0)
    }

    pub fn is_punctured(&self, vn: usize) -> bool {
        vn < self.h0
    }

    pub fn cn_degree(&self, cn: usize) -> u32 {
        self.rows[cn].iter().sum()
    }

    pub fn vn_degree(&self, vn: usize) -> u32 {
        self.rows.iter().map(|r| r[vn]).sum()
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().flatten().map(|&v| v as usize).sum()
    }

    /// Inner rate `R_I = h0/n0` and mother-code rate `R_IM = h0/(h0+n0)`.
    pub fn rates(&self) -> (Ratio<u64>, Ratio<u64>) {
        let h0 = self.h0 as u64;
        let n0 = self.n0 as u64;
        (Ratio::new(h0, n0), Ratio::new(h0, h0 + n0))
    }

    pub fn inner_rate(&self) -> f64 {
        self.h0 as f64 / self.n0 as f64
    }

    pub fn protograph(&self) -> Protograph {
        Protograph::new(self.clone())
    }

    pub fn to_file(&self) -> BaseMatrixFile {
        BaseMatrixFile {
            h0: self.h0,
            rows: self.rows.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: BaseMatrixFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(f.rows, f.h0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("base matrix serializes")
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_json(&text)
    }
}

/// `(R_I, R_IM)` as exact rationals.
pub fn ensemble_rates(base: &BaseMatrix) -> (Ratio<u64>, Ratio<u64>) {
    base.rates()
}

impl Protograph {
    pub fn new(base: BaseMatrix) -> Self {
        let cols = base.cols();
        let mut edges = Vec::with_capacity(base.edge_count());
        let mut pairs = Vec::new();
        let mut cn_edges = vec![Vec::new(); base.n0];
        let mut vn_edges = vec![Vec::new(); cols];
        let mut cn_pairs = vec![Vec::new(); base.n0];
        let mut vn_pairs = vec![Vec::new(); cols];
        for cn in 0..base.n0 {
            for vn in 0..cols {
                let mult = base.rows[cn][vn];
                if mult == 0 {
                    continue;
                }
                cn_pairs[cn].push(pairs.len());
                vn_pairs[vn].push(pairs.len());
                pairs.push(EdgePair { cn, vn, mult });
                for _ in 0..mult {
                    cn_edges[cn].push(edges.len());
                    vn_edges[vn].push(edges.len());
                    edges.push(Edge { cn, vn });
                }
            }
        }
        Protograph {
            base,
            edges,
            pairs,
            cn_edges,
            vn_edges,
            cn_pairs,
            vn_pairs,
        }
    }

    pub fn base(&self) -> &BaseMatrix {
        &self.base
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn pairs(&self) -> &[EdgePair] {
        &self.pairs
    }

    /// Edge ids incident to CN type `cn`.
    pub fn cn_edges(&self, cn: usize) -> &[usize] {
        &self.cn_edges[cn]
    }

    pub fn vn_edges(&self, vn: usize) -> &[usize] {
        &self.vn_edges[vn]
    }

    /// Pair ids incident to CN type `cn`.
    pub fn cn_pairs(&self, cn: usize) -> &[usize] {
        &self.cn_pairs[cn]
    }

    pub fn vn_pairs(&self, vn: usize) -> &[usize] {
        &self.vn_pairs[vn]
    }

    pub fn n0(&self) -> usize {
        self.base.n0
    }

    pub fn h0(&self) -> usize {
        self.base.h0
    }

    pub fn num_vn(&self) -> usize {
        self.base.cols()
    }

    pub fn vn_degree(&self, vn: usize) -> usize {
        self.vn_edges[vn].len()
    }

    pub fn cn_degree(&self, cn: usize) -> usize {
        self.cn_edges[cn].len()
    }
}

/// Base matrices that appear throughout the examples and tests.
pub mod catalog {
    use super::BaseMatrix;

    /// 2x3 toy protograph with parallel edges.
    pub fn toy_parallel() -> BaseMatrix {
        BaseMatrix::new(vec![vec![1, 2, 0], vec![1, 1, 2]], 1).unwrap()
    }

    /// All-ones 2x3 protograph, one punctured column.
    pub fn all_ones_2x3() -> BaseMatrix {
        BaseMatrix::new(vec![vec![1, 1, 1], vec![1, 1, 1]], 1).unwrap()
    }

    /// All-ones 3x4 protograph, one punctured column.
    pub fn all_ones_3x4() -> BaseMatrix {
        BaseMatrix::new(vec![vec![1; 4], vec![1; 4], vec![1; 4]], 1).unwrap()
    }

    /// Inner rate 1/2 family (4x6, two punctured columns).
    pub fn rate_half() -> BaseMatrix {
        BaseMatrix::new(
            vec![
                vec![1, 0, 1, 1, 0, 0],
                vec![0, 1, 0, 3, 0, 1],
                vec![2, 0, 1, 1, 1, 0],
                vec![1, 2, 1, 2, 0, 0],
            ],
            2,
        )
        .unwrap()
    }

    /// Inner rate 2/3 family, unconstrained design (3x5).
    pub fn rate_two_thirds_a() -> BaseMatrix {
        BaseMatrix::new(
            vec![
                vec![1, 0, 0, 3, 1],
                vec![1, 1, 0, 3, 0],
                vec![1, 2, 2, 1, 0],
            ],
            2,
        )
        .unwrap()
    }

    /// Inner rate 2/3 family, designed with the good-ensemble constraint.
    pub fn rate_two_thirds_b() -> BaseMatrix {
        BaseMatrix::new(
            vec![
                vec![3, 3, 3, 0, 0],
                vec![0, 1, 3, 1, 0],
                vec![1, 0, 2, 0, 1],
            ],
            2,
        )
        .unwrap()
    }

    /// Looks up a catalog entry by name.
    pub fn by_name(name: &str) -> Option<BaseMatrix> {
        Some(match name {
            "toy" | "toy-parallel" => toy_parallel(),
            "ones-2x3" => all_ones_2x3(),
            "ones-3x4" => all_ones_3x4(),
            "b12" | "rate-half" => rate_half(),
            "b23a" => rate_two_thirds_a(),
            "b23b" => rate_two_thirds_b(),
            _ => return None,
        })
    }
}
