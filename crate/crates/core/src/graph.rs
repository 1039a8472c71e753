//! Graph ingestion and the normalized operators built from it.
//!
//! Graphs are unweighted and undirected. Self-loops are never stored as
//! edges: [`GraphData::add_self_loops`] sets a flag and every node's degree
//! grows by one. The self-loop therefore enters `D` but contributes no row
//! to the incidence matrix, which keeps `B̂ᵀB̂ = L̂` exact.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::error::{HertaError, Result};
use crate::sparse::SparseSymmetric;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphData {
    n: usize,
    edges: Vec<(usize, usize)>,
    self_loops_added: bool,
}

impl GraphData {
    /// Build from an edge iterator. Pairs are normalized to `u < v`,
    /// deduplicated and sorted; `(u, u)` pairs are dropped.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(HertaError::InvalidConfig(format!(
                    "edge ({u}, {v}) out of range for {n} nodes"
                )));
            }
            if u != v {
                set.insert((u.min(v), u.max(v)));
            }
        }
        Ok(Self {
            n,
            edges: set.into_iter().collect(),
            self_loops_added: false,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn self_loops_added(&self) -> bool {
        self.self_loops_added
    }

    /// Idempotent.
    pub fn add_self_loops(mut self) -> Self {
        self.self_loops_added = true;
        self
    }

    /// Node degrees, counting the self-loop once when present.
    pub fn degrees(&self) -> Vec<f64> {
        let base = if self.self_loops_added { 1.0 } else { 0.0 };
        let mut deg = vec![base; self.n];
        for &(u, v) in &self.edges {
            deg[u] += 1.0;
            deg[v] += 1.0;
        }
        deg
    }

    fn require_self_loops(&self) -> Result<()> {
        if self.self_loops_added {
            Ok(())
        } else {
            Err(HertaError::InvalidConfig(
                "normalized operators need self-loops; call add_self_loops first".into(),
            ))
        }
    }

    /// `L̂ = I − D^{-1/2} A D^{-1/2}` with the self-loop included in `A`.
    pub fn normalized_laplacian(&self) -> Result<SparseSymmetric> {
        self.require_self_loops()?;
        let deg = self.degrees();
        let inv_sqrt: Vec<f64> = deg.iter().map(|d| 1.0 / d.sqrt()).collect();
        let diag = (0..self.n).map(|u| (u, u, 1.0 - 1.0 / deg[u]));
        let off = self
            .edges
            .iter()
            .map(|&(u, v)| (u, v, -inv_sqrt[u] * inv_sqrt[v]));
        Ok(SparseSymmetric::from_symmetric_entries(self.n, diag.chain(off)))
    }

    /// `B̂ = B D^{-1/2}`, one row per stored edge.
    pub fn normalized_incidence(&self) -> Result<IncidenceMatrix> {
        self.require_self_loops()?;
        let deg = self.degrees();
        let rows = self
            .edges
            .iter()
            .map(|&(u, v)| IncidenceRow {
                u,
                v,
                wu: 1.0 / deg[u].sqrt(),
                wv: 1.0 / deg[v].sqrt(),
            })
            .collect();
        Ok(IncidenceMatrix { n: self.n, rows })
    }

    /// `√d` per node: the diagonal similarity that makes `L̂`'s Gershgorin
    /// discs tight (every scaled disc of `L̂` ends below 2).
    pub fn degree_scaling(&self) -> Vec<f64> {
        self.degrees().iter().map(|d| d.sqrt()).collect()
    }

    pub fn write_edge_list(&self, mut w: impl std::io::Write) -> std::io::Result<()> {
        for &(u, v) in &self.edges {
            writeln!(w, "{u} {v}")?;
        }
        Ok(())
    }
}

/// One row of `B̂`: `+wu` at column `u`, `−wv` at column `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidenceRow {
    pub u: usize,
    pub v: usize,
    pub wu: f64,
    pub wv: f64,
}

impl IncidenceRow {
    /// `b̂ᵀx`.
    #[inline]
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.wu * x[self.u] - self.wv * x[self.v]
    }

    pub fn norm_sq(&self) -> f64 {
        self.wu * self.wu + self.wv * self.wv
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceMatrix {
    n: usize,
    rows: Vec<IncidenceRow>,
}

impl IncidenceMatrix {
    pub fn from_rows(n: usize, rows: Vec<IncidenceRow>) -> Self {
        assert!(rows.iter().all(|r| r.u < n && r.v < n), "incidence row out of range");
        Self { n, rows }
    }

    /// Recover `B̂` from a normalized Laplacian: every negative off-diagonal
    /// entry `(u, v)` is an edge, and `1/√d_u` follows from the diagonal.
    pub fn from_laplacian(l: &SparseSymmetric) -> Self {
        let inv: Vec<f64> = crate::sparsifier::laplacian_scaling(l).iter().map(|s| 1.0 / s).collect();
        let rows = (0..l.n())
            .flat_map(|u| l.row(u).filter(move |&(v, a)| v > u && a < 0.0).map(move |(v, _)| (u, v)))
            .map(|(u, v)| IncidenceRow {
                u,
                v,
                wu: inv[u],
                wv: inv[v],
            })
            .collect();
        Self { n: l.n(), rows }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[IncidenceRow] {
        &self.rows
    }

    /// `Σ_e w_e b̂_e b̂_eᵀ`; unit weights give `B̂ᵀB̂`.
    pub fn weighted_gram(&self, weights: &[f64]) -> SparseSymmetric {
        assert_eq!(weights.len(), self.rows.len());
        let entries = self
            .rows
            .iter()
            .zip(weights)
            .filter(|(_, w)| **w != 0.0)
            .flat_map(|(r, &w)| {
                [
                    (r.u, r.u, w * r.wu * r.wu),
                    (r.v, r.v, w * r.wv * r.wv),
                    (r.u, r.v, -w * r.wu * r.wv),
                ]
            });
        SparseSymmetric::from_symmetric_entries(self.n, entries)
    }

    pub fn gram(&self) -> SparseSymmetric {
        self.weighted_gram(&vec![1.0; self.rows.len()])
    }

    /// `M · B̂` for a dense `k × m` matrix given row-major, producing `k × n`.
    pub fn left_multiply(&self, m_rows: usize, data: &[f64]) -> Vec<f64> {
        let m = self.rows.len();
        assert_eq!(data.len(), m_rows * m);
        let mut out = vec![0.0; m_rows * self.n];
        for r in 0..m_rows {
            let src = &data[r * m..(r + 1) * m];
            let dst = &mut out[r * self.n..(r + 1) * self.n];
            for (e, row) in self.rows.iter().enumerate() {
                dst[row.u] += src[e] * row.wu;
                dst[row.v] -= src[e] * row.wv;
            }
        }
        out
    }
}

/// `H = I + λL`. Fails unless `λ > 0`.
pub fn regularized_operator(laplacian: &SparseSymmetric, lambda: f64) -> Result<SparseSymmetric> {
    if !(lambda > 0.0) {
        return Err(HertaError::NonPositiveLambda(lambda));
    }
    Ok(laplacian.scaled_plus_identity(lambda, 1.0))
}

/// Parse a whitespace-separated edge list. `#` lines and blank lines are
/// skipped; self-loop lines are dropped.
pub fn parse_edge_list(reader: impl Read, n_hint: Option<usize>) -> Result<GraphData> {
    let mut pairs = Vec::new();
    let mut max_id: Option<usize> = None;
    let mut valid_lines = 0usize;
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<usize> {
            let tok = tok.ok_or_else(|| HertaError::Parse {
                line: idx + 1,
                msg: "expected two node ids".into(),
            })?;
            tok.parse::<usize>().map_err(|e| HertaError::Parse {
                line: idx + 1,
                msg: format!("bad node id {tok:?}: {e}"),
            })
        };
        let u = parse(it.next())?;
        let v = parse(it.next())?;
        if it.next().is_some() {
            return Err(HertaError::Parse {
                line: idx + 1,
                msg: "trailing tokens after edge".into(),
            });
        }
        valid_lines += 1;
        max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
        pairs.push((u, v));
    }
    if valid_lines == 0 {
        return Err(HertaError::EmptyGraph);
    }
    let n = (max_id.unwrap() + 1).max(n_hint.unwrap_or(0));
    GraphData::new(n, pairs)
}

pub fn load_edge_list(path: impl AsRef<Path>, n_hint: Option<usize>) -> Result<GraphData> {
    parse_edge_list(std::fs::File::open(path)?, n_hint)
}
