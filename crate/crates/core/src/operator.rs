//! Sparse symmetric propagation operators built from a [`Graph`].

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Result, RfpError};
use crate::graph::Graph;
use crate::linalg::Matrix;

/// Largest dimension for which dense reference computations are allowed.
pub const ORACLE_CAP: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    /// `D̃^{-1/2} (A + I) D̃^{-1/2}`.
    SymNormAdjacency,
    /// `I − SymNormAdjacency`.
    SymNormLaplacian,
    /// The 0/1 adjacency matrix, no self-loops.
    RawAdjacency,
    /// Explicit symmetric matrix supplied by the caller.
    Custom,
}

impl OperatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OperatorKind::SymNormAdjacency => "adj-norm",
            OperatorKind::SymNormLaplacian => "lap-norm",
            OperatorKind::RawAdjacency => "adj-raw",
            OperatorKind::Custom => "custom",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OperatorKind {
    type Err = RfpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adj-norm" => Ok(OperatorKind::SymNormAdjacency),
            "lap-norm" => Ok(OperatorKind::SymNormLaplacian),
            "adj-raw" => Ok(OperatorKind::RawAdjacency),
            other => Err(RfpError::InvalidConfig(format!("unknown operator {other:?}"))),
        }
    }
}

/// A symmetric sparse matrix in CSR layout with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationOperator {
    kind: OperatorKind,
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

/// Rows below this many output entries are propagated on the calling thread.
const PARALLEL_THRESHOLD: usize = 1 << 15;

impl PropagationOperator {
    pub fn sym_norm_adjacency(g: &Graph) -> Self {
        let tilde_deg: Vec<f64> = g.degrees().iter().map(|&d| (d + 1) as f64).collect();
        Self::with_self_loops(g, OperatorKind::SymNormAdjacency, |u, v| {
            1.0 / (tilde_deg[u] * tilde_deg[v]).sqrt()
        })
    }

    pub fn sym_norm_laplacian(g: &Graph) -> Self {
        let adj = Self::sym_norm_adjacency(g);
        let mut values = adj.values;
        for u in 0..adj.n {
            for idx in adj.row_offsets[u]..adj.row_offsets[u + 1] {
                values[idx] = if adj.col_indices[idx] == u {
                    1.0 - values[idx]
                } else {
                    -values[idx]
                };
            }
        }
        Self {
            kind: OperatorKind::SymNormLaplacian,
            values,
            ..adj
        }
    }

    pub fn raw_adjacency(g: &Graph) -> Self {
        Self {
            kind: OperatorKind::RawAdjacency,
            n: g.node_count(),
            row_offsets: g.row_offsets().to_vec(),
            col_indices: g.col_indices().to_vec(),
            values: vec![1.0; g.col_indices().len()],
        }
    }

    pub fn build(g: &Graph, kind: OperatorKind) -> Result<Self> {
        match kind {
            OperatorKind::SymNormAdjacency => Ok(Self::sym_norm_adjacency(g)),
            OperatorKind::SymNormLaplacian => Ok(Self::sym_norm_laplacian(g)),
            OperatorKind::RawAdjacency => Ok(Self::raw_adjacency(g)),
            OperatorKind::Custom => Err(RfpError::InvalidConfig(
                "custom operators are built from explicit matrices".into(),
            )),
        }
    }

    /// Sparse copy of an exactly symmetric dense matrix (zeros dropped).
    pub fn from_dense(matrix: &Matrix) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(RfpError::DimensionMismatch("operator must be square".into()));
        }
        let asym = matrix.max_asymmetry();
        if asym != 0.0 {
            return Err(RfpError::Asymmetric(asym));
        }
        let n = matrix.rows();
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for i in 0..n {
            for (j, &v) in matrix.row(i).iter().enumerate() {
                if v != 0.0 {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self {
            kind: OperatorKind::Custom,
            n,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Diagonal operator, handy for synthetic spectra.
    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::from_dense(&Matrix::diagonal(values))
    }

    fn with_self_loops(g: &Graph, kind: OperatorKind, weight: impl Fn(usize, usize) -> f64) -> Self {
        let n = g.node_count();
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::with_capacity(g.col_indices().len() + n);
        let mut values = Vec::with_capacity(g.col_indices().len() + n);
        row_offsets.push(0);
        for u in 0..n {
            let neighbors = g.neighbors(u);
            let split = neighbors.partition_point(|&v| v < u);
            for &v in neighbors[..split]
                .iter()
                .chain(std::iter::once(&u))
                .chain(&neighbors[split..])
            {
                col_indices.push(v);
                values.push(weight(u, v));
            }
            row_offsets.push(col_indices.len());
        }
        Self {
            kind,
            n,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Stored value at `(u, v)`, zero when absent.
    pub fn entry(&self, u: usize, v: usize) -> f64 {
        let cols = &self.col_indices[self.row_offsets[u]..self.row_offsets[u + 1]];
        match cols.binary_search(&v) {
            Ok(pos) => self.values[self.row_offsets[u] + pos],
            Err(_) => 0.0,
        }
    }

    /// `S · x`. Each output entry sums its row's terms in ascending column
    /// order, so results do not depend on the thread count.
    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.rows() != self.n {
            return Err(RfpError::DimensionMismatch(format!(
                "operator of dimension {} applied to {} rows",
                self.n,
                x.rows()
            )));
        }
        let k = x.cols();
        let mut out = vec![0.0; self.n * k];
        let xs = x.data();
        let row_kernel = |u: usize, out_row: &mut [f64]| {
            for idx in self.row_offsets[u]..self.row_offsets[u + 1] {
                let w = self.values[idx];
                let src = &xs[self.col_indices[idx] * k..(self.col_indices[idx] + 1) * k];
                for (o, &s) in out_row.iter_mut().zip(src) {
                    *o += w * s;
                }
            }
        };
        if self.n * k >= PARALLEL_THRESHOLD && rayon::current_num_threads() > 1 {
            let rows_per_chunk = (PARALLEL_THRESHOLD / k).max(1);
            out.par_chunks_mut(rows_per_chunk * k)
                .enumerate()
                .for_each(|(chunk, block)| {
                    for (offset, out_row) in block.chunks_mut(k).enumerate() {
                        row_kernel(chunk * rows_per_chunk + offset, out_row);
                    }
                });
        } else {
            for (u, out_row) in out.chunks_mut(k).enumerate() {
                row_kernel(u, out_row);
            }
        }
        Ok(Matrix::from_raw(self.n, k, out))
    }

    /// `S · v` for a single vector.
    pub fn apply_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.n {
            return Err(RfpError::DimensionMismatch(format!(
                "operator of dimension {} applied to vector of length {}",
                self.n,
                v.len()
            )));
        }
        Ok((0..self.n)
            .map(|u| {
                (self.row_offsets[u]..self.row_offsets[u + 1])
                    .map(|idx| self.values[idx] * v[self.col_indices[idx]])
                    .sum()
            })
            .collect())
    }

    /// Dense materialization; refused above [`ORACLE_CAP`].
    pub fn dense_mirror(&self) -> Result<Matrix> {
        if self.n > ORACLE_CAP {
            return Err(RfpError::OracleCapExceeded {
                n: self.n,
                cap: ORACLE_CAP,
            });
        }
        let mut m = Matrix::zeros(self.n, self.n);
        for u in 0..self.n {
            for idx in self.row_offsets[u]..self.row_offsets[u + 1] {
                m.set(u, self.col_indices[idx], self.values[idx]);
            }
        }
        Ok(m)
    }
}
