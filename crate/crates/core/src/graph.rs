//! Graphs as symmetric 0-1 adjacency matrices with optional self-loops, basic
//! spectral quantities, and whole-graph self-loop manipulation.
//!
//! Adjacency is stored as sorted neighbor lists (a self-loop is vertex `i`
//! appearing in its own list). Graphs are immutable after construction and
//! symmetry is validated on construction, never assumed.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, LanczosOptions, SymOp};

/// Structured per-vertex labels. The scheme string names the labeling
/// convention (for example `ztj/1` or `qztj/1`); the tuples are opaque to this
/// module and interpreted by the modules that produce them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labels {
    pub scheme: String,
    pub tuples: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    rows: Vec<Vec<usize>>,
    labels: Option<Labels>,
}

/// Spectral facts about a graph's adjacency matrix.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectralSummary {
    pub mu: f64,
    pub norm_bound: f64,
    pub tolerance_used: f64,
}

impl Graph {
    /// Validate a dense square matrix as a graph adjacency.
    pub fn from_dense(a: &DMatrix<f64>) -> Result<Graph> {
        let n = a.nrows();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.ncols(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                let v = a[(i, j)];
                if v != 0.0 && v != 1.0 {
                    return Err(Error::NonBinaryEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                if a[(i, j)] != a[(j, i)] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        let rows = (0..n)
            .map(|i| (0..n).filter(|&j| a[(i, j)] == 1.0).collect())
            .collect();
        Ok(Graph {
            n,
            rows,
            labels: None,
        })
    }

    /// Build from an undirected entry list; each `(i, j)` sets both `A_ij`
    /// and `A_ji`, and `(i, i)` sets a self-loop. Duplicates are idempotent.
    pub fn from_entries(n: usize, entries: &[(usize, usize)]) -> Result<Graph> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(i, j) in entries {
            if i >= n || j >= n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: i.max(j) + 1,
                });
            }
            rows[i].push(j);
            if i != j {
                rows[j].push(i);
            }
        }
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
        }
        Ok(Graph {
            n,
            rows,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Labels) -> Result<Graph> {
        if labels.tuples.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: labels.tuples.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> Option<&Labels> {
        self.labels.as_ref()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.rows[v]
    }

    pub fn has_entry(&self, i: usize, j: usize) -> bool {
        self.rows[i].binary_search(&j).is_ok()
    }

    pub fn has_self_loop(&self, v: usize) -> bool {
        self.has_entry(v, v)
    }

    /// Number of stored nonzero entries (off-diagonal entries count twice).
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Entries of the upper triangle including the diagonal, as `(i, j)` with
    /// `i <= j`, sorted.
    pub fn upper_entries(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for &j in &self.rows[i] {
                if j >= i {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn is_simple(&self) -> bool {
        (0..self.n).all(|v| !self.has_self_loop(v))
    }

    pub fn has_all_self_loops(&self) -> bool {
        (0..self.n).all(|v| self.has_self_loop(v))
    }

    /// A - I. Requires a self-loop on every vertex; the result is simple.
    pub fn strip_all_self_loops(&self) -> Result<Graph> {
        for v in 0..self.n {
            if !self.has_self_loop(v) {
                return Err(Error::MissingSelfLoop(v));
            }
        }
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().copied().filter(|&j| j != i).collect())
            .collect();
        Ok(Graph {
            n: self.n,
            rows,
            labels: self.labels.clone(),
        })
    }

    /// A with every diagonal entry set to 1.
    pub fn add_all_self_loops(&self) -> Graph {
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut r = row.clone();
                if r.binary_search(&i).is_err() {
                    r.push(i);
                    r.sort_unstable();
                }
                r
            })
            .collect();
        Graph {
            n: self.n,
            rows,
            labels: self.labels.clone(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (i, row) in self.rows.iter().enumerate() {
            for &j in row {
                m[(i, j)] = 1.0;
            }
        }
        m
    }

    /// Max row sum of |A|; upper bound on the operator norm.
    pub fn norm1(&self) -> f64 {
        self.rows.iter().map(Vec::len).max().unwrap_or(0) as f64
    }

    /// Default eigensolve tolerance for this graph.
    pub fn default_tolerance(&self) -> f64 {
        1e-10 * self.norm1().max(1.0)
    }

    /// Smallest adjacency eigenvalue.
    pub fn mu(&self, tol: f64) -> Result<f64> {
        Ok(self.mu_with_vector(tol)?.0)
    }

    pub fn mu_with_vector(&self, tol: f64) -> Result<(f64, Vec<f64>)> {
        let pair = linalg::smallest_eigenpair(
            self,
            LanczosOptions {
                tol,
                ..LanczosOptions::default()
            },
        )?;
        Ok((pair.value, pair.vector))
    }

    pub fn spectral_summary(&self, tol: f64) -> Result<SpectralSummary> {
        Ok(SpectralSummary {
            mu: self.mu(tol)?,
            norm_bound: self.norm1(),
            tolerance_used: tol,
        })
    }
}

impl SymOp for Graph {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, row) in self.rows.iter().enumerate() {
            y[i] = row.iter().map(|&j| x[j]).sum();
        }
    }

    fn norm_upper(&self) -> f64 {
        self.norm1()
    }
}

/// The two-vertex single-edge graph.
pub fn path_graph(n: usize) -> Graph {
    let entries: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
    Graph::from_entries(n, &entries).expect("path graph is valid")
}

/// Complete graph on `n` vertices, no self-loops.
pub fn complete_graph(n: usize) -> Graph {
    let mut entries = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            entries.push((i, j));
        }
    }
    Graph::from_entries(n, &entries).expect("complete graph is valid")
}

/// Cycle on `n >= 3` vertices.
pub fn cycle_graph(n: usize) -> Graph {
    let mut entries: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    entries.push((n - 1, 0));
    Graph::from_entries(n, &entries).expect("cycle graph is valid")
}

/// Graph with no edges at all.
pub fn empty_graph(n: usize) -> Graph {
    Graph::from_entries(n, &[]).expect("empty graph is valid")
}

/// Disjoint union, with the second graph's vertices shifted past the first's.
pub fn disjoint_union(a: &Graph, b: &Graph) -> Graph {
    let na = a.num_vertices();
    let mut entries = a.upper_entries();
    for (i, j) in b.upper_entries() {
        entries.push((i + na, j + na));
    }
    Graph::from_entries(na + b.num_vertices(), &entries).expect("union of valid graphs is valid")
}
