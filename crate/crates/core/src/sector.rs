//! Fixed-sector Hamiltonians on a graph: the XY model restricted to a Hamming
//! weight sector, the Bose-Hubbard model at fixed particle number (built in
//! occupation coordinates with `sqrt(n_i (n_j + 1))` hopping amplitudes), and
//! the hard-core restriction that connects them.
//!
//! Operators are matrix-free with lazy CSR materialization below
//! [`MATERIALIZE_LIMIT`][crate::linalg::MATERIALIZE_LIMIT] basis states.

use std::sync::OnceLock;

use crate::combinatorics::{
    binomial, compositions, occupation_rank, occupation_unrank, weight_rank, weight_unrank,
};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::io::BasisManifest;
use crate::linalg::{self, Csr, LanczosOptions, SymOp, MATERIALIZE_LIMIT};

/// Largest sector dimension the bases will enumerate.
pub const BASIS_BUDGET: usize = 1_000_000;

pub const BASIS_ORDERING: &str = "occupancy-descending-lex/1";

/// All K-bit strings of Hamming weight N, descending lexicographic.
#[derive(Debug, Clone)]
pub struct HammingBasis {
    k: usize,
    n: usize,
    states: Vec<u64>,
}

impl HammingBasis {
    pub fn new(k: usize, n: usize) -> Result<HammingBasis> {
        if k == 0 || k > 63 || n > k {
            return Err(Error::BadWeight { n, k });
        }
        let dim = binomial(k, n);
        if dim > BASIS_BUDGET as u128 {
            return Err(Error::BudgetExceeded {
                needed: dim.min(usize::MAX as u128) as usize,
                budget: BASIS_BUDGET,
            });
        }
        let dim = dim as usize;
        let states = (0..dim).map(|r| weight_unrank(k, n, r)).collect();
        Ok(HammingBasis { k, n, states })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, index: usize) -> u64 {
        self.states[index]
    }

    pub fn rank(&self, mask: u64) -> usize {
        weight_rank(self.k, mask)
    }
}

/// All occupation vectors of K sites summing to N, descending lexicographic.
#[derive(Debug, Clone)]
pub struct BosonBasis {
    k: usize,
    n: usize,
    flat: Vec<u8>,
}

impl BosonBasis {
    pub fn new(k: usize, n: usize) -> Result<BosonBasis> {
        if k == 0 || n > u8::MAX as usize {
            return Err(Error::BadWeight { n, k });
        }
        let dim = compositions(k, n);
        if dim > BASIS_BUDGET as u128 {
            return Err(Error::BudgetExceeded {
                needed: dim.min(usize::MAX as u128) as usize,
                budget: BASIS_BUDGET,
            });
        }
        let dim = dim as usize;
        let mut flat = vec![0u8; dim * k];
        for r in 0..dim {
            occupation_unrank(k, n, r, &mut flat[r * k..(r + 1) * k]);
        }
        Ok(BosonBasis { k, n, flat })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.flat.len().checked_div(self.k).unwrap_or(0)
    }

    pub fn occupation(&self, index: usize) -> &[u8] {
        &self.flat[index * self.k..(index + 1) * self.k]
    }

    pub fn rank(&self, occ: &[u8]) -> usize {
        occupation_rank(occ)
    }
}

#[derive(Debug, Clone)]
pub enum SectorBasis {
    Hamming(HammingBasis),
    Boson(BosonBasis),
}

impl SectorBasis {
    pub fn dim(&self) -> usize {
        match self {
            SectorBasis::Hamming(b) => b.dim(),
            SectorBasis::Boson(b) => b.dim(),
        }
    }

    pub fn k(&self) -> usize {
        match self {
            SectorBasis::Hamming(b) => b.k(),
            SectorBasis::Boson(b) => b.k(),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            SectorBasis::Hamming(b) => b.n(),
            SectorBasis::Boson(b) => b.n(),
        }
    }

    pub fn manifest(&self) -> BasisManifest {
        BasisManifest {
            k: self.k(),
            n: self.n(),
            ordering: BASIS_ORDERING.into(),
            count: self.dim(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OperatorKind {
    Xy,
    BoseHubbard,
    HardcoreRestriction,
}

/// A Hermitian operator on an explicitly enumerated sector basis, with
/// matrix-free apply, optional materialized sparse form, and a recorded
/// constant shift (the operator is `H - shift`).
#[derive(Debug)]
pub struct SectorOperator {
    basis: SectorBasis,
    kind: OperatorKind,
    shift: f64,
    edges: Vec<(usize, usize)>,
    loops: Vec<usize>,
    loops_mask: u64,
    csr: OnceLock<Csr>,
    norm_cache: OnceLock<f64>,
}

impl SectorOperator {
    fn from_graph(graph: &Graph, basis: SectorBasis, kind: OperatorKind) -> SectorOperator {
        let mut edges = Vec::new();
        let mut loops = Vec::new();
        let mut loops_mask = 0u64;
        for (i, j) in graph.upper_entries() {
            if i == j {
                loops.push(i);
                if i < 64 {
                    loops_mask |= 1 << i;
                }
            } else {
                edges.push((i, j));
            }
        }
        SectorOperator {
            basis,
            kind,
            shift: 0.0,
            edges,
            loops,
            loops_mask,
            csr: OnceLock::new(),
            norm_cache: OnceLock::new(),
        }
    }

    pub fn basis(&self) -> &SectorBasis {
        &self.basis
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// The same operator with `shift` subtracted from the diagonal.
    pub fn with_shift(mut self, shift: f64) -> SectorOperator {
        self.shift = shift;
        self.csr = OnceLock::new();
        self.norm_cache = OnceLock::new();
        self
    }

    /// Visit every entry of row `i` as `(column, value)`, diagonal included.
    fn for_each_in_row<F: FnMut(usize, f64)>(&self, i: usize, mut f: F) {
        match (&self.basis, self.kind) {
            (SectorBasis::Hamming(basis), OperatorKind::Xy) => {
                let mask = basis.state(i);
                let diag = (mask & self.loops_mask).count_ones() as f64 - self.shift;
                if diag != 0.0 {
                    f(i, diag);
                }
                for &(u, v) in &self.edges {
                    let bu = mask >> u & 1;
                    let bv = mask >> v & 1;
                    if bu != bv {
                        let target = mask ^ (1 << u) ^ (1 << v);
                        f(basis.rank(target), 1.0);
                    }
                }
            }
            (SectorBasis::Hamming(basis), OperatorKind::HardcoreRestriction) => {
                // Bose-Hubbard matrix elements evaluated on 0/1 occupations,
                // dropping moves that leave the hard-core subspace.
                let mask = basis.state(i);
                let mut diag = -self.shift;
                for &k in &self.loops {
                    diag += (mask >> k & 1) as f64;
                }
                if diag != 0.0 {
                    f(i, diag);
                }
                for &(u, v) in &self.edges {
                    for (from, to) in [(u, v), (v, u)] {
                        let n_from = mask >> from & 1;
                        let n_to = mask >> to & 1;
                        if n_from == 1 && n_to == 0 {
                            let amp = ((n_from as f64) * (n_to as f64 + 1.0)).sqrt();
                            let target = mask ^ (1 << from) ^ (1 << to);
                            f(basis.rank(target), amp);
                        }
                    }
                }
            }
            (SectorBasis::Boson(basis), OperatorKind::BoseHubbard) => {
                let occ = basis.occupation(i);
                let mut diag = -self.shift;
                for &n in occ {
                    let n = n as f64;
                    diag += n * (n - 1.0);
                }
                for &k in &self.loops {
                    diag += occ[k] as f64;
                }
                if diag != 0.0 {
                    f(i, diag);
                }
                let mut scratch = occ.to_vec();
                for &(u, v) in &self.edges {
                    for (from, to) in [(u, v), (v, u)] {
                        if occ[from] > 0 {
                            let amp = ((occ[from] as f64) * (occ[to] as f64 + 1.0)).sqrt();
                            scratch.copy_from_slice(occ);
                            scratch[from] -= 1;
                            scratch[to] += 1;
                            f(basis.rank(&scratch), amp);
                        }
                    }
                }
            }
            _ => unreachable!("basis/kind pairing is fixed by the constructors"),
        }
    }

    /// Materialized sparse form; only available below the size limit.
    pub fn to_csr(&self) -> Option<&Csr> {
        let dim = self.basis.dim();
        if dim > MATERIALIZE_LIMIT {
            return None;
        }
        Some(self.csr.get_or_init(|| {
            let mut triplets = Vec::new();
            for i in 0..dim {
                self.for_each_in_row(i, |j, v| triplets.push((i, j, v)));
            }
            Csr::from_triplets(dim, triplets)
        }))
    }

    pub fn smallest_eigenvalue(&self, tol: f64) -> Result<f64> {
        let opts = LanczosOptions {
            tol,
            ..LanczosOptions::default()
        };
        let pair = match self.to_csr() {
            Some(csr) => linalg::smallest_eigenpair(csr, opts)?,
            None => linalg::smallest_eigenpair(self, opts)?,
        };
        Ok(pair.value)
    }
}

impl SymOp for SectorOperator {
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        if let Some(csr) = self.to_csr() {
            csr.apply(x, y);
            return;
        }
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            self.for_each_in_row(i, |j, v| acc += v * x[j]);
            *yi = acc;
        }
    }

    fn norm_upper(&self) -> f64 {
        *self.norm_cache.get_or_init(|| {
            if let Some(csr) = self.to_csr() {
                return csr.norm_upper();
            }
            let mut best = 0.0f64;
            for i in 0..self.basis.dim() {
                let mut row = 0.0;
                self.for_each_in_row(i, |_, v| row += v.abs());
                best = best.max(row);
            }
            best
        })
    }
}

/// XY model restricted to the Hamming-weight-N sector: swap entries across
/// graph edges plus a diagonal counting occupied self-looped vertices.
pub fn xy_sector(graph: &Graph, n: usize) -> Result<SectorOperator> {
    let basis = HammingBasis::new(graph.num_vertices(), n)?;
    Ok(SectorOperator::from_graph(
        graph,
        SectorBasis::Hamming(basis),
        OperatorKind::Xy,
    ))
}

/// Smallest eigenvalue of [`xy_sector`].
pub fn theta(graph: &Graph, n: usize, tol: f64) -> Result<f64> {
    xy_sector(graph, n)?.smallest_eigenvalue(tol)
}

/// Bose-Hubbard Hamiltonian at particle number N in occupation coordinates:
/// hopping `sqrt(n_i (n_j + 1))` across edges, diagonal
/// `sum_k n_k (n_k - 1) + sum_{loops} n_k`.
pub fn bose_hubbard(graph: &Graph, n: usize) -> Result<SectorOperator> {
    let basis = BosonBasis::new(graph.num_vertices(), n)?;
    Ok(SectorOperator::from_graph(
        graph,
        SectorBasis::Boson(basis),
        OperatorKind::BoseHubbard,
    ))
}

/// Ground energy of the shifted Bose-Hubbard Hamiltonian,
/// `lambda_min(bose_hubbard) - N mu(G)`; nonnegative up to solver tolerance.
pub fn lambda1(graph: &Graph, n: usize, tol: f64) -> Result<f64> {
    if n == 0 {
        return Ok(0.0);
    }
    let lam = bose_hubbard(graph, n)?.smallest_eigenvalue(tol)?;
    let mu = graph.mu(tol)?;
    Ok(lam - n as f64 * mu)
}

/// The Bose-Hubbard operator restricted to occupations with at most one
/// particle per vertex, re-indexed by the Hamming basis.
pub fn hardcore_restriction(graph: &Graph, n: usize) -> Result<SectorOperator> {
    let basis = HammingBasis::new(graph.num_vertices(), n)?;
    Ok(SectorOperator::from_graph(
        graph,
        SectorBasis::Hamming(basis),
        OperatorKind::HardcoreRestriction,
    ))
}

/// Frustration freeness at threshold: `lambda1 <= threshold`.
pub fn is_frustration_free(graph: &Graph, n: usize, threshold: f64) -> Result<bool> {
    Ok(lambda1(graph, n, threshold.clamp(1e-12, 1e-10))? <= threshold)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct HardcoreSuiteReport {
    pub graphs: usize,
    pub max_k: usize,
    pub max_n: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub worst_deviation: f64,
    pub pass: bool,
}

/// Entrywise comparison of the hard-core restriction against the XY sector
/// operator on seeded random graphs (self-loops included), for every particle
/// number up to `max_n`.
pub fn run_hardcore_suite(
    graphs: usize,
    max_k: usize,
    max_n: usize,
    seed: u64,
    tolerance: f64,
) -> Result<HardcoreSuiteReport> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..graphs {
        let k = rng.random_range(2..=max_k.max(2));
        let mut entries = Vec::new();
        for i in 0..k {
            for j in i..k {
                let p = if i == j { 0.3 } else { 0.5 };
                if rng.random::<f64>() < p {
                    entries.push((i, j));
                }
            }
        }
        let graph = Graph::from_entries(k, &entries)?;
        for n in 0..=max_n.min(k) {
            let hc = hardcore_restriction(&graph, n)?;
            let xy = xy_sector(&graph, n)?;
            let a = hc.to_csr().expect("suite sizes materialize").to_dense();
            let b = xy.to_csr().expect("suite sizes materialize").to_dense();
            worst = worst.max((a - b).abs().max());
        }
    }
    Ok(HardcoreSuiteReport {
        graphs,
        max_k,
        max_n,
        seed,
        tolerance,
        worst_deviation: worst,
        pass: worst <= tolerance,
    })
}
