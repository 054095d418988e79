//! The diagram-element building block: a fixed labeled graph together with a
//! declared ground energy and a declared orthonormal ground basis, plus a
//! conformance validator that checks the declaration against a dense
//! eigensolve.
//!
//! The standard 128-vertex element ships as an optional data asset (Matrix
//! Market file plus a label sidecar); everything in this crate is generic over
//! the element, and an 8-vertex mini double is provided so the whole pipeline
//! is testable without the asset.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, SQRT_2};
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, Labels};
use crate::io;
use crate::linalg::{self, DENSE_EIGEN_LIMIT};

/// Declared ground energy of the standard 128-vertex element asset.
pub const ASSET_GROUND_ENERGY: f64 = -1.0 - 3.0 * SQRT_2;

/// Declared per-block lower bound for the standard asset: every exposed node
/// projector has expectation 1/8 on the declared ground states.
pub const ASSET_BLOCK_BOUND: f64 = 0.125;

/// Same bound for the mini double (1/2).
pub const MINI_BLOCK_BOUND: f64 = 0.5;

/// Threshold on principal-angle sines for declaring two spans equal.
pub const SPAN_ANGLE_TOL: f64 = 1e-8;

pub const ASSET_LABEL_SCHEME: &str = "ztj/1";

/// Unitary label carried by a diagram element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnitaryLabel {
    One,
    H,
    Ht,
}

impl UnitaryLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            UnitaryLabel::One => "1",
            UnitaryLabel::H => "H",
            UnitaryLabel::Ht => "HT",
        }
    }

    pub fn parse(s: &str) -> Result<UnitaryLabel> {
        match s {
            "1" => Ok(UnitaryLabel::One),
            "H" => Ok(UnitaryLabel::H),
            "HT" => Ok(UnitaryLabel::Ht),
            other => Err(Error::Parse(format!("unknown unitary label: {other}"))),
        }
    }
}

/// Which `(z, t)` node pairs an element exposes for wiring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeScheme {
    /// The standard 8-step element: the exposed time steps depend on the
    /// unitary label.
    GateSet,
    /// Substitute elements expose every `(z, t)` pair they have.
    AllNodes { t_max: u8 },
}

impl NodeScheme {
    pub fn allows(&self, label: UnitaryLabel, t: u8) -> bool {
        match self {
            NodeScheme::GateSet => match label {
                UnitaryLabel::One => matches!(t, 1 | 3 | 5 | 7),
                UnitaryLabel::H => matches!(t, 1 | 3 | 2 | 8),
                UnitaryLabel::Ht => matches!(t, 1 | 3 | 4 | 6),
            },
            NodeScheme::AllNodes { t_max } => t >= 1 && t <= *t_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ElementSource {
    Asset,
    MiniDouble,
}

/// A building-block graph with vertices labeled `(z, t, j)` and a declared
/// ground space.
#[derive(Debug, Clone)]
pub struct ElementGraph {
    graph: Graph,
    labels: Vec<(u8, u8, u8)>,
    index: BTreeMap<(u8, u8, u8), usize>,
    t_max: u8,
    j_max: u8,
    ground_energy: f64,
    ground_basis: Vec<Vec<Complex64>>,
    block_bound: f64,
    source: ElementSource,
}

/// Result of checking an element's declaration against a dense eigensolve.
#[derive(Debug, Clone, Serialize)]
pub struct ConformanceReport {
    pub lambda_min: f64,
    pub lambda_min_matches_e1: bool,
    pub ground_dim: usize,
    pub basis_residual: f64,
    pub span_match: bool,
}

impl ElementGraph {
    /// Assemble and validate an element from parts. The declared basis must
    /// hold 4 orthonormal states in `(z, a)` order and the vertex count must
    /// be `2 * t_max * j_max`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        graph: Graph,
        labels: Vec<(u8, u8, u8)>,
        t_max: u8,
        j_max: u8,
        ground_energy: f64,
        ground_basis: Vec<Vec<Complex64>>,
        block_bound: f64,
        source: ElementSource,
    ) -> Result<ElementGraph> {
        let expected = 2 * t_max as usize * j_max as usize;
        if graph.num_vertices() != expected {
            return Err(Error::WrongVertexCount {
                expected,
                found: graph.num_vertices(),
            });
        }
        if labels.len() != expected {
            return Err(Error::BadLabeling(format!(
                "{} labels for {} vertices",
                labels.len(),
                expected
            )));
        }
        let mut index = BTreeMap::new();
        for (row, &(z, t, j)) in labels.iter().enumerate() {
            if z > 1 || t == 0 || t > t_max || j >= j_max {
                return Err(Error::BadLabeling(format!(
                    "label ({z},{t},{j}) outside geometry (t_max {t_max}, j_max {j_max})"
                )));
            }
            if index.insert((z, t, j), row).is_some() {
                return Err(Error::BadLabeling(format!("duplicate label ({z},{t},{j})")));
            }
        }
        if ground_basis.len() != 4 {
            return Err(Error::BadLabeling(format!(
                "expected 4 declared ground states, found {}",
                ground_basis.len()
            )));
        }
        for state in &ground_basis {
            if state.len() != expected {
                return Err(Error::DimensionMismatch {
                    expected,
                    found: state.len(),
                });
            }
        }
        let defect = linalg::orthonormality_defect(&ground_basis);
        if defect > 1e-12 {
            return Err(Error::NotOrthonormal { deviation: defect });
        }
        Ok(ElementGraph {
            graph,
            labels,
            index,
            t_max,
            j_max,
            ground_energy,
            ground_basis,
            block_bound,
            source,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.num_vertices()
    }

    pub fn t_max(&self) -> u8 {
        self.t_max
    }

    pub fn j_max(&self) -> u8 {
        self.j_max
    }

    pub fn ground_energy(&self) -> f64 {
        self.ground_energy
    }

    /// Declared ground states in `(z, a)` order: (0,0), (0,1), (1,0), (1,1).
    pub fn ground_basis(&self) -> &[Vec<Complex64>] {
        &self.ground_basis
    }

    pub fn ground_state(&self, z: u8, a: u8) -> &[Complex64] {
        &self.ground_basis[(z as usize) * 2 + a as usize]
    }

    pub fn block_bound(&self) -> f64 {
        self.block_bound
    }

    pub fn source(&self) -> ElementSource {
        self.source
    }

    pub fn node_scheme(&self) -> NodeScheme {
        match self.source {
            ElementSource::Asset => NodeScheme::GateSet,
            ElementSource::MiniDouble => NodeScheme::AllNodes { t_max: self.t_max },
        }
    }

    pub fn label_of(&self, row: usize) -> (u8, u8, u8) {
        self.labels[row]
    }

    pub fn index_of(&self, z: u8, t: u8, j: u8) -> Option<usize> {
        self.index.get(&(z, t, j)).copied()
    }

    pub fn labels(&self) -> &[(u8, u8, u8)] {
        &self.labels
    }
}

/// Canonical row index of `(z, t, j)` (t is 1-based).
pub fn canonical_index(z: u8, t: u8, j: u8, t_max: u8, j_max: u8) -> usize {
    (z as usize) * (t_max as usize * j_max as usize)
        + (t as usize - 1) * j_max as usize
        + j as usize
}

fn canonical_labels(t_max: u8, j_max: u8) -> Vec<(u8, u8, u8)> {
    let mut labels = Vec::with_capacity(2 * t_max as usize * j_max as usize);
    for z in 0..2u8 {
        for t in 1..=t_max {
            for j in 0..j_max {
                labels.push((z, t, j));
            }
        }
    }
    labels
}

/// Declared ground state of the standard 8-step geometry, in canonical row
/// order. `a = 1` is the entrywise complex conjugate of `a = 0`.
///
/// The `a = 0` state puts `|z>` on the odd time steps, `H|z>` on steps 2 and
/// 8, and `HT|z>` on steps 4 and 6, tensored with the phase state
/// `(1/sqrt 8) sum_j exp(-i pi j / 4) |j>`, all scaled by `1/sqrt 8`.
pub fn psi_state(z: u8, a: u8, t_max: u8, j_max: u8) -> Result<Vec<Complex64>> {
    if (t_max, j_max) != (8, 8) {
        return Err(Error::GeometryMismatch(format!(
            "declared states are defined for the 8x8 geometry, got {t_max}x{j_max}"
        )));
    }
    if z > 1 || a > 1 {
        return Err(Error::GeometryMismatch(format!(
            "z={z}, a={a} are not bits"
        )));
    }
    let scale = 1.0 / 8.0f64.sqrt();
    let omega: Vec<Complex64> = (0..8)
        .map(|j| Complex64::from_polar(scale, -FRAC_PI_4 * j as f64))
        .collect();
    // first-register amplitude <z'| U_t |z>
    let first = |zp: u8, t: u8| -> Complex64 {
        let h = |zp: u8, zz: u8| {
            Complex64::new(
                (1.0 / SQRT_2) * if zp == 1 && zz == 1 { -1.0 } else { 1.0 },
                0.0,
            )
        };
        match t {
            1 | 3 | 5 | 7 => Complex64::new(if zp == z { 1.0 } else { 0.0 }, 0.0),
            2 | 8 => h(zp, z),
            4 | 6 => {
                let phase = if z == 1 {
                    Complex64::from_polar(1.0, FRAC_PI_4)
                } else {
                    Complex64::new(1.0, 0.0)
                };
                h(zp, z) * phase
            }
            _ => unreachable!(),
        }
    };
    let mut state = vec![Complex64::new(0.0, 0.0); 128];
    for zp in 0..2u8 {
        for t in 1..=8u8 {
            for j in 0..8u8 {
                let amp = first(zp, t) * omega[j as usize] * scale;
                state[canonical_index(zp, t, j, 8, 8)] = amp;
            }
        }
    }
    if a == 1 {
        state.iter_mut().for_each(|c| *c = c.conj());
    }
    Ok(state)
}

/// The 8-vertex test double: adjacency `1_z (x) X_t (x) X_j` (X swaps the two
/// symbols), ground energy -1 with multiplicity 4, declared ground states
/// `|z>|+>|->` (a = 0) and `|z>|->|+>` (a = 1).
pub fn mini_double_element() -> ElementGraph {
    let (t_max, j_max) = (2u8, 2u8);
    let mut entries = Vec::new();
    for z in 0..2u8 {
        for j in 0..2u8 {
            let u = canonical_index(z, 1, j, t_max, j_max);
            let v = canonical_index(z, 2, 1 - j, t_max, j_max);
            entries.push((u, v));
        }
    }
    let labels = canonical_labels(t_max, j_max);
    let graph = Graph::from_entries(8, &entries)
        .and_then(|g| {
            g.with_labels(Labels {
                scheme: ASSET_LABEL_SCHEME.into(),
                tuples: labels
                    .iter()
                    .map(|&(z, t, j)| vec![z as u32, t as u32, j as u32])
                    .collect(),
            })
        })
        .expect("mini double construction is valid");

    let mut basis = Vec::with_capacity(4);
    for z in 0..2u8 {
        for a in 0..2u8 {
            let mut state = vec![Complex64::new(0.0, 0.0); 8];
            for t in 1..=2u8 {
                for j in 0..2u8 {
                    // a=0: |+>_t |->_j ; a=1: |->_t |+>_j
                    let sign_t = if a == 1 && t == 2 { -1.0 } else { 1.0 };
                    let sign_j = if a == 0 && j == 1 { -1.0 } else { 1.0 };
                    state[canonical_index(z, t, j, t_max, j_max)] =
                        Complex64::new(0.5 * sign_t * sign_j, 0.0);
                }
            }
            basis.push(state);
        }
    }

    ElementGraph::from_parts(
        graph,
        labels,
        t_max,
        j_max,
        -1.0,
        basis,
        MINI_BLOCK_BOUND,
        ElementSource::MiniDouble,
    )
    .expect("mini double is a valid element")
}

/// Load the standard element asset from a graph file and its label sidecar.
pub fn load_element(mtx_path: &Path, labels_path: &Path) -> Result<ElementGraph> {
    let graph = io::read_graph_file(mtx_path)?;
    if graph.num_vertices() != 128 {
        return Err(Error::WrongVertexCount {
            expected: 128,
            found: graph.num_vertices(),
        });
    }
    let sidecar = io::read_labels_file(labels_path)?;
    if sidecar.scheme != ASSET_LABEL_SCHEME {
        return Err(Error::BadLabeling(format!(
            "expected label scheme {ASSET_LABEL_SCHEME}, found {}",
            sidecar.scheme
        )));
    }
    if sidecar.tuples.len() != 128 {
        return Err(Error::BadLabeling(format!(
            "expected 128 label tuples, found {}",
            sidecar.tuples.len()
        )));
    }
    let mut labels = Vec::with_capacity(128);
    for tuple in &sidecar.tuples {
        if tuple.len() != 3 {
            return Err(Error::BadLabeling(format!(
                "label tuple {tuple:?} is not a (z,t,j) triple"
            )));
        }
        labels.push((tuple[0] as u8, tuple[1] as u8, tuple[2] as u8));
    }
    let graph = graph.with_labels(sidecar)?;

    // declared basis arranged by the asset's own row labeling
    let mut basis = Vec::with_capacity(4);
    for z in 0..2u8 {
        for a in 0..2u8 {
            let canonical = psi_state(z, a, 8, 8)?;
            let state: Vec<Complex64> = labels
                .iter()
                .map(|&(zz, tt, jj)| canonical[canonical_index(zz, tt, jj, 8, 8)])
                .collect();
            basis.push(state);
        }
    }

    ElementGraph::from_parts(
        graph,
        labels,
        8,
        8,
        ASSET_GROUND_ENERGY,
        basis,
        ASSET_BLOCK_BOUND,
        ElementSource::Asset,
    )
}

/// Check a declared element against a dense eigensolve.
pub fn validate_element(element: &ElementGraph, tol: f64) -> Result<ConformanceReport> {
    let n = element.vertex_count();
    if n > DENSE_EIGEN_LIMIT {
        return Err(Error::BudgetExceeded {
            needed: n,
            budget: DENSE_EIGEN_LIMIT,
        });
    }
    let dense = element.graph().to_dense();
    let (vals, vecs) = linalg::dense_symmetric_eigen(&dense);
    let lambda_min = vals[0];
    let ground_dim = vals.iter().take_while(|&&v| v <= lambda_min + tol).count();

    let e = element.ground_energy();
    let mut basis_residual = 0.0f64;
    for state in element.ground_basis() {
        let image = linalg::apply_complex(element.graph(), state);
        let res: f64 = image
            .iter()
            .zip(state.iter())
            .map(|(y, x)| (y - e * x).norm_sqr())
            .sum::<f64>()
            .sqrt();
        basis_residual = basis_residual.max(res);
    }

    let numerical: Vec<Vec<Complex64>> = (0..ground_dim)
        .map(|i| linalg::to_complex(vecs.column(i).as_slice()))
        .collect();
    let span_match = ground_dim == element.ground_basis().len()
        && linalg::span_residual(&numerical, element.ground_basis()) <= SPAN_ANGLE_TOL;

    Ok(ConformanceReport {
        lambda_min,
        lambda_min_matches_e1: (lambda_min - ASSET_GROUND_ENERGY).abs() <= tol,
        ground_dim,
        basis_residual,
        span_match,
    })
}
