//! Gate diagrams: `R` diagram elements with unitary labels, a node self-loop
//! set and a node edge set, compiled into a graph on `R * |element|` vertices.
//!
//! The compiled adjacency is `1_q (x) A(element) + h_S + h_E`, where a node
//! self-loop puts a self-loop on each of the node's `j_max` vertices, and a
//! node edge contributes the rank-`j_max` quadratic form
//! `(|n> + |n'>)(<n| + <n'|) (x) 1_j`: self-loops on both endpoint vertex
//! groups plus cross edges between them at matching `j`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use num_complex::Complex64;

use crate::element::{canonical_index, ElementGraph, NodeScheme, UnitaryLabel};
use crate::error::{Error, Result};
use crate::graph::{Graph, Labels};

pub const COMPILED_LABEL_SCHEME: &str = "qztj/1";

/// A diagram node: element index `q` (1-based), bit `z`, time step `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Node {
    pub q: u32,
    pub z: u8,
    pub t: u8,
}

impl Node {
    pub fn new(q: u32, z: u8, t: u8) -> Node {
        Node { q, z, t }
    }
}

#[derive(Debug, Clone)]
pub struct GateDiagram {
    labels: Vec<UnitaryLabel>,
    self_loops: Vec<Node>,
    edges: Vec<(Node, Node)>,
    scheme: NodeScheme,
}

impl GateDiagram {
    /// Validate a diagram against the standard 8-step node scheme.
    pub fn new(
        labels: Vec<UnitaryLabel>,
        self_loops: Vec<Node>,
        edges: Vec<(Node, Node)>,
    ) -> Result<GateDiagram> {
        GateDiagram::with_scheme(labels, self_loops, edges, NodeScheme::GateSet)
    }

    pub fn with_scheme(
        labels: Vec<UnitaryLabel>,
        mut self_loops: Vec<Node>,
        edges: Vec<(Node, Node)>,
        scheme: NodeScheme,
    ) -> Result<GateDiagram> {
        let r = labels.len() as u32;
        let check_node = |node: &Node| -> Result<()> {
            if node.q == 0 || node.q > r {
                return Err(Error::DanglingElementIndex { q: node.q, r });
            }
            if node.z > 1 {
                return Err(Error::Parse(format!("node z = {} is not a bit", node.z)));
            }
            let label = labels[(node.q - 1) as usize];
            if !scheme.allows(label, node.t) {
                return Err(Error::IllegalNodeForLabel {
                    q: node.q,
                    z: node.z,
                    t: node.t,
                    label: label.as_str().into(),
                });
            }
            Ok(())
        };

        let mut seen: BTreeMap<Node, ()> = BTreeMap::new();
        let mut touch = |node: Node| -> Result<()> {
            if seen.insert(node, ()).is_some() {
                return Err(Error::NodeConflict {
                    q: node.q,
                    z: node.z,
                    t: node.t,
                });
            }
            Ok(())
        };

        for node in &self_loops {
            check_node(node)?;
            touch(*node)?;
        }
        let mut edges: Vec<(Node, Node)> = edges
            .into_iter()
            .map(|(a, b)| if b < a { (b, a) } else { (a, b) })
            .collect();
        for (a, b) in &edges {
            check_node(a)?;
            check_node(b)?;
            touch(*a)?;
            touch(*b)?;
        }
        self_loops.sort_unstable();
        edges.sort_unstable();
        Ok(GateDiagram {
            labels,
            self_loops,
            edges,
            scheme,
        })
    }

    pub fn r(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[UnitaryLabel] {
        &self.labels
    }

    pub fn self_loops(&self) -> &[Node] {
        &self.self_loops
    }

    pub fn edges(&self) -> &[(Node, Node)] {
        &self.edges
    }

    pub fn scheme(&self) -> NodeScheme {
        self.scheme
    }

    /// Whether a node is in the self-loop set or touched by an edge.
    pub fn node_is_covered(&self, node: Node) -> bool {
        self.self_loops.binary_search(&node).is_ok()
            || self.edges.iter().any(|&(a, b)| a == node || b == node)
    }

    /// Row index of `(q, z, t, j)` in the compiled graph.
    pub fn compiled_index(&self, elem: &ElementGraph, q: u32, z: u8, t: u8, j: u8) -> usize {
        let v = elem.vertex_count();
        (q as usize - 1) * v + canonical_index(z, t, j, elem.t_max(), elem.j_max())
    }

    /// Compile into a graph on `R * |element|` vertices.
    pub fn compile(&self, elem: &ElementGraph) -> Result<Graph> {
        if self.scheme != elem.node_scheme() {
            return Err(Error::ElementGeometryMismatch(format!(
                "diagram validated against {:?} but element exposes {:?}",
                self.scheme,
                elem.node_scheme()
            )));
        }
        let v = elem.vertex_count();
        let r = self.r();
        let n = r * v;
        let (t_max, j_max) = (elem.t_max(), elem.j_max());

        // entry set with multiplicity check: compiled adjacency must stay 0-1
        let mut entries: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        let mut add = |i: usize, j: usize| {
            let key = if i <= j { (i, j) } else { (j, i) };
            *entries.entry(key).or_insert(0) += 1;
        };

        // 1_q (x) A(element): the element block repeated per q, translated
        // through the element's own row labeling into canonical coordinates
        let base: Vec<(usize, usize)> = elem
            .graph()
            .upper_entries()
            .into_iter()
            .map(|(a, b)| {
                let (za, ta, ja) = elem.label_of(a);
                let (zb, tb, jb) = elem.label_of(b);
                (
                    canonical_index(za, ta, ja, t_max, j_max),
                    canonical_index(zb, tb, jb, t_max, j_max),
                )
            })
            .collect();
        for q in 0..r {
            for &(a, b) in &base {
                add(q * v + a, q * v + b);
            }
        }

        // h_S: self-loops on all j_max vertices of each looped node
        for node in &self.self_loops {
            for j in 0..j_max {
                let idx = self.compiled_index(elem, node.q, node.z, node.t, j);
                add(idx, idx);
            }
        }

        // h_E: per edge, self-loops on both endpoint groups and cross edges
        for (a, b) in &self.edges {
            for j in 0..j_max {
                let ia = self.compiled_index(elem, a.q, a.z, a.t, j);
                let ib = self.compiled_index(elem, b.q, b.z, b.t, j);
                add(ia, ia);
                add(ib, ib);
                add(ia, ib);
            }
        }

        let mut flat = Vec::with_capacity(entries.len());
        for (&(i, j), &count) in &entries {
            if count > 1 {
                return Err(Error::InternalInvariant(format!(
                    "compiled entry ({i}, {j}) has multiplicity {count}; \
                     the element block collides with diagram terms"
                )));
            }
            flat.push((i, j));
        }
        let labels = Labels {
            scheme: COMPILED_LABEL_SCHEME.into(),
            tuples: (0..n)
                .map(|row| {
                    let q = row / v;
                    let (z, t, j) = decompose_canonical(row % v, t_max, j_max);
                    vec![q as u32 + 1, z as u32, t as u32, j as u32]
                })
                .collect(),
        };
        Graph::from_entries(n, &flat)?.with_labels(labels)
    }

    /// True when the compiled graph's smallest eigenvalue matches the
    /// element's declared ground energy within `tol`.
    pub fn is_e1_gate_graph(&self, elem: &ElementGraph, tol: f64) -> Result<bool> {
        let compiled = self.compile(elem)?;
        let mu = compiled.mu(tol)?;
        Ok((mu - elem.ground_energy()).abs() <= tol)
    }

    /// The `4R` orthonormal states `|q> (x) |psi_{z,a}>`, ordered by `q` then
    /// `(z, a)`. The compiled ground space of a conforming diagram lies in
    /// their span.
    pub fn y_space_basis(&self, elem: &ElementGraph) -> Vec<Vec<Complex64>> {
        let v = elem.vertex_count();
        let (t_max, j_max) = (elem.t_max(), elem.j_max());
        let n = self.r() * v;
        let mut out = Vec::with_capacity(4 * self.r());
        for q in 0..self.r() {
            for z in 0..2u8 {
                for a in 0..2u8 {
                    let psi = elem.ground_state(z, a);
                    let mut state = vec![Complex64::new(0.0, 0.0); n];
                    for (row, &amp) in psi.iter().enumerate() {
                        let (zz, tt, jj) = elem.label_of(row);
                        state[q * v + canonical_index(zz, tt, jj, t_max, j_max)] = amp;
                    }
                    out.push(state);
                }
            }
        }
        out
    }
}

fn decompose_canonical(idx: usize, t_max: u8, j_max: u8) -> (u8, u8, u8) {
    let tj = t_max as usize * j_max as usize;
    let z = (idx / tj) as u8;
    let rem = idx % tj;
    let t = (rem / j_max as usize) as u8 + 1;
    let j = (rem % j_max as usize) as u8;
    (z, t, j)
}

// --- JSON interchange -------------------------------------------------------

type NodeTriple = (u32, u8, u8);

/// On-disk diagram schema:
/// `{"R": int, "labels": ["1"|"H"|"HT", ...], "self_loops": [[q,z,t], ...],
///   "edges": [[[q,z,t],[q,z,t]], ...]}`

#[derive(Debug, Serialize, Deserialize)]
struct DiagramFile {
    #[serde(rename = "R")]
    r: u32,
    labels: Vec<String>,
    self_loops: Vec<NodeTriple>,
    edges: Vec<(NodeTriple, NodeTriple)>,
}

pub fn diagram_from_json(text: &str, scheme: NodeScheme) -> Result<GateDiagram> {
    let file: DiagramFile = serde_json::from_str(text)?;
    if file.r as usize != file.labels.len() {
        return Err(Error::Parse(format!(
            "R = {} but {} labels given",
            file.r,
            file.labels.len()
        )));
    }
    let labels = file
        .labels
        .iter()
        .map(|s| UnitaryLabel::parse(s))
        .collect::<Result<Vec<_>>>()?;
    let self_loops = file
        .self_loops
        .into_iter()
        .map(|(q, z, t)| Node::new(q, z, t))
        .collect();
    let edges = file
        .edges
        .into_iter()
        .map(|(a, b)| (Node::new(a.0, a.1, a.2), Node::new(b.0, b.1, b.2)))
        .collect();
    GateDiagram::with_scheme(labels, self_loops, edges, scheme)
}

pub fn diagram_to_json(d: &GateDiagram) -> Result<String> {
    let file = DiagramFile {
        r: d.r() as u32,
        labels: d.labels().iter().map(|l| l.as_str().to_string()).collect(),
        self_loops: d.self_loops().iter().map(|n| (n.q, n.z, n.t)).collect(),
        edges: d
            .edges()
            .iter()
            .map(|(a, b)| ((a.q, a.z, a.t), (b.q, b.z, b.t)))
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

/// Convenience: an all-ones-label diagram with no wiring.
pub fn empty_diagram(r: usize, scheme: NodeScheme) -> GateDiagram {
    GateDiagram::with_scheme(vec![UnitaryLabel::One; r], Vec::new(), Vec::new(), scheme)
        .expect("empty diagram is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::mini_double_element;
    use crate::linalg::{self, SymOp};

    fn mini_scheme() -> NodeScheme {
        NodeScheme::AllNodes { t_max: 2 }
    }

    #[test]
    fn accepts_trivial_diagram() {
        let d = GateDiagram::new(vec![UnitaryLabel::One], vec![], vec![]).unwrap();
        assert_eq!(d.r(), 1);
    }

    #[test]
    fn rejects_illegal_node_for_label() {
        // an H element does not expose t = 5
        let err =
            GateDiagram::new(vec![UnitaryLabel::H], vec![Node::new(1, 0, 5)], vec![]).unwrap_err();
        assert!(matches!(err, Error::IllegalNodeForLabel { t: 5, .. }));
        // but t = 5 is fine on a label-1 element
        assert!(
            GateDiagram::new(vec![UnitaryLabel::One], vec![Node::new(1, 0, 5)], vec![]).is_ok()
        );
    }

    #[test]
    fn rejects_node_conflicts() {
        let n1 = Node::new(1, 0, 1);
        let n2 = Node::new(2, 0, 1);
        // self-loop and edge on the same node
        let err = GateDiagram::new(
            vec![UnitaryLabel::One, UnitaryLabel::One],
            vec![n1],
            vec![(n1, n2)],
        )
        .unwrap_err();
        assert!(matches!(err, Error::NodeConflict { .. }));
        // double edge between the same pair
        let err = GateDiagram::new(
            vec![UnitaryLabel::One, UnitaryLabel::One],
            vec![],
            vec![(n1, n2), (n2, n1)],
        )
        .unwrap_err();
        assert!(matches!(err, Error::NodeConflict { .. }));
        // an edge from a node to itself
        let err = GateDiagram::new(vec![UnitaryLabel::One], vec![], vec![(n1, n1)]).unwrap_err();
        assert!(matches!(err, Error::NodeConflict { .. }));
    }

    #[test]
    fn rejects_dangling_element_index() {
        let err = GateDiagram::new(vec![UnitaryLabel::One], vec![Node::new(2, 0, 1)], vec![])
            .unwrap_err();
        assert!(matches!(err, Error::DanglingElementIndex { q: 2, r: 1 }));
    }

    #[test]
    fn empty_diagram_compiles_to_the_element_itself() {
        let elem = mini_double_element();
        let d = empty_diagram(1, mini_scheme());
        let g = d.compile(&elem).unwrap();
        assert_eq!(g.num_vertices(), 8);
        assert_eq!(g.to_dense(), elem.graph().to_dense());
        let mu = g.mu(1e-10).unwrap();
        assert!((mu - elem.ground_energy()).abs() < 1e-9);
        assert!(d.is_e1_gate_graph(&elem, 1e-9).unwrap());
    }

    #[test]
    fn self_loop_node_adds_loops_on_its_vertex_group() {
        let elem = mini_double_element();
        let d = GateDiagram::with_scheme(
            vec![UnitaryLabel::One],
            vec![Node::new(1, 0, 1)],
            vec![],
            mini_scheme(),
        )
        .unwrap();
        let g = d.compile(&elem).unwrap();
        let loops: Vec<usize> = (0..8).filter(|&v| g.has_self_loop(v)).collect();
        let expected: Vec<usize> = (0..2)
            .map(|j| d.compiled_index(&elem, 1, 0, 1, j))
            .collect();
        assert_eq!(loops, expected);
    }

    #[test]
    fn edge_adds_group_loops_and_cross_edges() {
        let elem = mini_double_element();
        let d = GateDiagram::with_scheme(
            vec![UnitaryLabel::One, UnitaryLabel::One],
            vec![],
            vec![(Node::new(1, 0, 1), Node::new(2, 0, 1))],
            mini_scheme(),
        )
        .unwrap();
        let g = d.compile(&elem).unwrap();
        assert_eq!(g.num_vertices(), 16);
        let mut loop_count = 0;
        let mut cross = 0;
        for v in 0..16 {
            if g.has_self_loop(v) {
                loop_count += 1;
            }
        }
        for j in 0..2 {
            let a = d.compiled_index(&elem, 1, 0, 1, j);
            let b = d.compiled_index(&elem, 2, 0, 1, j);
            if g.has_entry(a, b) {
                cross += 1;
            }
        }
        assert_eq!(loop_count, 4, "2 self-loops per endpoint node group");
        assert_eq!(cross, 2, "one cross edge per j");
        // cross edges only at matching j
        let a = d.compiled_index(&elem, 1, 0, 1, 0);
        let b = d.compiled_index(&elem, 2, 0, 1, 1);
        assert!(!g.has_entry(a, b));
    }

    #[test]
    fn compiled_mu_never_undershoots_element_energy() {
        let elem = mini_double_element();
        let diagrams = vec![
            empty_diagram(2, mini_scheme()),
            GateDiagram::with_scheme(
                vec![UnitaryLabel::One],
                vec![Node::new(1, 0, 1), Node::new(1, 1, 2)],
                vec![],
                mini_scheme(),
            )
            .unwrap(),
            GateDiagram::with_scheme(
                vec![UnitaryLabel::One, UnitaryLabel::One],
                vec![Node::new(1, 1, 1)],
                vec![(Node::new(1, 0, 1), Node::new(2, 0, 1))],
                mini_scheme(),
            )
            .unwrap(),
        ];
        for d in diagrams {
            let g = d.compile(&elem).unwrap();
            let mu = g.mu(1e-10).unwrap();
            assert!(mu >= elem.ground_energy() - 1e-9);
            // compiled norm bound from the positive semidefinite wiring terms
            let (vals, _) = linalg::dense_symmetric_eigen(&g.to_dense());
            let top = vals.last().unwrap().abs().max(vals[0].abs());
            assert!(top <= elem.graph().norm_upper() + 3.0 + 1e-9);
        }
    }

    #[test]
    fn y_space_states_are_orthonormal_and_block_supported() {
        let elem = mini_double_element();
        let d = empty_diagram(3, mini_scheme());
        let basis = d.y_space_basis(&elem);
        assert_eq!(basis.len(), 12);
        assert!(linalg::orthonormality_defect(&basis) < 1e-12);
        for (idx, state) in basis.iter().enumerate() {
            let q = idx / 4;
            for (row, amp) in state.iter().enumerate() {
                if row / 8 != q {
                    assert_eq!(amp.norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn ground_states_lie_in_y_space() {
        let elem = mini_double_element();
        let d = GateDiagram::with_scheme(
            vec![UnitaryLabel::One],
            vec![Node::new(1, 0, 1), Node::new(1, 0, 2)],
            vec![],
            mini_scheme(),
        )
        .unwrap();
        assert!(d.is_e1_gate_graph(&elem, 1e-9).unwrap());
        let g = d.compile(&elem).unwrap();
        let (vals, vecs) = linalg::dense_symmetric_eigen(&g.to_dense());
        let y = d.y_space_basis(&elem);
        for (i, &v) in vals.iter().enumerate() {
            if v > elem.ground_energy() + 1e-9 {
                break;
            }
            let chi = linalg::to_complex(vecs.column(i).as_slice());
            // projection of chi onto span(Y) must have full norm
            let proj_norm_sq: f64 = y.iter().map(|b| linalg::cdot(b, &chi).norm_sqr()).sum();
            assert!((proj_norm_sq - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn ground_states_have_zero_wiring_energy() {
        // on a conforming diagram every ground state annihilates the node
        // self-loop term and the node edge term separately
        let elem = mini_double_element();
        let d = GateDiagram::with_scheme(
            vec![UnitaryLabel::One, UnitaryLabel::One],
            vec![Node::new(2, 1, 2)],
            vec![(Node::new(1, 0, 1), Node::new(2, 0, 1))],
            mini_scheme(),
        )
        .unwrap();
        assert!(d.is_e1_gate_graph(&elem, 1e-9).unwrap());
        let g = d.compile(&elem).unwrap();
        let (vals, vecs) = linalg::dense_symmetric_eigen(&g.to_dense());
        for (i, &v) in vals.iter().enumerate() {
            if v > elem.ground_energy() + 1e-9 {
                break;
            }
            let chi: Vec<f64> = vecs.column(i).iter().copied().collect();
            let mut loop_energy = 0.0;
            for node in d.self_loops() {
                for j in 0..elem.j_max() {
                    loop_energy += chi[d.compiled_index(&elem, node.q, node.z, node.t, j)].powi(2);
                }
            }
            let mut edge_energy = 0.0;
            for (a, b) in d.edges() {
                for j in 0..elem.j_max() {
                    let sa = chi[d.compiled_index(&elem, a.q, a.z, a.t, j)];
                    let sb = chi[d.compiled_index(&elem, b.q, b.z, b.t, j)];
                    edge_energy += (sa + sb).powi(2);
                }
            }
            assert!(loop_energy <= 1e-10, "self-loop term energy {loop_energy}");
            assert!(edge_energy <= 1e-10, "edge term energy {edge_energy}");
        }
    }

    #[test]
    fn json_roundtrip() {
        let d = GateDiagram::with_scheme(
            vec![UnitaryLabel::One, UnitaryLabel::One],
            vec![Node::new(1, 1, 1)],
            vec![(Node::new(1, 0, 1), Node::new(2, 0, 1))],
            mini_scheme(),
        )
        .unwrap();
        let text = diagram_to_json(&d).unwrap();
        let back = diagram_from_json(&text, mini_scheme()).unwrap();
        assert_eq!(back.r(), 2);
        assert_eq!(back.self_loops(), d.self_loops());
        assert_eq!(back.edges(), d.edges());
        // malformed input surfaces as a parse error
        assert!(diagram_from_json("{not json", mini_scheme()).is_err());
    }
}
