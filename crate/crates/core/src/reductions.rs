//! Promise-problem instances over graphs and the two instance-to-instance
//! reductions: fixed-particle Bose-Hubbard ground energy to fixed-weight XY
//! ground energy on the same graph, and diagram-backed instances to instances
//! on the simple graph produced by the doubling/stripping pipeline.
//!
//! The precision integer T is held as an arbitrary-precision integer (the
//! simple-graph reduction raises it to the seventh power); epsilon = 1/T is
//! evaluated in floating point with at most a couple of ulps of relative
//! error from the conversion and division.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::diagram::GateDiagram;
use crate::element::ElementGraph;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::sector::{lambda1, theta};
use crate::transforms::{build_nsl, build_sl, loopless_set};

/// Fixed-particle Bose-Hubbard promise instance: yes when the shifted ground
/// energy is at most `eps^alpha`, no when it is at least `eps + eps^alpha`.
#[derive(Debug, Clone)]
pub struct FfbhInstance {
    pub graph: Graph,
    pub particles: usize,
    pub t: BigUint,
    pub alpha: u32,
}

impl FfbhInstance {
    pub fn new(graph: Graph, particles: usize, t: BigUint, alpha: u32) -> Result<FfbhInstance> {
        let k = graph.num_vertices();
        if particles > k {
            return Err(Error::BadInstance(format!(
                "N = {particles} exceeds the vertex count {k}"
            )));
        }
        if alpha == 0 {
            return Err(Error::BadInstance(
                "alpha must be a positive integer".into(),
            ));
        }
        if t < BigUint::from(4 * k) {
            return Err(Error::BadInstance(format!(
                "T = {t} is below the required 4K = {}",
                4 * k
            )));
        }
        Ok(FfbhInstance {
            graph,
            particles,
            t,
            alpha,
        })
    }

    pub fn epsilon(&self) -> f64 {
        1.0 / self.t.to_f64().unwrap_or(f64::INFINITY)
    }
}

/// Fixed-weight XY promise instance: yes when the sector ground energy is at
/// most `c`, no when it is at least `c + eps`.
#[derive(Debug, Clone)]
pub struct XyInstance {
    pub graph: Graph,
    pub particles: usize,
    pub c: f64,
    pub t: BigUint,
    pub provenance: Option<XyProvenance>,
}

/// How the threshold `c` was produced.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct XyProvenance {
    pub mu: f64,
    pub mu_tolerance: f64,
}

impl XyInstance {
    pub fn new(graph: Graph, particles: usize, c: f64, t: BigUint) -> Result<XyInstance> {
        let k = graph.num_vertices();
        if particles > k {
            return Err(Error::BadInstance(format!(
                "N = {particles} exceeds the vertex count {k}"
            )));
        }
        if t == BigUint::ZERO {
            return Err(Error::BadInstance("T must be positive".into()));
        }
        Ok(XyInstance {
            graph,
            particles,
            c,
            t,
            provenance: None,
        })
    }

    pub fn epsilon(&self) -> f64 {
        1.0 / self.t.to_f64().unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Yes,
    No,
    Undetermined,
}

/// Outcome of measuring a promise instance. `undetermined` covers measured
/// values inside the promise gap or within the solver tolerance of either
/// threshold; arbitrary inputs need not satisfy the promise.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Verdict {
    pub classification: Classification,
    pub measured: f64,
    pub thresholds: (f64, f64),
    pub solver_tol: f64,
}

fn classify_measured(measured: f64, low: f64, high: f64, tol: f64) -> Classification {
    let is_yes = measured <= low + tol;
    let is_no = measured >= high - tol;
    match (is_yes, is_no) {
        (true, false) => Classification::Yes,
        (false, true) => Classification::No,
        _ => Classification::Undetermined,
    }
}

pub fn classify_ffbh(inst: &FfbhInstance, tol: f64) -> Result<Verdict> {
    let measured = lambda1(&inst.graph, inst.particles, tol)?;
    let eps = inst.epsilon();
    let low = eps.powi(inst.alpha as i32);
    let high = eps + low;
    Ok(Verdict {
        classification: classify_measured(measured, low, high, tol),
        measured,
        thresholds: (low, high),
        solver_tol: tol,
    })
}

pub fn classify_xy(inst: &XyInstance, tol: f64) -> Result<Verdict> {
    let measured = theta(&inst.graph, inst.particles, tol)?;
    let low = inst.c;
    let high = inst.c + inst.epsilon();
    Ok(Verdict {
        classification: classify_measured(measured, low, high, tol),
        measured,
        thresholds: (low, high),
        solver_tol: tol,
    })
}

/// Map a precision-cubed Bose-Hubbard instance to the XY instance on the same
/// graph: `T' = 4T` and `c = N mu(G) + eps / 4`, with the mu solve recorded
/// in the provenance.
pub fn reduce_bh_to_xy(inst: &FfbhInstance) -> Result<XyInstance> {
    if inst.alpha != 3 {
        return Err(Error::AlphaMismatch {
            expected: 3,
            found: inst.alpha,
        });
    }
    let mu_tolerance = 1e-10;
    let mu = inst.graph.mu(mu_tolerance)?;
    let eps = inst.epsilon();
    let c = inst.particles as f64 * mu + eps / 4.0;
    let mut out = XyInstance::new(inst.graph.clone(), inst.particles, c, &inst.t * 4u32)?;
    out.provenance = Some(XyProvenance { mu, mu_tolerance });
    Ok(out)
}

/// Record of the diagram-to-simple-graph reduction.
#[derive(Debug, Clone, Serialize)]
pub struct SimpleReductionProvenance {
    pub r: usize,
    pub k_input: usize,
    pub k_output: usize,
    pub t_prime_ge_4k_prime: bool,
    /// No ceiling on epsilon is enforced; callers needing one must check it.
    pub epsilon_ceiling_enforced: bool,
}

/// Compile a diagram, require it to reach the element's ground energy, run
/// the doubling/stripping pipeline, and package the result as an instance on
/// the simple graph with `T' = T^7`.
pub fn reduce_to_simple(
    d: &GateDiagram,
    elem: &ElementGraph,
    particles: usize,
    t: &BigUint,
    alpha: u32,
) -> Result<(FfbhInstance, SimpleReductionProvenance)> {
    let compiled = d.compile(elem)?;
    let k = compiled.num_vertices();
    let tol = 1e-9;
    let mu = compiled.mu(tol)?;
    if (mu - elem.ground_energy()).abs() > tol {
        return Err(Error::NotE1GateGraph {
            mu,
            expected: elem.ground_energy(),
        });
    }
    if particles > k {
        return Err(Error::BadInstance(format!(
            "N = {particles} exceeds the compiled vertex count {k}"
        )));
    }
    if *t < BigUint::from(4 * k) {
        return Err(Error::BadInstance(format!(
            "T = {t} is below the required 4K = {}",
            4 * k
        )));
    }
    let nset = loopless_set(d, elem);
    let sl = build_sl(&compiled, &nset)?;
    let nsl = build_nsl(&sl)?;
    debug_assert!(nsl.is_simple());
    let t_prime = t.pow(7);
    let k_output = nsl.num_vertices();
    let t_ok = t_prime >= BigUint::from(4 * k_output);
    let inst = FfbhInstance::new(nsl, particles, t_prime, alpha)?;
    Ok((
        inst,
        SimpleReductionProvenance {
            r: d.r(),
            k_input: k,
            k_output,
            t_prime_ge_4k_prime: t_ok,
            epsilon_ceiling_enforced: false,
        },
    ))
}

// --- instance files ----------------------------------------------------------

/// Reference to a diagram element in an instance file: a named built-in or a
/// pair of asset paths.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementRef {
    Named(String),
    Files { mtx: String, labels: String },
}

/// On-disk instance schema. Exactly one of `graph` (a Matrix Market path) or
/// `diagram` (a diagram JSON path, with `element`) must be present; `T` is a
/// decimal string so it survives the seventh power.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagram: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub element: Option<ElementRef>,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "T")]
    pub t: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

impl InstanceFile {
    pub fn parse_t(&self) -> Result<BigUint> {
        self.t
            .parse::<BigUint>()
            .map_err(|e| Error::Parse(format!("bad T value '{}': {e}", self.t)))
    }

    pub fn from_ffbh(inst: &FfbhInstance, graph_path: String) -> InstanceFile {
        InstanceFile {
            kind: "ffbh".into(),
            graph: Some(graph_path),
            diagram: None,
            element: None,
            n: inst.particles,
            t: inst.t.to_string(),
            alpha: Some(inst.alpha),
            c: None,
            provenance: None,
        }
    }

    pub fn from_xy(inst: &XyInstance, graph_path: String) -> InstanceFile {
        InstanceFile {
            kind: "xy".into(),
            graph: Some(graph_path),
            diagram: None,
            element: None,
            n: inst.particles,
            t: inst.t.to_string(),
            alpha: None,
            c: Some(inst.c),
            provenance: inst
                .provenance
                .as_ref()
                .and_then(|p| serde_json::to_value(p).ok()),
        }
    }

    /// Build the in-memory FFBH instance once the graph has been loaded.
    pub fn to_ffbh(&self, graph: Graph) -> Result<FfbhInstance> {
        let alpha = self
            .alpha
            .ok_or_else(|| Error::BadInstance("ffbh instance requires alpha".into()))?;
        FfbhInstance::new(graph, self.n, self.parse_t()?, alpha)
    }

    /// Build the in-memory XY instance once the graph has been loaded.
    pub fn to_xy(&self, graph: Graph) -> Result<XyInstance> {
        let c = self
            .c
            .ok_or_else(|| Error::BadInstance("xy instance requires c".into()))?;
        let mut inst = XyInstance::new(graph, self.n, c, self.parse_t()?)?;
        if let Some(p) = &self.provenance {
            inst.provenance = serde_json::from_value(p.clone()).ok();
        }
        Ok(inst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::empty_diagram;
    use crate::element::{mini_double_element, NodeScheme};
    use crate::graph::{disjoint_union, empty_graph, path_graph};
    use proptest::prelude::*;

    #[test]
    fn frustration_free_instance_is_yes() {
        let inst = FfbhInstance::new(empty_graph(4), 2, BigUint::from(16u32), 3).unwrap();
        let v = classify_ffbh(&inst, 1e-9).unwrap();
        assert_eq!(v.classification, Classification::Yes);
        assert!(v.measured.abs() < 1e-9);
    }

    #[test]
    fn single_edge_two_particles_is_no() {
        // lambda = 3 - sqrt 5 = 0.7639..., well above 1/8 + (1/8)^3
        let inst = FfbhInstance::new(path_graph(2), 2, BigUint::from(8u32), 3).unwrap();
        let v = classify_ffbh(&inst, 1e-9).unwrap();
        assert_eq!(v.classification, Classification::No);
        assert!((v.measured - (3.0 - 5.0f64.sqrt())).abs() < 1e-9);
    }

    #[test]
    fn near_degenerate_union_lands_in_the_gap() {
        // two paths of consecutive lengths: the cheapest excitation moves one
        // particle between the components' ground modes, costing
        // 2 (cos(pi/15) - cos(pi/14)) = 0.00644, inside (eps^3, eps + eps^3)
        // for T = 4K = 108
        let g = disjoint_union(&path_graph(13), &path_graph(14));
        let inst = FfbhInstance::new(g, 2, BigUint::from(108u32), 3).unwrap();
        let v = classify_ffbh(&inst, 1e-9).unwrap();
        let analytic =
            2.0 * ((std::f64::consts::PI / 15.0).cos() - (std::f64::consts::PI / 14.0).cos());
        assert!(
            (v.measured - analytic).abs() < 1e-9,
            "measured {} vs analytic {}",
            v.measured,
            analytic
        );
        assert!(v.measured > v.thresholds.0 && v.measured < v.thresholds.1);
        assert_eq!(v.classification, Classification::Undetermined);
    }

    #[test]
    fn bh_to_xy_parameter_map() {
        let g = path_graph(2);
        let inst = FfbhInstance::new(g, 1, BigUint::from(8u32), 3).unwrap();
        let xy = reduce_bh_to_xy(&inst).unwrap();
        assert_eq!(xy.t, BigUint::from(32u32));
        // c = N mu + eps/4 = -1 + 1/32
        assert!((xy.c - (-1.0 + 1.0 / 32.0)).abs() < 1e-9);
        let p = xy.provenance.unwrap();
        assert!((p.mu + 1.0).abs() < 1e-9);
        assert_eq!(p.mu_tolerance, 1e-10);

        let empty = FfbhInstance::new(empty_graph(2), 1, BigUint::from(8u32), 3).unwrap();
        let xy = reduce_bh_to_xy(&empty).unwrap();
        assert!((xy.c - 1.0 / 32.0).abs() < 1e-12);
    }

    #[test]
    fn bh_to_xy_requires_alpha_three() {
        let inst = FfbhInstance::new(path_graph(2), 1, BigUint::from(8u32), 2).unwrap();
        assert!(matches!(
            reduce_bh_to_xy(&inst).unwrap_err(),
            Error::AlphaMismatch {
                expected: 3,
                found: 2
            }
        ));
    }

    #[test]
    fn xy_classification_examples() {
        let g = path_graph(2);
        let yes = XyInstance::new(g.clone(), 1, -1.0, BigUint::from(4u32)).unwrap();
        assert_eq!(
            classify_xy(&yes, 1e-9).unwrap().classification,
            Classification::Yes
        );
        let no = XyInstance::new(g, 1, -2.0, BigUint::from(2u32)).unwrap();
        assert_eq!(
            classify_xy(&no, 1e-9).unwrap().classification,
            Classification::No
        );
    }

    #[test]
    fn simple_reduction_runs_the_pipeline() {
        let elem = mini_double_element();
        let d = empty_diagram(1, NodeScheme::AllNodes { t_max: 2 });
        let (inst, prov) = reduce_to_simple(&d, &elem, 1, &BigUint::from(40u32), 1).unwrap();
        assert_eq!(inst.graph.num_vertices(), 16);
        assert!(inst.graph.is_simple());
        assert_eq!(inst.t, BigUint::from(40u32).pow(7));
        assert_eq!(prov.k_input, 8);
        assert_eq!(prov.k_output, 16);
        assert!(prov.t_prime_ge_4k_prime);
        // frustration freeness carries through the pipeline; the output gap
        // eps' = T^-7 is tiny, so the verdict needs a tolerance below it
        let v_in = classify_ffbh(
            &FfbhInstance::new(d.compile(&elem).unwrap(), 1, BigUint::from(40u32), 8).unwrap(),
            1e-10,
        )
        .unwrap();
        let v_out = classify_ffbh(&inst, 1e-12).unwrap();
        assert_eq!(v_in.classification, Classification::Yes);
        assert_eq!(v_out.classification, Classification::Yes);
    }

    #[test]
    fn simple_reduction_rejects_nonconforming_diagrams() {
        use crate::diagram::GateDiagram;
        use crate::element::UnitaryLabel;
        let elem = mini_double_element();
        let d = GateDiagram::with_scheme(
            vec![UnitaryLabel::One],
            vec![
                crate::diagram::Node::new(1, 0, 1),
                crate::diagram::Node::new(1, 0, 2),
                crate::diagram::Node::new(1, 1, 1),
                crate::diagram::Node::new(1, 1, 2),
            ],
            vec![],
            NodeScheme::AllNodes { t_max: 2 },
        )
        .unwrap();
        assert!(matches!(
            reduce_to_simple(&d, &elem, 1, &BigUint::from(64u32), 1).unwrap_err(),
            Error::NotE1GateGraph { .. }
        ));
    }

    #[test]
    fn instance_invariants_are_enforced() {
        assert!(matches!(
            FfbhInstance::new(path_graph(2), 3, BigUint::from(100u32), 3).unwrap_err(),
            Error::BadInstance(_)
        ));
        assert!(matches!(
            FfbhInstance::new(path_graph(2), 1, BigUint::from(7u32), 3).unwrap_err(),
            Error::BadInstance(_)
        ));
    }

    #[test]
    fn instance_file_roundtrip() {
        let inst = FfbhInstance::new(path_graph(3), 1, BigUint::from(12u32), 3).unwrap();
        let file = InstanceFile::from_ffbh(&inst, "graph.mtx".into());
        let text = serde_json::to_string(&file).unwrap();
        assert!(text.contains("\"T\":\"12\""));
        let back: InstanceFile = serde_json::from_str(&text).unwrap();
        let rebuilt = back.to_ffbh(path_graph(3)).unwrap();
        assert_eq!(rebuilt.particles, 1);
        assert_eq!(rebuilt.t, BigUint::from(12u32));
        // big T survives the string round trip exactly
        let big = BigUint::from(40u32).pow(7);
        let inst2 = FfbhInstance::new(path_graph(3), 1, big.clone(), 1).unwrap();
        let file2 = InstanceFile::from_ffbh(&inst2, "g.mtx".into());
        let back2: InstanceFile =
            serde_json::from_str(&serde_json::to_string(&file2).unwrap()).unwrap();
        assert_eq!(back2.parse_t().unwrap(), big);
    }

    proptest! {
        #[test]
        fn verdicts_are_monotone_in_tolerance(
            measured in 0.0f64..1.0,
            low in 0.0f64..0.4,
            width in 0.01f64..0.6,
            tol1 in 1e-9f64..0.1,
            grow in 1.0f64..10.0,
        ) {
            let high = low + width;
            let tol2 = tol1 * grow;
            let v1 = classify_measured(measured, low, high, tol1);
            let v2 = classify_measured(measured, low, high, tol2);
            // enlarging the tolerance never flips yes <-> no
            prop_assert!(!(v1 == Classification::Yes && v2 == Classification::No));
            prop_assert!(!(v1 == Classification::No && v2 == Classification::Yes));
        }
    }
}
