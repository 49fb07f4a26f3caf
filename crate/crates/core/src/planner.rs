//! Distribution plans: EPR routing for every edge of the chosen state, the
//! per-node fusion schedule, local recovery gates and the overall success
//! probability
//!
//! ```text
//! p_overall = prod_{(i,j) in E*} p_ij * (p_cz * p_Y)^m1 * p_1g^m2
//! ```
//!
//! with `m1 = 2|E*| - |V*|` fusions and `m2` compressed recovery gates.

use std::fmt;

use thiserror::Error;

use crate::annealer::SaResult;
use crate::clifford::{self, CliffordError, SingleQubitClifford};
use crate::graph::{GraphError, GraphState, VertexId};
use crate::network::{best_path, NetworkError, NodeMapping, NoiseParams, PairProbabilities, PhysicalNetwork, Route};
use crate::orbit::{full_census, min_edge_cost, OrbitError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("recovery gates do not map the distributed state onto the target")]
    RecoveryVerificationFailed,
    #[error("chosen state does not share the target's qubits")]
    QubitMismatch,
    #[error("state is disconnected")]
    Disconnected,
    #[error("mapping covers {got} qubits, state has {expected}")]
    MappingInvalid { expected: usize, got: usize },
    #[error("EDCG cost needs at least 2 nodes, got {0}")]
    InvalidN(usize),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Clifford(#[from] CliffordError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
}

/// One fusion: a CZ from `control` onto `consumed`, then a Y-measurement of
/// `consumed`. Qubits are numbered as in
/// [`FusionRegister::after_distribution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FusionOp {
    pub vertex: usize,
    pub control: usize,
    pub consumed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutedEdge {
    pub edge: (usize, usize),
    pub route: Route,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionPlan {
    pub g_star: GraphState,
    pub witness: Vec<VertexId>,
    pub routes: Vec<RoutedEdge>,
    pub fusion_ops: Vec<FusionOp>,
    pub m1: usize,
    pub m2: usize,
    pub recovery: Vec<SingleQubitClifford>,
    /// Recovery reproduces the target's stabilizer signs exactly, not only
    /// its stabilizer group.
    pub strict_signs: bool,
    pub p_entanglement: f64,
    pub p_fusion: f64,
    pub p_lc: f64,
    pub p_overall: f64,
    /// EPR pairs under ideal distribution: one per edge of the chosen state.
    pub epr_cost: usize,
    /// Fiber links crossed by all routes together.
    pub route_hops: usize,
}

/// `2|E| - |V|`, the number of fusions that stitch a connected state together.
pub fn fusion_count(state: &GraphState) -> usize {
    (2 * state.edge_count()).saturating_sub(state.qubit_count())
}

/// `p_ent * (p_cz * p_Y)^m1 * p_1g^m2`.
pub fn overall_probability(p_entanglement: f64, m1: usize, m2: usize, noise: &NoiseParams) -> (f64, f64, f64) {
    let p_fusion = (noise.p_cz() * noise.p_y_msr).powi(m1 as i32);
    let p_lc = noise.p_1g().powi(m2 as i32);
    (p_fusion, p_lc, p_entanglement * p_fusion * p_lc)
}

/// Compressed recovery gates from `g_star` back to `target`.
pub fn recovery_gates(
    target: &GraphState,
    g_star: &GraphState,
    witness: &[VertexId],
) -> Result<Vec<SingleQubitClifford>, PlanError> {
    let word = clifford::recovery_word(target, witness, g_star)?;
    Ok(clifford::absorb_stabilizers(&clifford::compress(&word), target))
}

/// End-to-end success of building `g_star` and recovering `target`, using
/// precomputed pair probabilities.
pub fn end_to_end_probability(
    target: &GraphState,
    g_star: &GraphState,
    witness: &[VertexId],
    probs: &PairProbabilities,
    noise: &NoiseParams,
) -> Result<f64, PlanError> {
    let recovery = recovery_gates(target, g_star, witness)?;
    let m2 = clifford::gate_count(&recovery);
    let p_ent: f64 = g_star.edges().map(|(i, j)| probs.get(i, j)).product();
    Ok(overall_probability(p_ent, fusion_count(g_star), m2, noise).2)
}

/// Qubits held across the network while fragments are fused. Rows are
/// adjacency bitsets; qubit ids stay fixed when qubits are consumed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FusionRegister {
    adj: Vec<Vec<u64>>,
    hosts: Vec<usize>,
    alive: Vec<bool>,
}

impl FusionRegister {
    /// Register that exists once every EPR pair has arrived: edge `e = (i, j)`
    /// (in bit order) contributes qubit `2e` at vertex `i` and qubit `2e + 1`
    /// at vertex `j`, linked to each other.
    pub fn after_distribution(g_star: &GraphState) -> Result<Self, PlanError> {
        let edges: Vec<(usize, usize)> = g_star.edges().collect();
        let hosts = edges.iter().flat_map(|&(i, j)| [i, j]).collect();
        let links: Vec<(usize, usize)> = (0..edges.len()).map(|e| (2 * e, 2 * e + 1)).collect();
        Ok(Self::new(hosts, &links))
    }

    /// Arbitrary register; `edges` index into `hosts`.
    pub fn new(hosts: Vec<usize>, edges: &[(usize, usize)]) -> Self {
        let words = hosts.len().div_ceil(64);
        let mut reg = FusionRegister {
            adj: vec![vec![0; words]; hosts.len()],
            alive: vec![true; hosts.len()],
            hosts,
        };
        for &(a, b) in edges {
            reg.toggle(a, b);
        }
        reg
    }

    pub fn live_qubits(&self) -> Vec<usize> {
        (0..self.adj.len()).filter(|&k| self.alive[k]).collect()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a][b / 64] >> (b % 64) & 1 == 1
    }

    fn toggle(&mut self, a: usize, b: usize) {
        self.adj[a][b / 64] ^= 1 << (b % 64);
        self.adj[b][a / 64] ^= 1 << (a % 64);
    }

    /// CZ from `control` onto `consumed`, then Y-measurement of `consumed`.
    pub fn fuse(&mut self, control: usize, consumed: usize) -> Result<(), PlanError> {
        let n = self.adj.len();
        if control >= n || consumed >= n || !self.alive[control] || !self.alive[consumed] {
            return Err(PlanError::QubitMismatch);
        }
        if control == consumed {
            return Err(GraphError::SelfLoop(control).into());
        }
        if self.hosts[control] != self.hosts[consumed] {
            return Err(GraphError::CoLocationViolation {
                a: control,
                b: consumed,
                node_a: self.hosts[control] as u32,
                node_b: self.hosts[consumed] as u32,
            }
            .into());
        }
        self.toggle(control, consumed);
        let list: Vec<usize> = (0..n).filter(|&k| self.has_edge(consumed, k)).collect();
        for (x, &a) in list.iter().enumerate() {
            for &b in &list[x + 1..] {
                self.toggle(a, b);
            }
        }
        for &a in &list {
            self.toggle(a, consumed);
        }
        self.alive[consumed] = false;
        Ok(())
    }
}

/// Fusions per vertex: the EPR end towards the lowest neighbor is the
/// control, the others are consumed in ascending neighbor order.
/// Qubit ids follow [`FusionRegister::after_distribution`].
pub fn fusion_schedule(g_star: &GraphState) -> Vec<FusionOp> {
    let edges: Vec<(usize, usize)> = g_star.edges().collect();
    let mut ops = Vec::new();
    for v in 0..g_star.qubit_count() {
        // (neighbor, qubit) pairs at v
        let mut ends: Vec<(usize, usize)> = edges
            .iter()
            .enumerate()
            .filter_map(|(e, &(i, j))| {
                if i == v {
                    Some((j, 2 * e))
                } else if j == v {
                    Some((i, 2 * e + 1))
                } else {
                    None
                }
            })
            .collect();
        ends.sort_unstable();
        if let Some((&(_, control), rest)) = ends.split_first() {
            ops.extend(rest.iter().map(|&(_, consumed)| FusionOp {
                vertex: v,
                control,
                consumed,
            }));
        }
    }
    ops
}

/// Replays a fusion schedule on the post-distribution register and returns
/// the resulting state with one qubit per vertex, indexed by vertex.
pub fn replay_fusions(g_star: &GraphState, ops: &[FusionOp]) -> Result<GraphState, PlanError> {
    let mut reg = FusionRegister::after_distribution(g_star)?;
    for op in ops {
        if reg.hosts[op.control] != op.vertex {
            return Err(PlanError::QubitMismatch);
        }
        reg.fuse(op.control, op.consumed)?;
    }
    let live = reg.live_qubits();
    let mut seen = vec![false; g_star.qubit_count()];
    for &k in &live {
        if std::mem::replace(&mut seen[reg.hosts[k]], true) {
            return Err(PlanError::QubitMismatch);
        }
    }
    let mut edges = Vec::new();
    for (x, &a) in live.iter().enumerate() {
        for &b in &live[x + 1..] {
            if reg.has_edge(a, b) {
                edges.push((reg.hosts[a], reg.hosts[b]));
            }
        }
    }
    Ok(GraphState::from_edges(g_star.qubit_count(), &edges)?)
}

/// Full plan for distributing `target` by way of `sa.g_star`.
pub fn plan(
    target: &GraphState,
    sa: &SaResult,
    network: &PhysicalNetwork,
    mapping: &NodeMapping,
) -> Result<DistributionPlan, PlanError> {
    let q = target.qubit_count();
    if sa.g_star.qubit_count() != q {
        return Err(PlanError::QubitMismatch);
    }
    if mapping.len() != q {
        return Err(PlanError::MappingInvalid {
            expected: q,
            got: mapping.len(),
        });
    }
    if !sa.g_star.is_connected() {
        return Err(PlanError::Disconnected);
    }
    let g_star = sa.g_star.clone().without_labels();
    let routes = g_star
        .edges()
        .map(|(i, j)| {
            Ok(RoutedEdge {
                edge: (i, j),
                route: best_path(network, mapping.node(i), mapping.node(j))?,
            })
        })
        .collect::<Result<Vec<_>, PlanError>>()?;
    let recovery = recovery_gates(target, &g_star, &sa.witness)?;
    let check = clifford::verify_recovery(&g_star, &recovery, target)?;
    if !check.up_to_signs {
        return Err(PlanError::RecoveryVerificationFailed);
    }
    let m1 = fusion_count(&g_star);
    let m2 = clifford::gate_count(&recovery);
    let p_entanglement: f64 = routes.iter().map(|r| r.route.probability).product();
    let (p_fusion, p_lc, p_overall) = overall_probability(p_entanglement, m1, m2, &network.noise);
    Ok(DistributionPlan {
        fusion_ops: fusion_schedule(&g_star),
        route_hops: routes.iter().map(|r| r.route.hops()).sum(),
        epr_cost: g_star.edge_count(),
        witness: sa.witness.clone(),
        g_star,
        routes,
        m1,
        m2,
        recovery,
        strict_signs: check.strict,
        p_entanglement,
        p_fusion,
        p_lc,
        p_overall,
    })
}

/// Baseline: distribute the target itself, no recovery gates.
pub fn direct_plan(
    target: &GraphState,
    network: &PhysicalNetwork,
    mapping: &NodeMapping,
) -> Result<DistributionPlan, PlanError> {
    let sa = SaResult {
        g_star: target.clone(),
        witness: Vec::new(),
        objective: f64::NAN,
        trace: Vec::new(),
        best_is_initial: true,
    };
    plan(target, &sa, network, mapping)
}

/// EPR pairs consumed by the edge-decorated complete graph construction.
pub fn edcg_cost(node_count: usize) -> Result<usize, PlanError> {
    if node_count < 2 {
        return Err(PlanError::InvalidN(node_count));
    }
    Ok(node_count * (node_count - 1) / 2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EprRow {
    pub qubits: usize,
    pub ours: usize,
    pub edcg: usize,
    /// `1 - ours / edcg`.
    pub reduction: f64,
}

pub fn epr_row(qubits: usize, ours: usize) -> Result<EprRow, PlanError> {
    let edcg = edcg_cost(qubits)?;
    Ok(EprRow {
        qubits,
        ours,
        edcg,
        reduction: 1.0 - ours as f64 / edcg as f64,
    })
}

/// Worst-case EPR cost against EDCG for every register size `3..=max_qubits`.
pub fn epr_comparison(max_qubits: usize) -> Result<Vec<EprRow>, PlanError> {
    (3..=max_qubits)
        .map(|q| epr_row(q, min_edge_cost(&full_census(q)?)))
        .collect()
}

impl fmt::Display for DistributionPlan {
    /// Sectioned text form; field order is fixed.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[gstar]")?;
        write!(f, "{}", self.g_star)?;
        let w: Vec<String> = self.witness.iter().map(|v| v.to_string()).collect();
        writeln!(f, "witness {}", w.join(" "))?;
        writeln!(f, "[routes]")?;
        for r in &self.routes {
            let nodes: Vec<String> = r.route.nodes.iter().map(|n| n.to_string()).collect();
            writeln!(
                f,
                "edge {} {} nodes {} length_km {:.6} p {:.12e}",
                r.edge.0,
                r.edge.1,
                nodes.join(","),
                r.route.length,
                r.route.probability
            )?;
        }
        writeln!(f, "[fusions]")?;
        for op in &self.fusion_ops {
            writeln!(f, "vertex {} control {} consumed {}", op.vertex, op.control, op.consumed)?;
        }
        writeln!(f, "[recovery]")?;
        for (v, c) in self.recovery.iter().enumerate() {
            writeln!(f, "qubit {v} {c}")?;
        }
        writeln!(f, "[probabilities]")?;
        writeln!(f, "m1 {}", self.m1)?;
        writeln!(f, "m2 {}", self.m2)?;
        writeln!(f, "epr_cost {}", self.epr_cost)?;
        writeln!(f, "route_hops {}", self.route_hops)?;
        writeln!(f, "strict_signs {}", self.strict_signs)?;
        writeln!(f, "p_entanglement {:.12e}", self.p_entanglement)?;
        writeln!(f, "p_fusion {:.12e}", self.p_fusion)?;
        writeln!(f, "p_lc {:.12e}", self.p_lc)?;
        writeln!(f, "p_overall {:.12e}", self.p_overall)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Link;

    fn fake_network(p_target: f64) -> (PhysicalNetwork, NoiseParams) {
        // three nodes, all pairs linked with the same length; pick the length
        // so that each elementary probability is p_target
        let noise = NoiseParams {
            epsilon_2g: 0.05,
            p_y_msr: 0.99,
            epsilon_1g: 0.01,
            ..Default::default()
        };
        let base = noise.path_success(0.0, 1);
        let length = -(p_target / base).ln() * noise.l_att();
        let links = vec![
            Link { u: 0, v: 1, length },
            Link { u: 0, v: 2, length },
            Link { u: 1, v: 2, length },
        ];
        (PhysicalNetwork::new(3, links, noise).unwrap(), noise)
    }

    fn sa_for(target: &GraphState, witness: &[usize]) -> SaResult {
        let w: Vec<VertexId> = witness.iter().map(|&v| VertexId(v)).collect();
        SaResult {
            g_star: target.apply_pivots(&w).unwrap(),
            witness: w,
            objective: 0.0,
            trace: Vec::new(),
            best_is_initial: witness.is_empty(),
        }
    }

    #[test]
    fn triangle_direct() {
        let (net, _) = fake_network(0.3);
        let tri = GraphState::complete(3).unwrap();
        let map = NodeMapping::new(vec![0, 1, 2], 3).unwrap();
        let p = plan(&tri, &sa_for(&tri, &[]), &net, &map).unwrap();
        assert_eq!((p.m1, p.m2), (3, 0));
        let expected = 0.027 * (0.95f64 * 0.99).powi(3);
        assert!((p.p_overall - expected).abs() < 1e-12 * expected);
        let d = direct_plan(&tri, &net, &map).unwrap();
        assert_eq!(d.p_overall, p.p_overall);
        assert_eq!(d.p_lc, 1.0);
    }

    #[test]
    fn path_via_triangle() {
        let (net, _) = fake_network(0.3);
        let path = GraphState::path(3).unwrap();
        let map = NodeMapping::new(vec![0, 1, 2], 3).unwrap();
        let p = plan(&path, &sa_for(&path, &[1]), &net, &map).unwrap();
        assert_eq!(p.g_star, GraphState::complete(3).unwrap());
        assert_eq!(p.m2, 3);
        assert!((p.p_lc - 0.99f64.powi(3)).abs() < 1e-15);
    }

    #[test]
    fn single_edge() {
        let (net, _) = fake_network(0.3);
        let e = GraphState::path(2).unwrap();
        let map = NodeMapping::new(vec![0, 2], 3).unwrap();
        let p = direct_plan(&e, &net, &map).unwrap();
        assert_eq!(p.m1, 0);
        assert!(p.fusion_ops.is_empty());
        assert_eq!(p.epr_cost, 1);
    }

    #[test]
    fn errors() {
        let (net, _) = fake_network(0.3);
        let tri = GraphState::complete(3).unwrap();
        let map = NodeMapping::new(vec![0, 1], 3).unwrap();
        assert!(matches!(direct_plan(&tri, &net, &map), Err(PlanError::MappingInvalid { .. })));
        let mut sa = sa_for(&tri, &[]);
        sa.witness = vec![VertexId(0)];
        let map = NodeMapping::new(vec![0, 1, 2], 3).unwrap();
        assert!(matches!(plan(&tri, &sa, &net, &map), Err(PlanError::Clifford(CliffordError::WitnessInconsistent))));
        assert_eq!(edcg_cost(1), Err(PlanError::InvalidN(1)));
    }

    #[test]
    fn edcg() {
        assert_eq!(edcg_cost(8).unwrap(), 28);
        assert_eq!(edcg_cost(2).unwrap(), 1);
        assert_eq!(edcg_cost(4).unwrap(), 6);
    }

    #[test]
    fn epr_table_small() {
        let rows = epr_comparison(4).unwrap();
        assert_eq!(rows[0].ours, 2);
        assert_eq!((rows[1].ours, rows[1].edcg), (3, 6));
        assert!((rows[1].reduction - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fusion_replay_rebuilds_state() {
        for g in [
            GraphState::complete(4).unwrap(),
            GraphState::star(5, 2).unwrap(),
            GraphState::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (1, 3)]).unwrap(),
        ] {
            let ops = fusion_schedule(&g);
            assert_eq!(ops.len(), fusion_count(&g));
            assert_eq!(replay_fusions(&g, &ops).unwrap(), g);
        }
    }

    #[test]
    fn register_fuse_matches_graph_fuse() {
        // every 6-qubit register with hosts [0, 0, 1, 1, 2, 2]: fuse 0 <- 1
        let hosts = vec![0u32, 0, 1, 1, 2, 2];
        for mask in (0u128..1 << 15).step_by(7) {
            let g = GraphState::from_mask(6, mask).unwrap().with_hosts(hosts.clone()).unwrap();
            let edges: Vec<_> = g.edges().collect();
            let mut reg = FusionRegister::new(hosts.iter().map(|&h| h as usize).collect(), &edges);
            reg.fuse(2, 3).unwrap();
            let expect = g.fuse(VertexId(2), VertexId(3)).unwrap();
            // survivors 0, 1, 2, 4, 5 map to 0..5 in order
            let live = reg.live_qubits();
            let mut got = Vec::new();
            for (x, &a) in live.iter().enumerate() {
                for (y, &b) in live.iter().enumerate().skip(x + 1) {
                    if reg.has_edge(a, b) {
                        got.push((x, y));
                    }
                }
            }
            got.sort_unstable();
            let mut want: Vec<_> = expect.edges().collect();
            want.sort_unstable();
            assert_eq!(got, want, "mask {mask}");
        }
        let mut reg = FusionRegister::new(vec![0, 1], &[(0, 1)]);
        assert!(matches!(reg.fuse(0, 1), Err(PlanError::Graph(GraphError::CoLocationViolation { .. }))));
    }

    #[test]
    fn serialization_sections() {
        let (net, _) = fake_network(0.3);
        let path = GraphState::path(3).unwrap();
        let map = NodeMapping::new(vec![0, 1, 2], 3).unwrap();
        let text = plan(&path, &sa_for(&path, &[1]), &net, &map).unwrap().to_string();
        let sections: Vec<&str> = text.lines().filter(|l| l.starts_with('[')).collect();
        assert_eq!(sections, ["[gstar]", "[routes]", "[fusions]", "[recovery]", "[probabilities]"]);
    }
}
