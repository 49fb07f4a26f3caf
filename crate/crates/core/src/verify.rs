//! Self-check suites run by `lcdist verify` and the acceptance tests.
//!
//! Each suite sweeps a family of cases against an independent oracle and
//! reports how many cases failed along with the first failing case.

use std::time::{Duration, Instant};

use rand::RngCore;

use crate::clifford::{self, CliffordTable, CliffordWord};
use crate::graph::{full_mask, pair_count, GraphState, VertexId};
use crate::network::{best_path, generate, NoiseParams, PhysicalNetwork, TopologyModel};
use crate::orbit::{full_census, LcKernel, OrbitCensus};
use crate::planner::{fusion_count, fusion_schedule, replay_fusions};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: u64,
    pub failures: u64,
    pub first_failure: Option<String>,
    pub elapsed: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

impl std::fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {:<22} {:>9} cases {:>6} failed {:>8.2}s",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.failures,
            self.elapsed.as_secs_f64()
        )?;
        if let Some(msg) = &self.first_failure {
            write!(f, "  first failure: {msg}")?;
        }
        Ok(())
    }
}

struct Tally {
    name: &'static str,
    cases: u64,
    failures: u64,
    first_failure: Option<String>,
    start: Instant,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally {
            name,
            cases: 0,
            failures: 0,
            first_failure: None,
            start: Instant::now(),
        }
    }

    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(describe());
            }
        }
    }

    fn finish(self) -> SuiteReport {
        SuiteReport {
            name: self.name,
            cases: self.cases,
            failures: self.failures,
            first_failure: self.first_failure,
            elapsed: self.start.elapsed(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Fuzzed witnesses per register size.
    pub cases: usize,
    /// Largest register swept exhaustively by the graph and tableau suites.
    pub exhaustive_qubits: usize,
    /// Largest census whose representatives enter the fusion suite.
    pub census_qubits: usize,
    pub max_witness_len: usize,
    /// Random 12-node networks checked against the path oracle.
    pub networks: usize,
    /// Flip one entry of the Clifford table before the group-axiom suite.
    pub inject_fault: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            cases: 1000,
            exhaustive_qubits: 6,
            census_qubits: 8,
            max_witness_len: 80,
            networks: 5,
            inject_fault: false,
        }
    }
}

/// Runs every suite in a fixed order.
pub fn run_all(opts: &VerifyOptions) -> Vec<SuiteReport> {
    let mut table = CliffordTable::build();
    if opts.inject_fault {
        corrupt(&mut table);
    }
    vec![
        lc_involution(opts.exhaustive_qubits),
        lc_connectivity(opts.exhaustive_qubits),
        lc_tableau(opts.exhaustive_qubits),
        group_axioms(&table),
        witness_replay(opts.seed, opts.cases, opts.max_witness_len),
        dijkstra_oracle(opts.seed, opts.networks),
        m1_identity(opts.census_qubits),
        recovery_fuzz(opts.seed, opts.cases, 3..=8, opts.max_witness_len),
    ]
}

/// Swaps two entries of the first non-identity row.
pub fn corrupt(table: &mut CliffordTable) {
    table.product[1].swap(0, 1);
}

/// `LC_a(LC_a(G)) = G` for every graph on up to `max_qubits` vertices.
pub fn lc_involution(max_qubits: usize) -> SuiteReport {
    let mut t = Tally::new("lc-involution");
    for q in 2..=max_qubits {
        let kernel = LcKernel::new(q);
        for mask in 0..=full_mask(q) {
            for a in 0..q {
                let once = kernel.lc(mask, a);
                let twice = kernel.lc(once, a);
                let nbrs = kernel.neighbors(mask, a) == kernel.neighbors(once, a);
                t.check(twice == mask && nbrs, || format!("q = {q}, mask = {mask:#x}, pivot {a}"));
            }
        }
    }
    t.finish()
}

/// LC never changes whether a graph is connected.
pub fn lc_connectivity(max_qubits: usize) -> SuiteReport {
    let mut t = Tally::new("lc-connectivity");
    for q in 2..=max_qubits {
        let kernel = LcKernel::new(q);
        for mask in 0..=full_mask(q) {
            let before = kernel.is_connected(mask);
            for a in 0..q {
                let after = kernel.is_connected(kernel.lc(mask, a));
                t.check(before == after, || format!("q = {q}, mask = {mask:#x}, pivot {a}"));
            }
        }
    }
    t.finish()
}

/// The local unitary of an LC maps the stabilizer group of `G` onto the
/// group of `LC_a(G)`, for every state and pivot.
pub fn lc_tableau(max_qubits: usize) -> SuiteReport {
    let mut t = Tally::new("lc-tableau");
    for q in 2..=max_qubits {
        for mask in 0..=full_mask(q) {
            let g = GraphState::from_mask(q, mask).expect("mask in range");
            let tableau = clifford::graph_state_tableau(&g);
            for a in 0..q {
                let mut word = CliffordWord::identity(q);
                word.push_lc(&g, a);
                let moved = tableau
                    .apply_local_cliffords(&clifford::compress(&word))
                    .expect("one entry per qubit");
                let lc = g.local_complement(VertexId(a)).expect("pivot in range");
                let cmp = moved.compare(&clifford::graph_state_tableau(&lc));
                t.check(cmp.up_to_signs && cmp.strict, || format!("q = {q}, mask = {mask:#x}, pivot {a}"));
            }
        }
    }
    t.finish()
}

/// Closure, identity, inverses and all 24^3 associativity triples.
pub fn group_axioms(table: &CliffordTable) -> SuiteReport {
    let mut t = Tally::new("clifford-group-axioms");
    let res = table.check_group_axioms();
    t.check(res.is_ok(), || res.unwrap_err());
    t.cases = 24 * 24 * 24;
    t.finish()
}

/// Random connected labeled graph on `q` vertices.
pub fn random_connected(q: usize, rng: &mut dyn RngCore) -> GraphState {
    loop {
        let mut mask = 0u128;
        for bit in 0..pair_count(q) {
            if rng.next_u64() & 1 == 1 {
                mask |= 1 << bit;
            }
        }
        let g = GraphState::from_mask(q, mask).expect("mask in range");
        if g.is_connected() {
            return g;
        }
    }
}

fn random_witness(q: usize, max_len: usize, rng: &mut dyn RngCore) -> Vec<VertexId> {
    let len = rng::index(rng, max_len + 1);
    (0..len).map(|_| VertexId(rng::index(rng, q))).collect()
}

/// Batched pivots agree with one-at-a-time LC, and the reversed witness
/// walks the final state back to the start.
pub fn witness_replay(seed: u64, cases: usize, max_len: usize) -> SuiteReport {
    let mut t = Tally::new("witness-replay");
    let mut rng = rng::seeded(seed ^ 0x5745_4954);
    for q in 3..=8 {
        for _ in 0..cases {
            let g = random_connected(q, &mut rng);
            let w = random_witness(q, max_len, &mut rng);
            let batched = g.apply_pivots(&w).expect("pivots in range");
            let stepwise = w.iter().fold(g.clone(), |s, &a| s.local_complement(a).expect("pivot"));
            let mut back: Vec<VertexId> = w.clone();
            back.reverse();
            let home = batched.apply_pivots(&back).expect("pivots in range");
            t.check(batched == stepwise && home == g, || {
                format!("q = {q}, mask = {:#x}, witness {:?}", g.mask(), w)
            });
        }
    }
    t.finish()
}

/// Best simple path by exhaustive depth-first search.
pub fn exhaustive_best(network: &PhysicalNetwork, u: usize, v: usize) -> Option<(f64, Vec<usize>)> {
    let n = network.node_count();
    let mut adj = vec![Vec::new(); n];
    for l in network.links() {
        adj[l.u].push((l.v, l.length));
        adj[l.v].push((l.u, l.length));
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut path = vec![u];
    let mut on_path = vec![false; n];
    on_path[u] = true;
    fn walk(
        adj: &[Vec<(usize, f64)>],
        v: usize,
        length: f64,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        noise: &NoiseParams,
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        let at = *path.last().unwrap();
        if at == v {
            let p = noise.path_success(length, path.len() - 1);
            if best.as_ref().is_none_or(|(bp, _)| p > *bp) {
                *best = Some((p, path.clone()));
            }
            return;
        }
        for &(x, len) in &adj[at] {
            if !on_path[x] {
                on_path[x] = true;
                path.push(x);
                walk(adj, v, length + len, path, on_path, noise, best);
                path.pop();
                on_path[x] = false;
            }
        }
    }
    walk(&adj, v, 0.0, &mut path, &mut on_path, &network.noise, &mut best);
    best
}

/// Dijkstra routes match the exhaustive optimum on random 12-node networks
/// of every model, with and without per-hop BSM charges.
pub fn dijkstra_oracle(seed: u64, networks: usize) -> SuiteReport {
    let mut t = Tally::new("dijkstra-oracle");
    for name in ["er", "ba", "ws"] {
        let model = TopologyModel::default_for(name).expect("known model");
        for k in 0..networks as u64 {
            for per_hop in [false, true] {
                let noise = NoiseParams {
                    bsm_per_hop: per_hop,
                    ..NoiseParams::default()
                };
                let net = generate(model, 12, seed.wrapping_add(k), noise).expect("connected network");
                for u in 0..12 {
                    for v in u + 1..12 {
                        let route = best_path(&net, u, v).expect("connected");
                        let (p, _) = exhaustive_best(&net, u, v).expect("connected");
                        let ok = (route.probability - p).abs() <= 1e-12 * p;
                        t.check(ok, || {
                            format!("{name} seed {k} per_hop {per_hop}: ({u}, {v}) {} vs {p}", route.probability)
                        });
                    }
                }
            }
        }
    }
    t.finish()
}

/// `2|E| - |V| = sum (deg - 1)` on every census representative, and the
/// fusion schedule rebuilds the representative.
pub fn m1_identity(max_qubits: usize) -> SuiteReport {
    let start = Instant::now();
    let mut censuses = Vec::new();
    let mut missing = None;
    for q in 3..=max_qubits {
        match full_census(q) {
            Ok(c) => censuses.push(c),
            Err(e) => missing = Some(format!("census q = {q}: {e}")),
        }
    }
    let mut report = m1_identity_on(&censuses);
    if let Some(msg) = missing {
        report.failures += 1;
        report.first_failure.get_or_insert(msg);
    }
    report.elapsed = start.elapsed();
    report
}

/// [`m1_identity`] over censuses that are already computed.
pub fn m1_identity_on(censuses: &[OrbitCensus]) -> SuiteReport {
    let mut t = Tally::new("m1-identity");
    for census in censuses {
        let q = census.qubits;
        let masks = census
            .classes
            .iter()
            .map(|c| c.representative_mask as u128)
            .chain(census.orbits.iter().map(|o| o.min_edge_mask as u128));
        for mask in masks {
            let g = GraphState::from_mask(q, mask).expect("census mask");
            let degrees: usize = (0..q).map(|v| g.degree(v) - 1).sum();
            let ops = fusion_schedule(&g);
            let rebuilt = replay_fusions(&g, &ops).map(|r| r == g).unwrap_or(false);
            t.check(fusion_count(&g) == degrees && ops.len() == degrees && rebuilt, || {
                format!("q = {q}, mask = {mask:#x}")
            });
        }
    }
    t.finish()
}

/// Random witnesses compress to at most one gate per qubit, the gates map
/// the final state back to the start, and trivial witnesses vanish.
pub fn recovery_fuzz(
    seed: u64,
    cases: usize,
    qubits: std::ops::RangeInclusive<usize>,
    max_len: usize,
) -> SuiteReport {
    let mut t = Tally::new("recovery-fuzz");
    let mut rng = rng::seeded(seed ^ 0x4655_5a5a);
    for q in qubits {
        for i in 0..cases {
            let g = random_connected(q, &mut rng);
            let w = match i {
                0 => Vec::new(),
                1 => {
                    let a = VertexId(rng::index(&mut rng, q));
                    vec![a, a]
                }
                _ => random_witness(q, max_len, &mut rng),
            };
            let g_star = g.apply_pivots(&w).expect("pivots in range");
            let ok = (|| {
                let word = clifford::recovery_word(&g, &w, &g_star).ok()?;
                let gates = clifford::absorb_stabilizers(&clifford::compress(&word), &g);
                let cmp = clifford::verify_recovery(&g_star, &gates, &g).ok()?;
                let trivial_ok = i > 1 || clifford::gate_count(&gates) == 0;
                Some(gates.len() == q && cmp.up_to_signs && trivial_ok)
            })()
            .unwrap_or(false);
            t.check(ok, || format!("q = {q}, mask = {:#x}, witness {:?}", g.mask(), w));
        }
    }
    t.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        assert!(lc_involution(4).passed());
        assert!(lc_connectivity(4).passed());
        assert!(lc_tableau(4).passed());
        assert!(witness_replay(1, 20, 30).passed());
        assert!(dijkstra_oracle(3, 1).passed());
        assert!(m1_identity(5).passed());
        assert!(recovery_fuzz(2, 30, 3..=5, 40).passed());
    }

    #[test]
    fn corrupted_table_fails() {
        let mut table = CliffordTable::build();
        assert!(group_axioms(&table).passed());
        corrupt(&mut table);
        let report = group_axioms(&table);
        assert!(!report.passed());
        assert!(report.to_string().starts_with("FAIL"));
    }
}
