use proptest::prelude::*;

use lcdist::annealer::{anneal, anneal_multi, objective, SaConfig, Selection};
use lcdist::clifford::{self, compose, SingleQubitClifford};
use lcdist::graph::{full_mask, GraphState, VertexId};
use lcdist::network::{best_path, generate, pair_probabilities, NodeMapping, NoiseParams, TopologyModel};
use lcdist::orbit::enumerate_orbit;
use lcdist::planner::{self, fusion_count};
use lcdist::{rng, verify};

fn graph(max_q: usize) -> impl Strategy<Value = GraphState> {
    (2..=max_q, any::<u128>()).prop_map(|(q, bits)| GraphState::from_mask(q, bits & full_mask(q)).unwrap())
}

fn connected(min_q: usize, max_q: usize) -> impl Strategy<Value = GraphState> {
    (min_q..=max_q, any::<u64>()).prop_map(|(q, seed)| verify::random_connected(q, &mut rng::seeded(seed)))
}

fn witness(q: usize, max_len: usize) -> impl Strategy<Value = Vec<VertexId>> {
    prop::collection::vec((0..q).prop_map(VertexId), 0..=max_len)
}

fn with_witness(min_q: usize, max_q: usize, max_len: usize) -> impl Strategy<Value = (GraphState, Vec<VertexId>)> {
    connected(min_q, max_q).prop_flat_map(move |g| {
        let q = g.qubit_count();
        (Just(g), witness(q, max_len))
    })
}

fn element() -> impl Strategy<Value = SingleQubitClifford> {
    (0..24usize).prop_map(|i| SingleQubitClifford::all()[i])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn lc_is_an_involution(g in graph(12), a in 0..12usize) {
        let a = VertexId(a % g.qubit_count());
        let once = g.local_complement(a).unwrap();
        prop_assert_eq!(once.local_complement(a).unwrap(), g.clone());
        prop_assert_eq!(once.neighbor_set(a.0), g.neighbor_set(a.0));
    }

    #[test]
    fn lc_keeps_connectivity(g in graph(10), a in 0..10usize) {
        let a = VertexId(a % g.qubit_count());
        prop_assert_eq!(g.local_complement(a).unwrap().is_connected(), g.is_connected());
    }

    #[test]
    fn edges_and_text_round_trip(g in graph(16)) {
        let edges: Vec<_> = g.edges().collect();
        prop_assert_eq!(&GraphState::from_edges(g.qubit_count(), &edges).unwrap(), &g);
        prop_assert_eq!(edges.len(), g.edge_count());
        let text = g.to_string();
        prop_assert_eq!(text.parse::<GraphState>().unwrap(), g);
    }

    #[test]
    fn lc_matches_its_local_unitary(g in graph(8), a in 0..8usize) {
        let a = a % g.qubit_count();
        let mut word = clifford::CliffordWord::identity(g.qubit_count());
        word.push_lc(&g, a);
        let lc = g.local_complement(VertexId(a)).unwrap();
        let cmp = clifford::verify_recovery(&g, &clifford::compress(&word), &lc).unwrap();
        prop_assert!(cmp.up_to_signs && cmp.strict);
    }

    #[test]
    fn composition_is_associative(a in element(), b in element(), c in element()) {
        prop_assert_eq!(compose(compose(a, b), c), compose(a, compose(b, c)));
        prop_assert!(compose(a, a.inverse()).is_identity());
    }

    #[test]
    fn recovery_is_sound((g, w) in with_witness(2, 10, 80)) {
        let g_star = g.apply_pivots(&w).unwrap();
        let word = clifford::recovery_word(&g, &w, &g_star).unwrap();
        let raw = clifford::compress(&word);
        let reduced = clifford::absorb_stabilizers(&raw, &g);
        prop_assert_eq!(raw.len(), g.qubit_count());
        prop_assert!(clifford::gate_count(&reduced) <= clifford::gate_count(&raw));
        prop_assert!(clifford::verify_recovery(&g_star, &raw, &g).unwrap().up_to_signs);
        prop_assert!(clifford::verify_recovery(&g_star, &reduced, &g).unwrap().up_to_signs);
    }

    #[test]
    fn witnesses_replay((g, w) in with_witness(2, 10, 40)) {
        let batched = g.apply_pivots(&w).unwrap();
        let stepwise = w.iter().fold(g.clone(), |s, &a| s.local_complement(a).unwrap());
        prop_assert_eq!(&batched, &stepwise);
        let back: Vec<VertexId> = w.iter().rev().copied().collect();
        prop_assert_eq!(batched.apply_pivots(&back).unwrap(), g);
    }

    #[test]
    fn x_measurement_choices_agree(g in connected(3, 8), a in 0..8usize, picks in any::<(u8, u8)>()) {
        let a = a % g.qubit_count();
        let nbrs = g.neighbors(a);
        let b1 = nbrs[picks.0 as usize % nbrs.len()];
        let b2 = nbrs[picks.1 as usize % nbrs.len()];
        let r1 = g.measure_x(VertexId(a), VertexId(b1)).unwrap();
        let r2 = g.measure_x(VertexId(a), VertexId(b2)).unwrap();
        if r1.is_connected() {
            prop_assert!(enumerate_orbit(&r1).unwrap().contains(r2.mask()));
        } else {
            prop_assert_eq!(r1.is_connected(), r2.is_connected());
        }
    }

    #[test]
    fn fusion_count_matches_degrees(g in connected(2, 12)) {
        let degrees: usize = (0..g.qubit_count()).map(|v| g.degree(v) - 1).sum();
        prop_assert_eq!(fusion_count(&g), degrees);
        let ops = planner::fusion_schedule(&g);
        prop_assert_eq!(ops.len(), degrees);
        prop_assert_eq!(planner::replay_fusions(&g, &ops).unwrap(), g);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn routes_match_exhaustive_search(seed in any::<u64>(), model in 0..3usize, u in 0..12usize, v in 0..12usize, per_hop in any::<bool>()) {
        prop_assume!(u != v);
        let model = TopologyModel::default_for(["er", "ba", "ws"][model]).unwrap();
        let noise = NoiseParams { bsm_per_hop: per_hop, ..NoiseParams::default() };
        let net = generate(model, 12, seed, noise).unwrap();
        let route = best_path(&net, u, v).unwrap();
        let (p, _) = verify::exhaustive_best(&net, u, v).unwrap();
        prop_assert!((route.probability - p).abs() <= 1e-12 * p);
        prop_assert_eq!(route.nodes.first(), Some(&u));
        prop_assert_eq!(route.nodes.last(), Some(&v));
        let back = best_path(&net, v, u).unwrap();
        prop_assert!((back.probability - route.probability).abs() <= 1e-12 * p);
    }

    #[test]
    fn plans_factor_and_dominate(g in connected(3, 7), seed in any::<u64>()) {
        let net = generate(TopologyModel::Er { p: 0.3 }, 12, seed, NoiseParams::default()).unwrap();
        let mapping = NodeMapping::random(g.qubit_count(), 12, seed).unwrap();
        let probs = pair_probabilities(&net, &mapping).unwrap();
        for i in 0..g.qubit_count() {
            for j in 0..g.qubit_count() {
                prop_assert_eq!(probs.get(i, j), probs.get(j, i));
                if i != j {
                    prop_assert!(probs.get(i, j) > 0.0 && probs.get(i, j) <= 1.0);
                }
            }
        }
        let config = SaConfig { seed, restarts: 2, ..SaConfig::default() };
        let sa = anneal_multi(&g, &probs, &config, Selection::EndToEnd(net.noise)).unwrap();
        prop_assert_eq!(&g.apply_pivots(&sa.witness).unwrap(), &sa.g_star);
        let plan = planner::plan(&g, &sa, &net, &mapping).unwrap();
        let direct = planner::direct_plan(&g, &net, &mapping).unwrap();
        let recomputed = plan.p_entanglement * plan.p_fusion * plan.p_lc;
        prop_assert!((plan.p_overall - recomputed).abs() <= 1e-12 * plan.p_overall);
        prop_assert!(plan.p_overall >= direct.p_overall);
        prop_assert_eq!(plan.epr_cost, plan.g_star.edge_count());
        prop_assert_eq!(plan.m1, 2 * plan.g_star.edge_count() - g.qubit_count());
        prop_assert!(plan.m2 <= g.qubit_count());
    }

    #[test]
    fn extra_edges_never_help(g in connected(3, 7), seed in any::<u64>(), pick in any::<u16>()) {
        let q = g.qubit_count();
        let missing: Vec<(usize, usize)> = (0..q)
            .flat_map(|j| (0..j).map(move |i| (i, j)))
            .filter(|&(i, j)| !g.has_edge(i, j))
            .collect();
        prop_assume!(!missing.is_empty());
        let (i, j) = missing[pick as usize % missing.len()];
        let denser = g.toggle_cz(VertexId(i), VertexId(j)).unwrap();
        let net = generate(TopologyModel::Ba { m: 2 }, 12, seed, NoiseParams::default()).unwrap();
        let mapping = NodeMapping::random(q, 12, seed).unwrap();
        let sparse = planner::direct_plan(&g, &net, &mapping).unwrap();
        let dense = planner::direct_plan(&denser, &net, &mapping).unwrap();
        prop_assert!(dense.p_overall <= sparse.p_overall);
    }

    #[test]
    fn annealing_is_reproducible(g in connected(3, 8), seed in any::<u64>()) {
        let net = generate(TopologyModel::Ws { k: 4, p: 0.1 }, 12, seed, NoiseParams::default()).unwrap();
        let mapping = NodeMapping::random(g.qubit_count(), 12, seed).unwrap();
        let probs = pair_probabilities(&net, &mapping).unwrap();
        let config = SaConfig { seed, ..SaConfig::default() };
        let a = anneal(&g, &probs, &config).unwrap();
        prop_assert_eq!(&a, &anneal(&g, &probs, &config).unwrap());
        prop_assert_eq!(a.trace.len(), config.iterations());
        prop_assert_eq!(&g.apply_pivots(&a.witness).unwrap(), &a.g_star);
        prop_assert_eq!(a.objective, objective(&a.g_star, &probs).unwrap());
        prop_assert!(a.objective >= objective(&g, &probs).unwrap());
        let single = anneal_multi(&g, &probs, &SaConfig { restarts: 1, ..config }, Selection::EntanglementProduct).unwrap();
        let first = anneal(&g, &probs, &SaConfig { seed: config.restart_seed(0), ..config }).unwrap();
        if !single.best_is_initial {
            prop_assert_eq!(single.g_star, first.g_star);
        }
    }
}
