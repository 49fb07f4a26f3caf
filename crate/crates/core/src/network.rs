//! Physical fiber networks: random topology generation, the elementary
//! spin-to-spin success model and maximum-probability routing.
//!
//! All randomness flows through [`crate::rng`]. Generation attempt `k`
//! (counting from 0) of seed `s` uses seed `s + k`, so a disconnected draw is
//! retried deterministically.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::rng;

/// Link lengths are drawn uniformly from this range, in kilometers.
pub const LINK_LENGTH_KM: (f64, f64) = (0.5, 1.2);
/// Redraws attempted before giving up on a connected topology.
pub const MAX_GENERATION_ATTEMPTS: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("no connected topology after {0} attempts")]
    ConnectivityFailure(u64),
    #[error("link length must be positive, got {0}")]
    InvalidLength(f64),
    #[error("node {v} is unreachable from {u}")]
    Unreachable { u: usize, v: usize },
    #[error("invalid noise parameters: {0}")]
    InvalidNoise(String),
    #[error("invalid qubit mapping: {0}")]
    MappingInvalid(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Where the heralding detection happens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detection {
    /// Detector at one of the two end nodes: one photon crosses the fiber.
    Endpoint,
    /// Detector at a midpoint station: both photons cross the fiber.
    Midpoint,
}

impl FromStr for Detection {
    type Err = NetworkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "endpoint" => Ok(Detection::Endpoint),
            "midpoint" => Ok(Detection::Midpoint),
            _ => Err(NetworkError::InvalidNoise(format!("unknown detection mode `{s}`"))),
        }
    }
}

impl fmt::Display for Detection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Detection::Endpoint => "endpoint",
            Detection::Midpoint => "midpoint",
        })
    }
}

/// Hardware and channel parameters. Defaults are the evaluation values:
/// 90% spin-photon conversion, 0.2 dB/km, 10% depolarization, 50% BSM,
/// 1 kHz dark counts, 5% CZ error, 1% single-qubit error, 1% Y-measurement error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub eta1: f64,
    /// Fiber loss in dB/km.
    pub alpha: f64,
    pub epsilon_d: f64,
    pub p_bsm: f64,
    /// Dark count rate in Hz.
    pub f_dc: f64,
    pub epsilon_1g: f64,
    pub epsilon_2g: f64,
    pub p_y_msr: f64,
    pub detection: Detection,
    /// Charge one BSM per traversed link instead of one per path.
    pub bsm_per_hop: bool,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            eta1: 0.9,
            alpha: 0.2,
            epsilon_d: 0.1,
            p_bsm: 0.5,
            f_dc: 1000.0,
            epsilon_1g: 0.01,
            epsilon_2g: 0.05,
            p_y_msr: 0.99,
            detection: Detection::Endpoint,
            bsm_per_hop: false,
        }
    }
}

impl NoiseParams {
    pub fn validate(&self) -> Result<(), NetworkError> {
        let probs = [
            ("eta1", self.eta1),
            ("epsilon_d", self.epsilon_d),
            ("p_bsm", self.p_bsm),
            ("epsilon_1g", self.epsilon_1g),
            ("epsilon_2g", self.epsilon_2g),
            ("p_y_msr", self.p_y_msr),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(NetworkError::InvalidNoise(format!("{name} = {p} is not a probability")));
            }
        }
        if self.f_dc.is_nan() || self.f_dc <= 1.0 {
            return Err(NetworkError::InvalidNoise(format!("f_dc = {} must exceed 1", self.f_dc)));
        }
        if self.alpha <= 0.0 || !self.alpha.is_finite() {
            return Err(NetworkError::InvalidNoise(format!("alpha = {} must be positive", self.alpha)));
        }
        Ok(())
    }

    /// Attenuation length `10 / (alpha ln 10)` in km.
    pub fn l_att(&self) -> f64 {
        10.0 / (self.alpha * std::f64::consts::LN_10)
    }

    pub fn p_cz(&self) -> f64 {
        1.0 - self.epsilon_2g
    }

    pub fn p_1g(&self) -> f64 {
        1.0 - self.epsilon_1g
    }

    /// Photons exposed to fiber loss per elementary attempt.
    fn lossy_photons(&self) -> i32 {
        match self.detection {
            Detection::Endpoint => 1,
            Detection::Midpoint => 2,
        }
    }

    /// Success of an effective channel of `length` km with `hops` links.
    pub fn path_success(&self, length: f64, hops: usize) -> f64 {
        let eta2 = (-length / self.l_att()).exp();
        let source = self.eta1 * (1.0 - self.epsilon_d);
        let dark = 1.0 - 1.0 / self.f_dc;
        let bsm = if self.bsm_per_hop {
            self.p_bsm.powi(hops as i32)
        } else {
            self.p_bsm
        };
        source * source * eta2.powi(self.lossy_photons()) * bsm * dark * dark
    }

    /// Additive routing weight of one link: `-ln` of its share of the success.
    fn link_weight(&self, length: f64) -> f64 {
        let loss = self.lossy_photons() as f64 * length / self.l_att();
        if self.bsm_per_hop {
            loss - self.p_bsm.ln()
        } else {
            loss
        }
    }
}

/// Probability of heralding spin-to-spin entanglement over one fiber span.
pub fn link_success(noise: &NoiseParams, length: f64) -> Result<f64, NetworkError> {
    if length <= 0.0 || !length.is_finite() {
        return Err(NetworkError::InvalidLength(length));
    }
    Ok(noise.path_success(length, 1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub u: usize,
    pub v: usize,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TopologyModel {
    /// Erdős–Rényi: each pair linked independently with probability `p`.
    Er { p: f64 },
    /// Barabási–Albert preferential attachment with `m` links per new node.
    Ba { m: usize },
    /// Watts–Strogatz ring of degree `k` with rewiring probability `p`.
    Ws { k: usize, p: f64 },
}

impl TopologyModel {
    pub fn name(&self) -> &'static str {
        match self {
            TopologyModel::Er { .. } => "er",
            TopologyModel::Ba { .. } => "ba",
            TopologyModel::Ws { .. } => "ws",
        }
    }

    /// Model with the default parameters: ER p = 0.3, BA m = 2, WS k = 4, p = 0.1.
    pub fn default_for(name: &str) -> Result<Self, NetworkError> {
        match name {
            "er" => Ok(TopologyModel::Er { p: 0.3 }),
            "ba" => Ok(TopologyModel::Ba { m: 2 }),
            "ws" => Ok(TopologyModel::Ws { k: 4, p: 0.1 }),
            _ => Err(NetworkError::InvalidParams(format!("unknown model `{name}`"))),
        }
    }

    fn validate(&self, n: usize) -> Result<(), NetworkError> {
        let bad = |m: String| Err(NetworkError::InvalidParams(m));
        if n < 2 {
            return bad(format!("need at least 2 nodes, got {n}"));
        }
        match *self {
            TopologyModel::Er { p } if !(0.0..=1.0).contains(&p) || p == 0.0 => {
                bad(format!("ER edge probability {p} must lie in (0, 1]"))
            }
            TopologyModel::Ba { m } if m == 0 || m >= n => bad(format!("BA attachment m = {m} must lie in 1..{n}")),
            TopologyModel::Ws { k, p } if k < 2 || k % 2 == 1 || k >= n || !(0.0..=1.0).contains(&p) => {
                bad(format!("WS needs even k in 2..{n} and p in [0, 1], got k = {k}, p = {p}"))
            }
            _ => Ok(()),
        }
    }
}

/// Undirected fiber topology with per-link lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalNetwork {
    node_count: usize,
    links: Vec<Link>,
    pub noise: NoiseParams,
}

impl PhysicalNetwork {
    pub fn new(node_count: usize, links: Vec<Link>, noise: NoiseParams) -> Result<Self, NetworkError> {
        let mut seen = BTreeSet::new();
        for l in &links {
            if l.u >= node_count || l.v >= node_count {
                return Err(NetworkError::InvalidParams(format!("link ({}, {}) out of range", l.u, l.v)));
            }
            if l.u == l.v {
                return Err(NetworkError::InvalidParams(format!("self link on {}", l.u)));
            }
            if l.length <= 0.0 || !l.length.is_finite() {
                return Err(NetworkError::InvalidLength(l.length));
            }
            if !seen.insert((l.u.min(l.v), l.u.max(l.v))) {
                return Err(NetworkError::InvalidParams(format!("duplicate link ({}, {})", l.u, l.v)));
            }
        }
        noise.validate()?;
        Ok(PhysicalNetwork {
            node_count,
            links,
            noise,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn with_noise(mut self, noise: NoiseParams) -> Self {
        self.noise = noise;
        self
    }

    /// `(neighbor, length)` lists per node, sorted by neighbor.
    fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for l in &self.links {
            adj[l.u].push((l.v, l.length));
            adj[l.v].push((l.u, l.length));
        }
        for row in &mut adj {
            row.sort_by_key(|&(v, _)| v);
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        let adj = self.adjacency();
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    pub fn length(&self, u: usize, v: usize) -> Option<f64> {
        self.links
            .iter()
            .find(|l| (l.u == u && l.v == v) || (l.u == v && l.v == u))
            .map(|l| l.length)
    }
}

impl fmt::Display for PhysicalNetwork {
    /// Network file format: `nodes N`, then `link u v length_km` lines.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "nodes {}", self.node_count)?;
        for l in &self.links {
            writeln!(f, "link {} {} {}", l.u, l.v, l.length)?;
        }
        Ok(())
    }
}

impl FromStr for PhysicalNetwork {
    type Err = NetworkError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut nodes = None;
        let mut links = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| NetworkError::Parse {
                line: n + 1,
                msg: msg.to_string(),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["nodes", count] => {
                    if nodes.is_some() {
                        return Err(err("repeated nodes line"));
                    }
                    nodes = Some(count.parse::<usize>().map_err(|_| err("bad node count"))?);
                }
                ["link", u, v, len] => links.push(Link {
                    u: u.parse().map_err(|_| err("bad node"))?,
                    v: v.parse().map_err(|_| err("bad node"))?,
                    length: len.parse().map_err(|_| err("bad length"))?,
                }),
                _ => return Err(err("unrecognized line")),
            }
        }
        let nodes = nodes.ok_or(NetworkError::Parse {
            line: 0,
            msg: "missing nodes line".into(),
        })?;
        PhysicalNetwork::new(nodes, links, NoiseParams::default())
    }
}

fn draw_topology(model: TopologyModel, n: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    match model {
        TopologyModel::Er { p } => {
            let mut out = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng::unit(rng) < p {
                        out.push((u, v));
                    }
                }
            }
            out
        }
        TopologyModel::Ba { m } => {
            // m seed nodes with no links; the first arrival attaches to all of them
            let mut out = Vec::new();
            let mut targets: Vec<usize> = (0..m).collect();
            let mut repeated: Vec<usize> = Vec::new();
            for source in m..n {
                for &t in &targets {
                    out.push((t.min(source), t.max(source)));
                }
                repeated.extend(&targets);
                repeated.extend(std::iter::repeat_n(source, m));
                let mut chosen = BTreeSet::new();
                while chosen.len() < m {
                    chosen.insert(repeated[rng::index(rng, repeated.len())]);
                }
                targets = chosen.into_iter().collect();
            }
            out
        }
        TopologyModel::Ws { k, p } => {
            let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
            for u in 0..n {
                for j in 1..=k / 2 {
                    let v = (u + j) % n;
                    edges.insert((u.min(v), u.max(v)));
                }
            }
            for j in 1..=k / 2 {
                for u in 0..n {
                    let v = (u + j) % n;
                    if rng::unit(rng) >= p {
                        continue;
                    }
                    let linked = |a: usize, b: usize, e: &BTreeSet<(usize, usize)>| e.contains(&(a.min(b), a.max(b)));
                    let free: Vec<usize> = (0..n).filter(|&w| w != u && !linked(u, w, &edges)).collect();
                    if free.is_empty() || !linked(u, v, &edges) {
                        continue;
                    }
                    let w = free[rng::index(rng, free.len())];
                    edges.remove(&(u.min(v), u.max(v)));
                    edges.insert((u.min(w), u.max(w)));
                }
            }
            edges.into_iter().collect()
        }
    }
}

/// Draws a connected network; link lengths are uniform in [0.5, 1.2] km.
pub fn generate(
    model: TopologyModel,
    node_count: usize,
    seed: u64,
    noise: NoiseParams,
) -> Result<PhysicalNetwork, NetworkError> {
    model.validate(node_count)?;
    noise.validate()?;
    for attempt in 0..MAX_GENERATION_ATTEMPTS {
        let mut rng = rng::seeded(seed.wrapping_add(attempt));
        let pairs = draw_topology(model, node_count, &mut rng);
        let links = pairs
            .into_iter()
            .map(|(u, v)| Link {
                u,
                v,
                length: rng::between(&mut rng, LINK_LENGTH_KM.0, LINK_LENGTH_KM.1),
            })
            .collect();
        let net = PhysicalNetwork::new(node_count, links, noise)?;
        if net.is_connected() {
            return Ok(net);
        }
    }
    Err(NetworkError::ConnectivityFailure(MAX_GENERATION_ATTEMPTS))
}

/// A routed multi-hop channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub nodes: Vec<usize>,
    pub length: f64,
    pub probability: f64,
}

impl Route {
    pub fn hops(&self) -> usize {
        self.nodes.len() - 1
    }
}

fn better(cost: f64, path: &[usize], best_cost: f64, best_path: &[usize]) -> bool {
    let scale = cost.abs().max(best_cost.abs()).max(1.0);
    if (cost - best_cost).abs() <= 1e-12 * scale {
        path.cmp(best_path) == Ordering::Less
    } else {
        cost < best_cost
    }
}

/// Maximum-probability route between two nodes (Dijkstra on `-ln p` weights).
///
/// Without per-hop BSM charges this is the shortest path by total length.
/// Ties resolve to the lexicographically smallest node sequence.
pub fn best_path(network: &PhysicalNetwork, u: usize, v: usize) -> Result<Route, NetworkError> {
    let n = network.node_count;
    if u >= n || v >= n || u == v {
        return Err(NetworkError::InvalidParams(format!("bad endpoints ({u}, {v})")));
    }
    let adj = network.adjacency();
    let noise = &network.noise;
    let mut dist: Vec<Option<(f64, f64, Vec<usize>)>> = vec![None; n];
    let mut done = vec![false; n];
    dist[u] = Some((0.0, 0.0, vec![u]));
    loop {
        let mut pick: Option<usize> = None;
        for w in 0..n {
            if done[w] {
                continue;
            }
            if let Some((c, _, p)) = &dist[w] {
                let take = match pick {
                    None => true,
                    Some(b) => {
                        let (bc, _, bp) = dist[b].as_ref().unwrap();
                        better(*c, p, *bc, bp)
                    }
                };
                if take {
                    pick = Some(w);
                }
            }
        }
        let Some(w) = pick else { break };
        done[w] = true;
        if w == v {
            break;
        }
        let (cw, lw, pw) = dist[w].clone().unwrap();
        for &(x, len) in &adj[w] {
            if done[x] {
                continue;
            }
            let cost = cw + noise.link_weight(len);
            let mut path = pw.clone();
            path.push(x);
            let replace = match &dist[x] {
                None => true,
                Some((c, _, p)) => better(cost, &path, *c, p),
            };
            if replace {
                dist[x] = Some((cost, lw + len, path));
            }
        }
    }
    match &dist[v] {
        Some((_, length, nodes)) if done[v] => Ok(Route {
            probability: noise.path_success(*length, nodes.len() - 1),
            nodes: nodes.clone(),
            length: *length,
        }),
        _ => Err(NetworkError::Unreachable { u, v }),
    }
}

/// Injective assignment of qubits to network nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeMapping(Vec<usize>);

impl NodeMapping {
    pub fn new(nodes: Vec<usize>, node_count: usize) -> Result<Self, NetworkError> {
        let mut seen = BTreeSet::new();
        for &n in &nodes {
            if n >= node_count {
                return Err(NetworkError::MappingInvalid(format!("node {n} outside 0..{node_count}")));
            }
            if !seen.insert(n) {
                return Err(NetworkError::MappingInvalid(format!("node {n} used twice")));
            }
        }
        Ok(NodeMapping(nodes))
    }

    /// `qubits` distinct nodes chosen uniformly at random.
    pub fn random(qubits: usize, node_count: usize, seed: u64) -> Result<Self, NetworkError> {
        if qubits > node_count {
            return Err(NetworkError::MappingInvalid(format!(
                "{qubits} qubits do not fit on {node_count} nodes"
            )));
        }
        let mut rng = rng::seeded(seed);
        let mut nodes: Vec<usize> = (0..node_count).collect();
        rng::shuffle(&mut rng, &mut nodes);
        nodes.truncate(qubits);
        NodeMapping::new(nodes, node_count)
    }

    pub fn node(&self, qubit: usize) -> usize {
        self.0[qubit]
    }

    pub fn nodes(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Symmetric matrix of best-route success probabilities between qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PairProbabilities {
    n: usize,
    values: Vec<f64>,
}

impl PairProbabilities {
    /// Same probability on every pair.
    pub fn uniform(n: usize, p: f64) -> Self {
        PairProbabilities {
            n,
            values: vec![p; n * n],
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let p = f(i, j);
                values[i * n + j] = p;
                values[j * n + i] = p;
            }
        }
        PairProbabilities { n, values }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

/// Best-route probabilities between the nodes hosting each pair of qubits.
pub fn pair_probabilities(network: &PhysicalNetwork, mapping: &NodeMapping) -> Result<PairProbabilities, NetworkError> {
    let n = mapping.len();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let p = best_path(network, mapping.node(i), mapping.node(j))?.probability;
            values[i * n + j] = p;
            values[j * n + i] = p;
        }
    }
    Ok(PairProbabilities { n, values })
}
