//! Labeled graph states and the graph-rewrite rules that act on them.
//!
//! A [`GraphState`] on `q` qubits stores one bit per unordered vertex pair.
//! Pair `(i, j)` with `i < j` lives at bit `j(j-1)/2 + i`, so the encoding of
//! a `q`-qubit state is a prefix of the encoding of any larger state.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Largest supported register; 16 qubits use 120 of the 128 mask bits.
pub const MAX_QUBITS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {index} out of range for {qubits} qubits")]
    IndexOutOfRange { index: usize, qubits: usize },
    #[error("self loop on vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("qubit count {0} outside 1..={MAX_QUBITS}")]
    BadQubitCount(usize),
    #[error("cannot measure a state with only {0} qubits")]
    StateTooSmall(usize),
    #[error("vertex {b0} is not a neighbor of {a}")]
    NotANeighbor { a: usize, b0: usize },
    #[error("qubits {a} and {b} are hosted on different nodes ({node_a} vs {node_b})")]
    CoLocationViolation {
        a: usize,
        b: usize,
        node_a: u32,
        node_b: u32,
    },
    #[error("node {node} hosts more than one qubit")]
    NonInjectiveLabels { node: u32 },
    #[error("label list has {got} entries, expected {expected}")]
    LabelCount { got: usize, expected: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Bit index of the unordered pair `{a, b}`.
#[inline]
pub const fn pair_index(a: usize, b: usize) -> usize {
    let (i, j) = if a < b { (a, b) } else { (b, a) };
    j * (j - 1) / 2 + i
}

/// Number of unordered pairs on `q` vertices.
#[inline]
pub const fn pair_count(q: usize) -> usize {
    q * q.saturating_sub(1) / 2
}

/// Mask with every pair bit of a `q`-vertex graph set.
#[inline]
pub const fn full_mask(q: usize) -> u128 {
    let n = pair_count(q);
    if n == 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

/// Index of a qubit inside a [`GraphState`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

impl From<usize> for VertexId {
    fn from(i: usize) -> Self {
        VertexId(i)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Graph state `|G>`: vertices are qubits prepared in `|+>`, edges are CZ gates.
///
/// Values are immutable; every rewrite returns a new state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GraphState {
    qubits: usize,
    edges: u128,
    labels: Option<Vec<u32>>,
}

impl GraphState {
    /// Edgeless state on `qubits` vertices.
    pub fn empty(qubits: usize) -> Result<Self, GraphError> {
        if qubits == 0 || qubits > MAX_QUBITS {
            return Err(GraphError::BadQubitCount(qubits));
        }
        Ok(Self {
            qubits,
            edges: 0,
            labels: None,
        })
    }

    /// Builds `prod CZ_(a,b) |+>^q` from an explicit pair list.
    pub fn from_edges(qubits: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut state = Self::empty(qubits)?;
        for &(a, b) in edges {
            state.check(a)?;
            state.check(b)?;
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            let bit = 1u128 << pair_index(a, b);
            if state.edges & bit != 0 {
                return Err(GraphError::DuplicateEdge(a.min(b), a.max(b)));
            }
            state.edges |= bit;
        }
        Ok(state)
    }

    /// Wraps a raw pair mask. Bits past the last pair must be clear.
    pub fn from_mask(qubits: usize, mask: u128) -> Result<Self, GraphError> {
        let mut state = Self::empty(qubits)?;
        if mask & !full_mask(qubits) != 0 {
            return Err(GraphError::IndexOutOfRange {
                index: 128 - mask.leading_zeros() as usize,
                qubits,
            });
        }
        state.edges = mask;
        Ok(state)
    }

    /// Star rooted at `root`.
    pub fn star(qubits: usize, root: usize) -> Result<Self, GraphError> {
        let pairs: Vec<_> = (0..qubits).filter(|&v| v != root).map(|v| (root, v)).collect();
        let s = Self::empty(qubits)?;
        s.check(root)?;
        Self::from_edges(qubits, &pairs)
    }

    /// Path `0 - 1 - ... - (q-1)`.
    pub fn path(qubits: usize) -> Result<Self, GraphError> {
        let pairs: Vec<_> = (1..qubits).map(|v| (v - 1, v)).collect();
        Self::from_edges(qubits, &pairs)
    }

    /// Complete graph `K_q`.
    pub fn complete(qubits: usize) -> Result<Self, GraphError> {
        Self::from_mask(qubits, full_mask(qubits))
    }

    /// Attaches an injective qubit -> network-node map.
    pub fn with_labels(self, labels: Vec<u32>) -> Result<Self, GraphError> {
        let mut sorted = labels.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::NonInjectiveLabels { node: w[0] });
        }
        self.with_hosts(labels)
    }

    /// Attaches a qubit -> host-node map that may place several qubits on one
    /// node. Used for the multi-qubit registers that exist before fusion.
    pub fn with_hosts(mut self, hosts: Vec<u32>) -> Result<Self, GraphError> {
        if hosts.len() != self.qubits {
            return Err(GraphError::LabelCount {
                got: hosts.len(),
                expected: self.qubits,
            });
        }
        self.labels = Some(hosts);
        Ok(self)
    }

    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn mask(&self) -> u128 {
        self.edges
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.count_ones() as usize
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a != b && a < self.qubits && b < self.qubits && self.edges >> pair_index(a, b) & 1 == 1
    }

    /// Edges as `(i, j)` with `i < j`, in bit order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..self.qubits).flat_map(move |j| (0..j).map(move |i| (i, j)))
            .filter(move |&(i, j)| self.edges >> pair_index(i, j) & 1 == 1)
    }

    /// Neighborhood of `a` as a vertex bitset.
    pub fn neighbor_set(&self, a: usize) -> u32 {
        let mut set = 0u32;
        for b in 0..self.qubits {
            if self.has_edge(a, b) {
                set |= 1 << b;
            }
        }
        set
    }

    pub fn neighbors(&self, a: usize) -> Vec<usize> {
        let set = self.neighbor_set(a);
        (0..self.qubits).filter(|&b| set >> b & 1 == 1).collect()
    }

    pub fn degree(&self, a: usize) -> usize {
        self.neighbor_set(a).count_ones() as usize
    }

    pub fn is_connected(&self) -> bool {
        let all = if self.qubits == 32 { u32::MAX } else { (1u32 << self.qubits) - 1 };
        let mut seen = 1u32;
        let mut frontier = 1u32;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let fresh = self.neighbor_set(v) & !seen;
            seen |= fresh;
            frontier |= fresh;
        }
        seen == all
    }

    fn check(&self, a: usize) -> Result<(), GraphError> {
        if a >= self.qubits {
            Err(GraphError::IndexOutOfRange {
                index: a,
                qubits: self.qubits,
            })
        } else {
            Ok(())
        }
    }

    /// Flips the edge `(a, b)`: a CZ between two graph-state qubits.
    pub fn toggle_cz(&self, a: VertexId, b: VertexId) -> Result<Self, GraphError> {
        self.check(a.0)?;
        self.check(b.0)?;
        if a == b {
            return Err(GraphError::SelfLoop(a.0));
        }
        let mut out = self.clone();
        out.edges ^= 1u128 << pair_index(a.0, b.0);
        Ok(out)
    }

    /// Local complementation at `a`: complements the subgraph induced on `N(a)`.
    pub fn local_complement(&self, a: VertexId) -> Result<Self, GraphError> {
        self.check(a.0)?;
        let mut out = self.clone();
        out.edges ^= complement_mask(self.neighbor_set(a.0));
        Ok(out)
    }

    /// Applies a pivot sequence left to right.
    pub fn apply_pivots(&self, pivots: &[VertexId]) -> Result<Self, GraphError> {
        pivots
            .iter()
            .try_fold(self.clone(), |g, &a| g.local_complement(a))
    }

    /// Removes vertex `a` and its incident edges; higher indices shift down.
    fn delete_vertex(&self, a: usize) -> Self {
        let q = self.qubits;
        let mut edges = 0u128;
        for (i, j) in self.edges() {
            if i == a || j == a {
                continue;
            }
            let ni = if i > a { i - 1 } else { i };
            let nj = if j > a { j - 1 } else { j };
            edges |= 1u128 << pair_index(ni, nj);
        }
        let labels = self.labels.as_ref().map(|l| {
            let mut l = l.clone();
            l.remove(a);
            l
        });
        Self {
            qubits: q - 1,
            edges,
            labels,
        }
    }

    fn check_measurable(&self, a: usize) -> Result<(), GraphError> {
        self.check(a)?;
        if self.qubits <= 2 {
            return Err(GraphError::StateTooSmall(self.qubits));
        }
        Ok(())
    }

    /// Pauli-Z measurement of `a` (+1 branch): the vertex is deleted.
    pub fn measure_z(&self, a: VertexId) -> Result<Self, GraphError> {
        self.check_measurable(a.0)?;
        Ok(self.delete_vertex(a.0))
    }

    /// Pauli-Y measurement of `a`: complement `N(a)`, then delete `a`.
    pub fn measure_y(&self, a: VertexId) -> Result<Self, GraphError> {
        self.check_measurable(a.0)?;
        Ok(self.local_complement(a)?.delete_vertex(a.0))
    }

    /// Pauli-X measurement of `a` using the neighbor `b0`:
    /// LC at `b0`, Y-measure `a`, LC at `b0` again.
    pub fn measure_x(&self, a: VertexId, b0: VertexId) -> Result<Self, GraphError> {
        self.check_measurable(a.0)?;
        self.check(b0.0)?;
        if !self.has_edge(a.0, b0.0) {
            return Err(GraphError::NotANeighbor { a: a.0, b0: b0.0 });
        }
        let shifted = if b0.0 > a.0 { b0.0 - 1 } else { b0.0 };
        self.local_complement(b0)?
            .measure_y(a)?
            .local_complement(VertexId(shifted))
    }

    /// Fusion of co-located qubits: CZ with `a` as control, then Y-measure `b`.
    /// Qubit `b` is consumed.
    pub fn fuse(&self, a: VertexId, b: VertexId) -> Result<Self, GraphError> {
        self.check(a.0)?;
        self.check(b.0)?;
        if a == b {
            return Err(GraphError::SelfLoop(a.0));
        }
        if let Some(l) = &self.labels {
            if l[a.0] != l[b.0] {
                return Err(GraphError::CoLocationViolation {
                    a: a.0,
                    b: b.0,
                    node_a: l[a.0],
                    node_b: l[b.0],
                });
            }
        }
        // a two-qubit register cannot be measured further; fusing it just
        // leaves the control behind
        let linked = self.toggle_cz(a, b)?;
        if self.qubits == 2 {
            return Ok(linked.delete_vertex(b.0));
        }
        linked.measure_y(b)
    }

    /// Relabels vertices: vertex `v` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut edges = 0u128;
        for (i, j) in self.edges() {
            edges |= 1u128 << pair_index(perm[i], perm[j]);
        }
        let labels = self.labels.as_ref().map(|l| {
            let mut out = vec![0; l.len()];
            for (v, &node) in l.iter().enumerate() {
                out[perm[v]] = node;
            }
            out
        });
        Self {
            qubits: self.qubits,
            edges,
            labels,
        }
    }
}

/// Mask of every pair inside the vertex set `set`.
pub fn complement_mask(set: u32) -> u128 {
    let mut mask = 0u128;
    let mut rest = set;
    while rest != 0 {
        let j = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let mut lower = set & ((1u32 << j) - 1);
        while lower != 0 {
            let i = lower.trailing_zeros() as usize;
            lower &= lower - 1;
            mask |= 1u128 << pair_index(i, j);
        }
    }
    mask
}

impl fmt::Display for GraphState {
    /// Text graph format: `q=<n>`, then `edge u v` and optional `map v node` lines.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "q={}", self.qubits)?;
        for (i, j) in self.edges() {
            writeln!(f, "edge {i} {j}")?;
        }
        if let Some(labels) = &self.labels {
            for (v, node) in labels.iter().enumerate() {
                writeln!(f, "map {v} {node}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for GraphState {
    type Err = GraphError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut qubits = None;
        let mut edges = Vec::new();
        let mut maps: Vec<(usize, usize, u32)> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| GraphError::Parse {
                line: line_no,
                msg: msg.to_string(),
            };
            if let Some(rest) = line.strip_prefix("q=") {
                if qubits.is_some() {
                    return Err(err("repeated q= line"));
                }
                qubits = Some(rest.trim().parse::<usize>().map_err(|_| err("bad qubit count"))?);
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["edge", u, v] => {
                    let u = u.parse().map_err(|_| err("bad vertex"))?;
                    let v = v.parse().map_err(|_| err("bad vertex"))?;
                    edges.push((u, v));
                }
                ["map", v, node] => {
                    let v = v.parse().map_err(|_| err("bad vertex"))?;
                    let node = node.parse().map_err(|_| err("bad node"))?;
                    maps.push((line_no, v, node));
                }
                _ => return Err(err("unrecognized line")),
            }
        }
        let qubits = qubits.ok_or(GraphError::Parse {
            line: 0,
            msg: "missing q= line".into(),
        })?;
        let state = GraphState::from_edges(qubits, &edges)?;
        if maps.is_empty() {
            return Ok(state);
        }
        let mut labels = vec![None; qubits];
        for (line, v, node) in maps {
            if v >= qubits {
                return Err(GraphError::IndexOutOfRange { index: v, qubits });
            }
            if labels[v].replace(node).is_some() {
                return Err(GraphError::Parse {
                    line,
                    msg: format!("qubit {v} mapped twice"),
                });
            }
        }
        let labels = labels
            .into_iter()
            .enumerate()
            .map(|(v, l)| {
                l.ok_or(GraphError::Parse {
                    line: 0,
                    msg: format!("qubit {v} has no map line"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        state.with_labels(labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: usize) -> VertexId {
        VertexId(i)
    }

    fn edge_list(g: &GraphState) -> Vec<(usize, usize)> {
        g.edges().collect()
    }

    #[test]
    fn construction() {
        let p = GraphState::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(p.edge_count(), 2);
        let s = GraphState::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(s, GraphState::star(4, 0).unwrap());
        assert_eq!(s.edge_count(), 3);
        assert_eq!(
            GraphState::from_edges(3, &[(0, 3)]),
            Err(GraphError::IndexOutOfRange { index: 3, qubits: 3 })
        );
        assert_eq!(GraphState::from_edges(3, &[(1, 1)]), Err(GraphError::SelfLoop(1)));
        assert_eq!(
            GraphState::from_edges(3, &[(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(0, 1))
        );
    }

    #[test]
    fn canonical_pair_order() {
        assert_eq!(pair_index(0, 1), 0);
        assert_eq!(pair_index(0, 2), 1);
        assert_eq!(pair_index(1, 2), 2);
        assert_eq!(pair_index(3, 0), 3);
        assert_eq!(pair_index(14, 15), 119);
        assert_eq!(full_mask(16).count_ones(), 120);
    }

    #[test]
    fn toggling() {
        let p = GraphState::path(3).unwrap();
        let tri = p.toggle_cz(v(0), v(2)).unwrap();
        assert_eq!(tri, GraphState::complete(3).unwrap());
        assert_eq!(tri.toggle_cz(v(0), v(2)).unwrap(), p);
        let twice = p.toggle_cz(v(0), v(1)).unwrap().toggle_cz(v(0), v(1)).unwrap();
        assert_eq!(twice, p);
        assert_eq!(p.toggle_cz(v(2), v(2)), Err(GraphError::SelfLoop(2)));
    }

    #[test]
    fn local_complementation_examples() {
        let star = GraphState::star(4, 0).unwrap();
        let lc = star.local_complement(v(0)).unwrap();
        assert_eq!(lc, GraphState::complete(4).unwrap());
        assert_eq!(lc.edge_count(), 6);

        let p = GraphState::path(3).unwrap();
        let tri = p.local_complement(v(1)).unwrap();
        assert_eq!(tri, GraphState::complete(3).unwrap());
        assert_eq!(tri.local_complement(v(1)).unwrap(), p);
        assert_eq!(p.local_complement(v(0)).unwrap(), p);
        assert!(p.local_complement(v(3)).is_err());
    }

    #[test]
    fn measurement_examples() {
        let tri = GraphState::complete(3).unwrap();
        assert_eq!(edge_list(&tri.measure_z(v(2)).unwrap()), vec![(0, 1)]);
        let p = GraphState::path(3).unwrap();
        let z = p.measure_z(v(1)).unwrap();
        assert_eq!((z.qubit_count(), z.edge_count()), (2, 0));
        let star = GraphState::star(4, 0).unwrap();
        let z = star.measure_z(v(0)).unwrap();
        assert_eq!((z.qubit_count(), z.edge_count()), (3, 0));
        let edge = GraphState::path(2).unwrap();
        assert_eq!(edge.measure_z(v(0)), Err(GraphError::StateTooSmall(2)));

        assert_eq!(edge_list(&p.measure_y(v(1)).unwrap()), vec![(0, 1)]);
        let y = star.measure_y(v(0)).unwrap();
        assert_eq!(y, GraphState::complete(3).unwrap());
        for a in 0..3 {
            assert_eq!(
                p.measure_y(v(a)).unwrap(),
                p.local_complement(v(a)).unwrap().measure_z(v(a)).unwrap()
            );
        }
    }

    #[test]
    fn x_measurement() {
        let p = GraphState::path(3).unwrap();
        // X on a leaf leaves its neighbor in a Z eigenstate: no edge survives
        let x = p.measure_x(v(0), v(1)).unwrap();
        assert_eq!((x.qubit_count(), x.edge_count()), (2, 0));
        let e = GraphState::path(2).unwrap();
        assert!(e.measure_x(v(0), v(1)).is_err());
        let star = GraphState::star(4, 0).unwrap();
        assert_eq!(star.measure_x(v(1), v(0)).unwrap().edge_count(), 0);
        // X on the hub hands the star over to the chosen leaf
        let x = star.measure_x(v(0), v(1)).unwrap();
        assert_eq!(x, GraphState::star(3, 0).unwrap());
        assert_eq!(
            p.measure_x(v(0), v(2)),
            Err(GraphError::NotANeighbor { a: 0, b0: 2 })
        );
        let a = p.measure_x(v(1), v(0)).unwrap();
        let b = p.measure_x(v(1), v(2)).unwrap();
        assert_eq!(a.qubit_count(), 2);
        assert_eq!(b.qubit_count(), 2);
    }

    #[test]
    fn fusion() {
        // a = 0, b = 1, r = 2; b - r only
        let g = GraphState::from_edges(3, &[(1, 2)]).unwrap();
        let f = g.fuse(v(0), v(1)).unwrap();
        assert_eq!(edge_list(&f), vec![(0, 1)]);

        // a = 0, b = 1, x = 2, y = 3
        let g = GraphState::from_edges(4, &[(0, 2), (1, 3)]).unwrap();
        let f = g.fuse(v(0), v(1)).unwrap();
        assert_eq!(edge_list(&f), vec![(0, 1), (0, 2)]);

        let g = GraphState::empty(2).unwrap();
        let f = g.fuse(v(0), v(1)).unwrap();
        assert_eq!((f.qubit_count(), f.edge_count()), (1, 0));

        let hosted = GraphState::from_edges(3, &[(1, 2)])
            .unwrap()
            .with_hosts(vec![5, 6, 6])
            .unwrap();
        assert!(matches!(
            hosted.fuse(v(0), v(1)),
            Err(GraphError::CoLocationViolation { .. })
        ));
        let f = hosted.fuse(v(1), v(2)).unwrap();
        assert_eq!(f.labels(), Some(&[5u32, 6][..]));
    }

    #[test]
    fn labels_must_be_injective() {
        let g = GraphState::path(3).unwrap();
        assert_eq!(
            g.clone().with_labels(vec![1, 2, 1]),
            Err(GraphError::NonInjectiveLabels { node: 1 })
        );
        assert!(g.with_labels(vec![4, 2, 9]).is_ok());
    }

    #[test]
    fn file_format() {
        let text = "# a path\nq=3\nedge 0 1\nedge 1 2  # trailing\nmap 0 7\nmap 1 3\nmap 2 11\n";
        let g: GraphState = text.parse().unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.labels(), Some(&[7u32, 3, 11][..]));
        let again: GraphState = g.to_string().parse().unwrap();
        assert_eq!(again, g);
        assert!("edge 0 1".parse::<GraphState>().is_err());
        assert!("q=3\nedge 0 1\nedge 0 1".parse::<GraphState>().is_err());
        assert!("q=2\nbogus".parse::<GraphState>().is_err());
    }

    #[test]
    fn connectivity() {
        assert!(GraphState::path(5).unwrap().is_connected());
        assert!(!GraphState::from_edges(4, &[(0, 1), (2, 3)]).unwrap().is_connected());
        assert!(GraphState::empty(1).unwrap().is_connected());
    }
}
