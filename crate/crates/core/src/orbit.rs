//! Local-complementation orbits: BFS enumeration, exact optimum search and the
//! full census of connected labeled graph states for small registers.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::graph::{pair_count, pair_index, GraphError, GraphState, VertexId};

/// Largest register accepted by [`enumerate_orbit`].
pub const MAX_ORBIT_QUBITS: usize = 12;
/// Largest register accepted by [`full_census`].
pub const MAX_CENSUS_QUBITS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrbitError {
    #[error("state is disconnected")]
    Disconnected,
    #[error("{qubits} qubits exceeds the limit of {limit}")]
    TooLarge { qubits: usize, limit: usize },
    #[error("{0} qubits is below the census minimum of 3")]
    TooSmall(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Precomputed tables for applying LC directly to pair masks.
#[derive(Debug, Clone)]
pub struct LcKernel {
    qubits: usize,
    /// `(bit, neighbor)` pairs touching each vertex.
    incident: Vec<Vec<(u8, u8)>>,
    /// Pair mask of the complete graph on each vertex subset.
    complement: Vec<u128>,
}

impl LcKernel {
    pub fn new(qubits: usize) -> Self {
        let incident = (0..qubits)
            .map(|a| {
                (0..qubits)
                    .filter(|&b| b != a)
                    .map(|b| (pair_index(a, b) as u8, b as u8))
                    .collect()
            })
            .collect();
        let mut complement = vec![0u128; 1 << qubits];
        for set in 1usize..1 << qubits {
            let top = usize::BITS as usize - 1 - set.leading_zeros() as usize;
            let rest = set & !(1 << top);
            let mut m = complement[rest];
            let mut r = rest;
            while r != 0 {
                let i = r.trailing_zeros() as usize;
                r &= r - 1;
                m |= 1u128 << pair_index(i, top);
            }
            complement[set] = m;
        }
        LcKernel {
            qubits,
            incident,
            complement,
        }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    #[inline]
    pub fn neighbors(&self, mask: u128, a: usize) -> usize {
        let mut set = 0usize;
        for &(bit, b) in &self.incident[a] {
            set |= ((mask >> bit) as usize & 1) << b;
        }
        set
    }

    #[inline]
    pub fn lc(&self, mask: u128, a: usize) -> u128 {
        mask ^ self.complement[self.neighbors(mask, a)]
    }

    pub fn is_connected(&self, mask: u128) -> bool {
        let all = (1usize << self.qubits) - 1;
        let mut seen = 1usize;
        let mut frontier = 1usize;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let fresh = self.neighbors(mask, v) & !seen;
            seen |= fresh;
            frontier |= fresh;
        }
        seen == all
    }
}

/// An LC orbit discovered by breadth-first search from a root state.
#[derive(Debug, Clone)]
pub struct Orbit {
    qubits: usize,
    members: Vec<u128>,
    /// BFS parent of each member: `(parent index, pivot)`; `None` for the root.
    parents: Vec<Option<(usize, u8)>>,
}

impl Orbit {
    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Member masks in BFS discovery order; index 0 is the root.
    pub fn members(&self) -> &[u128] {
        &self.members
    }

    pub fn member(&self, i: usize) -> GraphState {
        GraphState::from_mask(self.qubits, self.members[i]).expect("member fits the register")
    }

    pub fn contains(&self, mask: u128) -> bool {
        self.members.contains(&mask)
    }

    /// Pivot sequence taking the root to member `i`.
    pub fn witness(&self, i: usize) -> Vec<VertexId> {
        let mut out = Vec::new();
        let mut cur = i;
        while let Some((parent, pivot)) = self.parents[cur] {
            out.push(VertexId(pivot as usize));
            cur = parent;
        }
        out.reverse();
        out
    }
}

fn check_orbit_input(state: &GraphState) -> Result<(), OrbitError> {
    if state.qubit_count() > MAX_ORBIT_QUBITS {
        return Err(OrbitError::TooLarge {
            qubits: state.qubit_count(),
            limit: MAX_ORBIT_QUBITS,
        });
    }
    if !state.is_connected() {
        return Err(OrbitError::Disconnected);
    }
    Ok(())
}

/// Closure of `state` under local complementation at every vertex.
///
/// Pivots are tried in ascending order and the frontier is FIFO, so member
/// order and witnesses are reproducible.
pub fn enumerate_orbit(state: &GraphState) -> Result<Orbit, OrbitError> {
    check_orbit_input(state)?;
    let q = state.qubit_count();
    let kernel = LcKernel::new(q);
    let mut index: HashMap<u128, usize> = HashMap::new();
    let mut members = vec![state.mask()];
    let mut parents = vec![None];
    index.insert(state.mask(), 0);
    let mut head = 0;
    while head < members.len() {
        let m = members[head];
        for a in 0..q {
            let next = kernel.lc(m, a);
            if let std::collections::hash_map::Entry::Vacant(e) = index.entry(next) {
                e.insert(members.len());
                members.push(next);
                parents.push(Some((head, a as u8)));
            }
        }
        head += 1;
    }
    Ok(Orbit {
        qubits: q,
        members,
        parents,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Min,
    Max,
}

/// Exhaustive search of the orbit for the best member under `cost`.
///
/// Ties go to the smallest edge mask. Returns the member and its BFS witness.
pub fn orbit_optimum<F>(
    state: &GraphState,
    cost: F,
    mode: Mode,
) -> Result<(GraphState, Vec<VertexId>), OrbitError>
where
    F: Fn(&GraphState) -> f64,
{
    let orbit = enumerate_orbit(state)?;
    let mut best: Option<(f64, u128, usize)> = None;
    for i in 0..orbit.len() {
        let value = cost(&orbit.member(i));
        let mask = orbit.members[i];
        let better = match best {
            None => true,
            Some((bv, bm, _)) => {
                let strictly = match mode {
                    Mode::Min => value < bv,
                    Mode::Max => value > bv,
                };
                strictly || (value == bv && mask < bm)
            }
        };
        if better {
            best = Some((value, mask, i));
        }
    }
    let (_, _, i) = best.expect("orbit is non-empty");
    let member = match state.labels() {
        Some(l) => orbit.member(i).with_hosts(l.to_vec())?,
        None => orbit.member(i),
    };
    Ok((member, orbit.witness(i)))
}

/// Canonical form of a graph: the smallest pair mask over all relabelings
/// that respect an isomorphism-invariant vertex ordering.
///
/// Vertices are first split into cells by iterated degree refinement; only
/// permutations that keep every cell in its block of positions are scanned.
pub fn canonical_form(mask: u128, qubits: usize) -> u128 {
    let adj: Vec<u32> = (0..qubits)
        .map(|a| {
            (0..qubits)
                .filter(|&b| b != a && mask >> pair_index(a, b) & 1 == 1)
                .fold(0u32, |s, b| s | 1 << b)
        })
        .collect();
    let cells = refine(&adj);
    let mut best = u128::MAX;
    let mut position = vec![0usize; qubits];
    let mut order: Vec<Vec<usize>> = cells;
    search_cells(&mut order, 0, 0, &mut position, &adj, &mut best);
    best
}

fn refine(adj: &[u32]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut color: Vec<usize> = adj.iter().map(|r| r.count_ones() as usize).collect();
    let mut classes = 0;
    loop {
        let sigs: Vec<(usize, Vec<usize>)> = (0..n)
            .map(|v| {
                let mut nb: Vec<usize> = (0..n).filter(|&b| adj[v] >> b & 1 == 1).map(|b| color[b]).collect();
                nb.sort_unstable();
                (color[v], nb)
            })
            .collect();
        let mut distinct = sigs.clone();
        distinct.sort();
        distinct.dedup();
        color = sigs
            .iter()
            .map(|s| distinct.binary_search(s).unwrap())
            .collect();
        if distinct.len() == classes {
            break;
        }
        classes = distinct.len();
    }
    let mut cells = vec![Vec::new(); classes];
    for v in 0..n {
        cells[color[v]].push(v);
    }
    cells
}

fn search_cells(
    cells: &mut [Vec<usize>],
    cell: usize,
    offset: usize,
    position: &mut [usize],
    adj: &[u32],
    best: &mut u128,
) {
    if cell == cells.len() {
        let mut m = 0u128;
        for (a, &row) in adj.iter().enumerate() {
            let mut r = row & ((1u32 << a) - 1);
            while r != 0 {
                let b = r.trailing_zeros() as usize;
                r &= r - 1;
                m |= 1u128 << pair_index(position[a], position[b]);
            }
        }
        if m < *best {
            *best = m;
        }
        return;
    }
    let len = cells[cell].len();
    permute(cells, cell, 0, len, offset, position, adj, best);
}

#[allow(clippy::too_many_arguments)]
fn permute(
    cells: &mut [Vec<usize>],
    cell: usize,
    k: usize,
    len: usize,
    offset: usize,
    position: &mut [usize],
    adj: &[u32],
    best: &mut u128,
) {
    if k == len {
        for (i, &v) in cells[cell].iter().enumerate() {
            position[v] = offset + i;
        }
        search_cells(cells, cell + 1, offset + len, position, adj, best);
        return;
    }
    for i in k..len {
        cells[cell].swap(k, i);
        permute(cells, cell, k + 1, len, offset, position, adj, best);
        cells[cell].swap(k, i);
    }
}

/// One labeled orbit of the census.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabeledOrbit {
    /// Smallest member mask; the sweep discovers the orbit from here.
    pub root: u32,
    pub size: u32,
    pub min_edges: u32,
    /// Smallest mask among the members with `min_edges` edges.
    pub min_edge_mask: u32,
    pub class: u32,
}

/// Labeled orbits that are related by a vertex relabeling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoClass {
    pub id: usize,
    pub labeled_orbit_count: usize,
    pub labeled_size_min: usize,
    pub labeled_size_max: usize,
    pub min_edges: usize,
    /// A minimum-edge member of the first labeled orbit in the class.
    pub representative_mask: u32,
    /// Canonical forms of every unlabeled graph in the class.
    pub unlabeled_members: usize,
}

#[derive(Debug, Clone)]
pub struct OrbitCensus {
    pub qubits: usize,
    pub orbits: Vec<LabeledOrbit>,
    pub classes: Vec<IsoClass>,
}

impl OrbitCensus {
    /// Total members across labeled orbits (= connected labeled graphs).
    pub fn connected_graphs(&self) -> u64 {
        self.orbits.iter().map(|o| o.size as u64).sum()
    }

    pub fn labeled_size_min(&self) -> usize {
        self.classes.iter().map(|c| c.labeled_size_min).min().unwrap_or(0)
    }

    pub fn labeled_size_max(&self) -> usize {
        self.classes.iter().map(|c| c.labeled_size_max).max().unwrap_or(0)
    }

    /// Sorted multiset of labeled orbit sizes.
    pub fn size_multiset(&self) -> Vec<u32> {
        let mut s: Vec<u32> = self.orbits.iter().map(|o| o.size).collect();
        s.sort_unstable();
        s
    }

    /// `atlas` CSV rows, one per iso-class.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "q,class_id,labeled_orbit_count,labeled_size_min,labeled_size_max,min_edges,representative_mask\n",
        );
        for c in &self.classes {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                self.qubits,
                c.id,
                c.labeled_orbit_count,
                c.labeled_size_min,
                c.labeled_size_max,
                c.min_edges,
                c.representative_mask
            ));
        }
        out
    }
}

struct Bitmap(Vec<u64>);

impl Bitmap {
    fn new(bits: usize) -> Self {
        Bitmap(vec![0; bits.div_ceil(64)])
    }

    #[inline]
    fn get(&self, i: u32) -> bool {
        self.0[(i >> 6) as usize] >> (i & 63) & 1 == 1
    }

    #[inline]
    fn set(&mut self, i: u32) {
        self.0[(i >> 6) as usize] |= 1 << (i & 63);
    }
}

/// Groups unlabeled graphs into LC classes by closing canonical forms
/// under LC at every vertex.
struct ClassIndex<'k> {
    kernel: &'k LcKernel,
    class_of: HashMap<u128, u32>,
    sizes: Vec<usize>,
}

impl<'k> ClassIndex<'k> {
    fn lookup(&mut self, mask: u128) -> u32 {
        let q = self.kernel.qubits();
        let canon = canonical_form(mask, q);
        if let Some(&c) = self.class_of.get(&canon) {
            return c;
        }
        let id = self.sizes.len() as u32;
        let mut queue = VecDeque::from([canon]);
        self.class_of.insert(canon, id);
        let mut count = 1;
        while let Some(g) = queue.pop_front() {
            for a in 0..q {
                let next = canonical_form(self.kernel.lc(g, a), q);
                if let std::collections::hash_map::Entry::Vacant(e) = self.class_of.entry(next) {
                    e.insert(id);
                    queue.push_back(next);
                    count += 1;
                }
            }
        }
        self.sizes.push(count);
        id
    }
}

/// Partitions every connected labeled graph on `qubits` vertices into
/// labeled LC orbits and groups those orbits into iso-classes.
pub fn full_census(qubits: usize) -> Result<OrbitCensus, OrbitError> {
    if qubits > MAX_CENSUS_QUBITS {
        return Err(OrbitError::TooLarge {
            qubits,
            limit: MAX_CENSUS_QUBITS,
        });
    }
    if qubits < 3 {
        return Err(OrbitError::TooSmall(qubits));
    }
    let kernel = LcKernel::new(qubits);
    let space: u64 = 1 << pair_count(qubits);
    let mut visited = Bitmap::new(space as usize);
    let mut index = ClassIndex {
        kernel: &kernel,
        class_of: HashMap::new(),
        sizes: Vec::new(),
    };
    let mut orbits = Vec::new();
    let mut queue: Vec<u32> = Vec::new();
    for root in 0..space as u32 {
        if visited.get(root) || !kernel.is_connected(root as u128) {
            continue;
        }
        queue.clear();
        queue.push(root);
        visited.set(root);
        let mut head = 0;
        let mut min_edges = u32::MAX;
        let mut min_edge_mask = 0;
        while head < queue.len() {
            let m = queue[head];
            head += 1;
            let e = m.count_ones();
            if e < min_edges || (e == min_edges && m < min_edge_mask) {
                min_edges = e;
                min_edge_mask = m;
            }
            for a in 0..qubits {
                let next = kernel.lc(m as u128, a) as u32;
                if !visited.get(next) {
                    visited.set(next);
                    queue.push(next);
                }
            }
        }
        let class = index.lookup(root as u128);
        orbits.push(LabeledOrbit {
            root,
            size: queue.len() as u32,
            min_edges,
            min_edge_mask,
            class,
        });
    }

    let mut classes: Vec<IsoClass> = index
        .sizes
        .iter()
        .enumerate()
        .map(|(id, &unlabeled)| IsoClass {
            id,
            labeled_orbit_count: 0,
            labeled_size_min: usize::MAX,
            labeled_size_max: 0,
            min_edges: usize::MAX,
            representative_mask: 0,
            unlabeled_members: unlabeled,
        })
        .collect();
    for o in &orbits {
        let c = &mut classes[o.class as usize];
        if c.labeled_orbit_count == 0 {
            c.representative_mask = o.min_edge_mask;
        }
        c.labeled_orbit_count += 1;
        c.labeled_size_min = c.labeled_size_min.min(o.size as usize);
        c.labeled_size_max = c.labeled_size_max.max(o.size as usize);
        c.min_edges = c.min_edges.min(o.min_edges as usize);
    }
    Ok(OrbitCensus {
        qubits,
        orbits,
        classes,
    })
}

/// Worst case, over all targets, of the fewest edges in an LC-equivalent state.
pub fn min_edge_cost(census: &OrbitCensus) -> usize {
    census.classes.iter().map(|c| c.min_edges).max().unwrap_or(0)
}
