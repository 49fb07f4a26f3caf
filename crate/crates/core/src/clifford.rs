//! Single-qubit Clifford algebra modulo global phase and stabilizer tableaus.
//!
//! Elements are stored by their conjugation action `P -> U P U^dagger` on X
//! and Z. The named generators are derived at first use by conjugating the
//! Pauli matrices with their explicit 2x2 unitaries, so no action table is
//! transcribed by hand.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

use crate::graph::{GraphError, GraphState, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliffordError {
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("expected {expected} per-qubit entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("witness replay does not reach the expected state")]
    WitnessInconsistent,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    I,
    X,
    Y,
    Z,
}

impl Axis {
    const NON_IDENTITY: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    fn bits(self) -> (bool, bool) {
        match self {
            Axis::I => (false, false),
            Axis::X => (true, false),
            Axis::Y => (true, true),
            Axis::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Axis {
        match (x, z) {
            (false, false) => Axis::I,
            (true, false) => Axis::X,
            (true, true) => Axis::Y,
            (false, true) => Axis::Z,
        }
    }

    fn letter(self) -> char {
        match self {
            Axis::I => 'I',
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }

    /// `self * other = i^k * result`, returning `(k mod 4, result)`.
    fn mul(self, other: Axis) -> (u8, Axis) {
        use Axis::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }
}

/// Signed single-qubit Pauli operator. The identity always carries `+`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pauli {
    axis: Axis,
    negative: bool,
}

impl Pauli {
    pub const I: Pauli = Pauli::plus(Axis::I);
    pub const X: Pauli = Pauli::plus(Axis::X);
    pub const Y: Pauli = Pauli::plus(Axis::Y);
    pub const Z: Pauli = Pauli::plus(Axis::Z);

    pub const fn plus(axis: Axis) -> Self {
        Pauli {
            axis,
            negative: false,
        }
    }

    pub fn new(axis: Axis, negative: bool) -> Self {
        Pauli {
            axis,
            negative: negative && axis != Axis::I,
        }
    }

    pub fn axis(self) -> Axis {
        self.axis
    }

    pub fn is_negative(self) -> bool {
        self.negative
    }

    pub fn negated(self) -> Self {
        Pauli::new(self.axis, !self.negative)
    }

    /// The Pauli as a Clifford element (its sign is a global phase).
    pub fn as_clifford(self) -> SingleQubitClifford {
        let flip = |p: Pauli, anticommutes: bool| if anticommutes { p.negated() } else { p };
        let a = self.axis;
        SingleQubitClifford {
            image_x: flip(Pauli::X, a == Axis::Y || a == Axis::Z),
            image_z: flip(Pauli::Z, a == Axis::X || a == Axis::Y),
        }
    }

    fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let m = match self.axis {
            Axis::I => [[l, o], [o, l]],
            Axis::X => [[o, l], [l, o]],
            Axis::Y => [[o, -i], [i, o]],
            Axis::Z => [[l, o], [o, -l]],
        };
        let s = if self.negative { -1.0 } else { 1.0 };
        m.map(|row| row.map(|c| c * s))
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.negative { '-' } else { '+' }, self.axis.letter())
    }
}

/// Element of the single-qubit Clifford group modulo phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SingleQubitClifford {
    image_x: Pauli,
    image_z: Pauli,
}

impl SingleQubitClifford {
    pub const IDENTITY: SingleQubitClifford = SingleQubitClifford {
        image_x: Pauli::X,
        image_z: Pauli::Z,
    };

    /// Builds an element from the images of X and Z. The images must be
    /// non-identity and on different axes so they still anticommute.
    pub fn from_images(image_x: Pauli, image_z: Pauli) -> Option<Self> {
        if image_x.axis == Axis::I || image_z.axis == Axis::I || image_x.axis == image_z.axis {
            return None;
        }
        Some(SingleQubitClifford { image_x, image_z })
    }

    pub fn image_x(self) -> Pauli {
        self.image_x
    }

    pub fn image_z(self) -> Pauli {
        self.image_z
    }

    pub fn is_identity(self) -> bool {
        self == Self::IDENTITY
    }

    /// All 24 elements in a fixed order; index 0 is the identity.
    pub fn all() -> &'static [SingleQubitClifford; 24] {
        static ALL: OnceLock<[SingleQubitClifford; 24]> = OnceLock::new();
        ALL.get_or_init(|| {
            let mut out = Vec::with_capacity(24);
            for &ax in &[Axis::X, Axis::Y, Axis::Z] {
                for &az in &[Axis::Z, Axis::X, Axis::Y] {
                    if ax == az {
                        continue;
                    }
                    for nx in [false, true] {
                        for nz in [false, true] {
                            out.push(SingleQubitClifford {
                                image_x: Pauli::new(ax, nx),
                                image_z: Pauli::new(az, nz),
                            });
                        }
                    }
                }
            }
            out.try_into().expect("24 elements")
        })
    }

    /// Position of this element in [`SingleQubitClifford::all`].
    pub fn index(self) -> usize {
        Self::all().iter().position(|&c| c == self).expect("valid element")
    }

    /// Conjugation action on a signed Pauli.
    pub fn apply(self, p: Pauli) -> Pauli {
        let out = match p.axis {
            Axis::I => Pauli::I,
            Axis::X => self.image_x,
            Axis::Z => self.image_z,
            Axis::Y => {
                // Y = i X Z, so U Y U^dagger = i (UXU^dagger)(UZU^dagger)
                let (k, axis) = self.image_x.axis.mul(self.image_z.axis);
                // i * i^k is real: k = 1 gives -1, k = 3 gives +1
                let neg = (k == 1) ^ self.image_x.negative ^ self.image_z.negative;
                Pauli::new(axis, neg)
            }
        };
        if p.negative {
            out.negated()
        } else {
            out
        }
    }

    /// The element acting as `self` followed by `second`.
    pub fn then(self, second: SingleQubitClifford) -> SingleQubitClifford {
        compose(self, second)
    }

    pub fn inverse(self) -> SingleQubitClifford {
        *Self::all()
            .iter()
            .find(|&&c| compose(self, c).is_identity())
            .expect("group element has an inverse")
    }
}

impl fmt::Display for SingleQubitClifford {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X{}/Z{}", self.image_x, self.image_z)
    }
}

impl FromStr for SingleQubitClifford {
    type Err = CliffordError;

    /// Parses the `X+Z/Z+X` form produced by `Display`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CliffordError::UnknownGenerator(s.to_string());
        let (x, z) = s.split_once('/').ok_or_else(bad)?;
        let parse = |part: &str, head: char| -> Option<Pauli> {
            let mut chars = part.chars();
            if chars.next()? != head {
                return None;
            }
            let neg = match chars.next()? {
                '+' => false,
                '-' => true,
                _ => return None,
            };
            let axis = match chars.next()? {
                'X' => Axis::X,
                'Y' => Axis::Y,
                'Z' => Axis::Z,
                _ => return None,
            };
            chars.next().is_none().then(|| Pauli::new(axis, neg))
        };
        let x = parse(x, 'X').ok_or_else(bad)?;
        let z = parse(z, 'Z').ok_or_else(bad)?;
        SingleQubitClifford::from_images(x, z).ok_or_else(bad)
    }
}

/// Product in application order: `first` is applied, then `second`.
pub fn compose(first: SingleQubitClifford, second: SingleQubitClifford) -> SingleQubitClifford {
    SingleQubitClifford {
        image_x: second.apply(first.image_x),
        image_z: second.apply(first.image_z),
    }
}

/// Named single-qubit gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    SqrtMinusIX,
    SqrtIZ,
    SqrtMinusIZ,
    H,
    X,
    Y,
    Z,
    S,
}

impl Gate {
    pub const ALL: [Gate; 8] = [
        Gate::SqrtMinusIX,
        Gate::SqrtIZ,
        Gate::SqrtMinusIZ,
        Gate::H,
        Gate::X,
        Gate::Y,
        Gate::Z,
        Gate::S,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Gate::SqrtMinusIX => "sqrt_minus_iX",
            Gate::SqrtIZ => "sqrt_iZ",
            Gate::SqrtMinusIZ => "sqrt_minus_iZ",
            Gate::H => "H",
            Gate::X => "X",
            Gate::Y => "Y",
            Gate::Z => "Z",
            Gate::S => "S",
        }
    }

    /// The gate's unitary.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Gate::SqrtMinusIX => [[c(r, 0.0), c(0.0, -r)], [c(0.0, -r), c(r, 0.0)]],
            Gate::SqrtIZ => [[c(r, r), c(0.0, 0.0)], [c(0.0, 0.0), c(r, -r)]],
            Gate::SqrtMinusIZ => [[c(r, -r), c(0.0, 0.0)], [c(0.0, 0.0), c(r, r)]],
            Gate::H => [[c(r, 0.0), c(r, 0.0)], [c(r, 0.0), c(-r, 0.0)]],
            Gate::X => Pauli::X.matrix(),
            Gate::Y => Pauli::Y.matrix(),
            Gate::Z => Pauli::Z.matrix(),
            Gate::S => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 1.0)]],
        }
    }

    pub fn clifford(self) -> SingleQubitClifford {
        static TABLE: OnceLock<Vec<SingleQubitClifford>> = OnceLock::new();
        let table = TABLE.get_or_init(|| {
            Gate::ALL
                .iter()
                .map(|g| conjugation_action(&g.matrix()).expect("gate is Clifford"))
                .collect()
        });
        table[Gate::ALL.iter().position(|&g| g == self).unwrap()]
    }
}

impl FromStr for Gate {
    type Err = CliffordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Gate::ALL
            .iter()
            .copied()
            .find(|g| g.name() == s)
            .ok_or_else(|| CliffordError::UnknownGenerator(s.to_string()))
    }
}

/// Looks up a generator by name.
pub fn clifford_of_generator(name: &str) -> Result<SingleQubitClifford, CliffordError> {
    Ok(name.parse::<Gate>()?.clifford())
}

type Mat2 = [[Complex64; 2]; 2];

fn matmul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn dagger(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

fn close(a: &Mat2, b: &Mat2) -> bool {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .all(|(x, y)| (x - y).norm() < 1e-9)
}

/// Reads off the Clifford action of a 2x2 unitary by conjugating X and Z.
pub fn conjugation_action(u: &Mat2) -> Option<SingleQubitClifford> {
    let ud = dagger(u);
    let image = |p: Pauli| -> Option<Pauli> {
        let m = matmul(&matmul(u, &p.matrix()), &ud);
        Axis::NON_IDENTITY
            .iter()
            .flat_map(|&a| [Pauli::new(a, false), Pauli::new(a, true)])
            .find(|cand| close(&cand.matrix(), &m))
    };
    SingleQubitClifford::from_images(image(Pauli::X)?, image(Pauli::Z)?)
}

/// Multiplication table over [`SingleQubitClifford::all`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliffordTable {
    pub elements: Vec<SingleQubitClifford>,
    /// `product[a][b]` is the index of `compose(elements[a], elements[b])`.
    pub product: Vec<Vec<usize>>,
}

impl CliffordTable {
    pub fn build() -> Self {
        let elements = SingleQubitClifford::all().to_vec();
        let product = elements
            .iter()
            .map(|&a| elements.iter().map(|&b| compose(a, b).index()).collect())
            .collect();
        CliffordTable { elements, product }
    }

    /// Checks closure, associativity, identity and inverses exhaustively.
    pub fn check_group_axioms(&self) -> Result<(), String> {
        let n = self.elements.len();
        if n != 24 {
            return Err(format!("{n} elements, expected 24"));
        }
        let mut distinct = self.elements.clone();
        distinct.sort();
        distinct.dedup();
        if distinct.len() != n {
            return Err("duplicate elements".into());
        }
        if self.product.len() != n || self.product.iter().any(|r| r.len() != n || r.iter().any(|&c| c >= n)) {
            return Err("table not closed".into());
        }
        let id = self
            .elements
            .iter()
            .position(|e| e.is_identity())
            .ok_or("identity missing")?;
        for a in 0..n {
            if self.product[id][a] != a || self.product[a][id] != a {
                return Err(format!("identity law fails at {a}"));
            }
            if !(0..n).any(|b| self.product[a][b] == id && self.product[b][a] == id) {
                return Err(format!("element {a} has no inverse"));
            }
            for b in 0..n {
                let ab = self.product[a][b];
                for c in 0..n {
                    if self.product[ab][c] != self.product[a][self.product[b][c]] {
                        return Err(format!("associativity fails at ({a}, {b}, {c})"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Signed Pauli string on up to 32 qubits. Letter `v` is read from bit `v` of
/// the `x` and `z` masks (both set means Y).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub x: u32,
    pub z: u32,
    pub negative: bool,
}

impl PauliString {
    pub fn letter(&self, v: usize) -> Axis {
        Axis::from_bits(self.x >> v & 1 == 1, self.z >> v & 1 == 1)
    }

    fn set_letter(&mut self, v: usize, p: Pauli) {
        let (x, z) = p.axis.bits();
        self.x = (self.x & !(1 << v)) | (x as u32) << v;
        self.z = (self.z & !(1 << v)) | (z as u32) << v;
        self.negative ^= p.negative;
    }

    /// Product `self * other`; the inputs must commute so the result is real.
    fn mul(&self, other: &PauliString, qubits: usize) -> PauliString {
        let mut phase = 0u8;
        for v in 0..qubits {
            let (k, _) = self.letter(v).mul(other.letter(v));
            phase += k;
        }
        let phase = phase % 4;
        debug_assert!(phase.is_multiple_of(2), "multiplying anticommuting strings");
        PauliString {
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            negative: self.negative ^ other.negative ^ (phase == 2),
        }
    }

    fn commutes(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    fn symplectic(&self) -> u64 {
        self.x as u64 | (self.z as u64) << 32
    }

    pub fn render(&self, qubits: usize) -> String {
        let mut s = String::with_capacity(qubits + 1);
        s.push(if self.negative { '-' } else { '+' });
        s.extend((0..qubits).map(|v| self.letter(v).letter()));
        s
    }
}

/// Stabilizer generators of a `q`-qubit state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerTableau {
    qubits: usize,
    generators: Vec<PauliString>,
}

/// Outcome of comparing two stabilizer groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupComparison {
    /// Same group once generator signs are ignored.
    pub up_to_signs: bool,
    /// Same group including signs.
    pub strict: bool,
}

impl StabilizerTableau {
    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn from_generators(qubits: usize, generators: Vec<PauliString>) -> Self {
        StabilizerTableau { qubits, generators }
    }

    /// Generators pairwise commute and are independent.
    pub fn is_valid(&self) -> bool {
        let g = &self.generators;
        let commuting = g
            .iter()
            .enumerate()
            .all(|(i, a)| g[i + 1..].iter().all(|b| a.commutes(b)));
        commuting && rank(g.iter().map(|p| p.symplectic()).collect()) == g.len()
    }

    /// Applies one single-qubit Clifford per qubit, letter by letter.
    pub fn apply_local_cliffords(
        &self,
        per_qubit: &[SingleQubitClifford],
    ) -> Result<StabilizerTableau, CliffordError> {
        if per_qubit.len() != self.qubits {
            return Err(CliffordError::LengthMismatch {
                expected: self.qubits,
                got: per_qubit.len(),
            });
        }
        let generators = self
            .generators
            .iter()
            .map(|g| {
                let mut out = PauliString {
                    x: 0,
                    z: 0,
                    negative: g.negative,
                };
                for (v, c) in per_qubit.iter().enumerate() {
                    out.set_letter(v, c.apply(Pauli::plus(g.letter(v))));
                }
                out
            })
            .collect();
        Ok(StabilizerTableau {
            qubits: self.qubits,
            generators,
        })
    }

    /// Compares the groups generated by two tableaus.
    pub fn compare(&self, other: &StabilizerTableau) -> GroupComparison {
        let no = GroupComparison {
            up_to_signs: false,
            strict: false,
        };
        if self.qubits != other.qubits || self.generators.len() != other.generators.len() {
            return no;
        }
        let basis = Reducer::new(&other.generators);
        if basis.rank != other.generators.len()
            || rank(self.generators.iter().map(|p| p.symplectic()).collect()) != self.generators.len()
        {
            return no;
        }
        let mut strict = true;
        for g in &self.generators {
            let Some(combo) = basis.express(g.symplectic()) else {
                return no;
            };
            let mut prod = PauliString {
                x: 0,
                z: 0,
                negative: false,
            };
            for (i, h) in other.generators.iter().enumerate() {
                if combo >> i & 1 == 1 {
                    prod = prod.mul(h, self.qubits);
                }
            }
            if prod.negative != g.negative {
                strict = false;
            }
        }
        GroupComparison {
            up_to_signs: true,
            strict,
        }
    }
}

impl fmt::Display for StabilizerTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.generators.iter().map(|g| g.render(self.qubits)).collect();
        write!(f, "{}", rows.join(" "))
    }
}

fn rank(mut rows: Vec<u64>) -> usize {
    let mut r = 0;
    for bit in 0..64 {
        let Some(p) = (r..rows.len()).find(|&i| rows[i] >> bit & 1 == 1) else {
            continue;
        };
        rows.swap(r, p);
        for i in 0..rows.len() {
            if i != r && rows[i] >> bit & 1 == 1 {
                rows[i] ^= rows[r];
            }
        }
        r += 1;
    }
    r
}

/// Row-reduced basis that remembers which input rows form each basis vector.
struct Reducer {
    rows: Vec<(u64, u64)>,
    pivots: Vec<u32>,
    rank: usize,
}

impl Reducer {
    fn new(generators: &[PauliString]) -> Self {
        let mut rows: Vec<(u64, u64)> = generators
            .iter()
            .enumerate()
            .map(|(i, g)| (g.symplectic(), 1u64 << i))
            .collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for bit in 0..64 {
            let Some(p) = (r..rows.len()).find(|&i| rows[i].0 >> bit & 1 == 1) else {
                continue;
            };
            rows.swap(r, p);
            for i in 0..rows.len() {
                if i != r && rows[i].0 >> bit & 1 == 1 {
                    rows[i].0 ^= rows[r].0;
                    rows[i].1 ^= rows[r].1;
                }
            }
            pivots.push(bit);
            r += 1;
        }
        rows.truncate(r);
        Reducer { rows, pivots, rank: r }
    }

    /// Input-row combination producing `target`, if it lies in the span.
    fn express(&self, mut target: u64) -> Option<u64> {
        let mut combo = 0;
        for (row, &bit) in self.rows.iter().zip(&self.pivots) {
            if target >> bit & 1 == 1 {
                target ^= row.0;
                combo ^= row.1;
            }
        }
        (target == 0).then_some(combo)
    }
}

/// Stabilizer generators `K_a = X_a prod_{b in N(a)} Z_b` of a graph state.
pub fn graph_state_tableau(state: &GraphState) -> StabilizerTableau {
    let generators = (0..state.qubit_count())
        .map(|a| PauliString {
            x: 1 << a,
            z: state.neighbor_set(a),
            negative: false,
        })
        .collect();
    StabilizerTableau {
        qubits: state.qubit_count(),
        generators,
    }
}

/// Per-qubit gate sequences, each listed in application order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliffordWord {
    per_qubit: Vec<Vec<Gate>>,
}

impl CliffordWord {
    pub fn identity(qubits: usize) -> Self {
        CliffordWord {
            per_qubit: vec![Vec::new(); qubits],
        }
    }

    pub fn push(&mut self, qubit: usize, gate: Gate) {
        self.per_qubit[qubit].push(gate);
    }

    pub fn gates(&self, qubit: usize) -> &[Gate] {
        &self.per_qubit[qubit]
    }

    pub fn qubit_count(&self) -> usize {
        self.per_qubit.len()
    }

    /// Total number of gate applications before compression.
    pub fn len(&self) -> usize {
        self.per_qubit.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Appends the local-complementation unitary for pivot `a` on `graph`:
    /// `sqrt(-iX)` on `a` and `sqrt(iZ)` on every neighbor of `a`.
    pub fn push_lc(&mut self, graph: &GraphState, a: usize) {
        self.push(a, Gate::SqrtMinusIX);
        for b in graph.neighbors(a) {
            self.push(b, Gate::SqrtIZ);
        }
    }
}

/// Gate word that takes `g_star` back to `target`, given the pivot sequence
/// that maps `target` to `g_star`.
///
/// The pivots are undone in reverse; each undo step uses the neighborhood of
/// the graph current at that step.
pub fn recovery_word(
    target: &GraphState,
    witness: &[VertexId],
    g_star: &GraphState,
) -> Result<CliffordWord, CliffordError> {
    let mut chain = Vec::with_capacity(witness.len() + 1);
    chain.push(target.clone().without_labels());
    for &a in witness {
        let next = chain.last().unwrap().local_complement(a)?;
        chain.push(next);
    }
    if chain.last().unwrap().mask() != g_star.mask()
        || g_star.qubit_count() != target.qubit_count()
    {
        return Err(CliffordError::WitnessInconsistent);
    }
    let mut word = CliffordWord::identity(target.qubit_count());
    for (step, &a) in witness.iter().enumerate().rev() {
        word.push_lc(&chain[step + 1], a.0);
    }
    Ok(word)
}

/// Collapses each qubit's gate list into one group element.
pub fn compress(word: &CliffordWord) -> Vec<SingleQubitClifford> {
    word.per_qubit
        .iter()
        .map(|gates| {
            gates
                .iter()
                .fold(SingleQubitClifford::IDENTITY, |acc, g| compose(acc, g.clifford()))
        })
        .collect()
}

/// Folds stabilizer elements of `target` into a per-qubit recovery.
///
/// A stabilizer `S` of the target satisfies `S|G> = |G>`, so following the
/// recovery by the Pauli letters of any `S` yields the same state. Among all
/// `2^q` group elements the one leaving the fewest non-identity gates wins;
/// ties go to the first in Gray-code order, starting from the identity.
pub fn absorb_stabilizers(compressed: &[SingleQubitClifford], target: &GraphState) -> Vec<SingleQubitClifford> {
    let q = target.qubit_count();
    let tableau = graph_state_tableau(target);
    let cost = |s: &PauliString| {
        (0..q)
            .filter(|&v| !compose(compressed[v], Pauli::plus(s.letter(v)).as_clifford()).is_identity())
            .count()
    };
    let mut current = PauliString {
        x: 0,
        z: 0,
        negative: false,
    };
    let mut best = (cost(&current), current);
    for k in 1u64..1 << q {
        // Gray code: flip the generator at the lowest set bit of k
        let g = &tableau.generators[k.trailing_zeros() as usize];
        current.x ^= g.x;
        current.z ^= g.z;
        let c = cost(&current);
        if c < best.0 {
            best = (c, current);
        }
    }
    (0..q)
        .map(|v| compose(compressed[v], Pauli::plus(best.1.letter(v)).as_clifford()))
        .collect()
}

/// Number of non-identity entries: one native gate each.
pub fn gate_count(compressed: &[SingleQubitClifford]) -> usize {
    compressed.iter().filter(|c| !c.is_identity()).count()
}

/// Checks that `compressed` maps `source` onto `target`.
pub fn verify_recovery(
    source: &GraphState,
    compressed: &[SingleQubitClifford],
    target: &GraphState,
) -> Result<GroupComparison, CliffordError> {
    if source.qubit_count() != target.qubit_count() {
        return Err(CliffordError::LengthMismatch {
            expected: source.qubit_count(),
            got: target.qubit_count(),
        });
    }
    let moved = graph_state_tableau(source).apply_local_cliffords(compressed)?;
    Ok(moved.compare(&graph_state_tableau(target)))
}
