//! Planning the distribution of labeled graph states over lossy fiber
//! networks.
//!
//! Instead of building a target graph state edge by edge, the planner looks
//! for a cheaper state in the target's local-complementation orbit, builds
//! that one from routed EPR pairs and fusions, and then recovers the target
//! with one single-qubit Clifford gate per qubit.
//!
//! * [`graph`]: graph states and rewrite rules (LC, measurements, fusion).
//! * [`clifford`]: single-qubit Clifford group, stabilizer tableaus, recovery.
//! * [`orbit`]: exact orbit enumeration and the labeled orbit census.
//! * [`network`]: fiber topologies, link success model and routing.
//! * [`annealer`]: simulated annealing over LC moves.
//! * [`planner`]: distribution plans and EPR cost accounting.
//! * [`verify`]: property suites used by the `verify` command.

pub mod annealer;
pub mod clifford;
pub mod graph;
pub mod network;
pub mod orbit;
pub mod planner;
pub mod rng;
pub mod verify;

pub use annealer::{anneal, anneal_multi, SaConfig, SaResult, Selection};
pub use clifford::{CliffordWord, SingleQubitClifford, StabilizerTableau};
pub use graph::{GraphError, GraphState, VertexId};
pub use network::{NodeMapping, NoiseParams, PairProbabilities, PhysicalNetwork};
pub use orbit::{Orbit, OrbitCensus};
pub use planner::DistributionPlan;
