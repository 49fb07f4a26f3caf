//! Simulated annealing over local-complementation moves.
//!
//! The search maximizes the product of elementary pair success probabilities
//! over the edges of the current state (it minimizes the negated product).
//! Accepted pivots are recorded in order so the target can be recovered
//! from whichever state is returned.

use rand::RngCore;
use thiserror::Error;

use crate::graph::{GraphError, GraphState, VertexId};
use crate::network::{NoiseParams, PairProbabilities};
use crate::planner::{self, PlanError};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnnealError {
    #[error("target state is disconnected")]
    Disconnected,
    #[error("target needs at least 2 qubits, got {0}")]
    TooSmall(usize),
    #[error("probability matrix covers {have} qubits, state has {need}")]
    MissingPair { have: usize, need: usize },
    #[error("invalid annealing schedule: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Plan(#[from] Box<PlanError>),
}

/// Cooling schedule and restart count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaConfig {
    pub t0: f64,
    pub tn: f64,
    pub beta: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SaConfig {
    fn default() -> Self {
        SaConfig {
            t0: 1.0,
            tn: 1e-3,
            beta: 0.99,
            restarts: 5,
            seed: 0,
        }
    }
}

impl SaConfig {
    pub fn validate(&self) -> Result<(), AnnealError> {
        if !(self.t0 > self.tn && self.tn > 0.0) {
            return Err(AnnealError::InvalidConfig(format!(
                "need t0 > tn > 0, got t0 = {}, tn = {}",
                self.t0, self.tn
            )));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(AnnealError::InvalidConfig(format!("beta = {} outside (0, 1)", self.beta)));
        }
        if self.restarts == 0 {
            return Err(AnnealError::InvalidConfig("restarts must be at least 1".into()));
        }
        Ok(())
    }

    /// `ceil(log(tn / t0) / log(beta))`.
    pub fn iterations(&self) -> usize {
        ((self.tn / self.t0).ln() / self.beta.ln()).ceil() as usize
    }

    /// Seed of restart `i`.
    pub fn restart_seed(&self, i: usize) -> u64 {
        self.seed ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub temperature: f64,
    /// Product of the state current after this step.
    pub objective: f64,
    pub pivot: usize,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaResult {
    pub g_star: GraphState,
    /// Accepted pivots from the target up to `g_star`, in order.
    pub witness: Vec<VertexId>,
    pub objective: f64,
    pub trace: Vec<TraceStep>,
    pub best_is_initial: bool,
}

impl SaResult {
    /// The target itself with no moves applied.
    pub fn identity(target: &GraphState, probs: &PairProbabilities) -> Result<Self, AnnealError> {
        Ok(SaResult {
            g_star: target.clone(),
            witness: Vec::new(),
            objective: objective(target, probs)?,
            trace: Vec::new(),
            best_is_initial: true,
        })
    }
}

/// Product of pair probabilities over the edges of `state`.
pub fn objective(state: &GraphState, probs: &PairProbabilities) -> Result<f64, AnnealError> {
    if probs.size() < state.qubit_count() {
        return Err(AnnealError::MissingPair {
            have: probs.size(),
            need: state.qubit_count(),
        });
    }
    Ok(state.edges().map(|(i, j)| probs.get(i, j)).product())
}

/// Metropolis rule on the negated products `p1` (proposal) and `p2` (current).
#[inline]
pub fn accepts(p1: f64, p2: f64, t: f64, r: f64) -> bool {
    let delta = p1 - p2;
    delta < 0.0 || r < (-delta / t).exp()
}

fn check_target(target: &GraphState, probs: &PairProbabilities) -> Result<(), AnnealError> {
    if target.qubit_count() < 2 {
        return Err(AnnealError::TooSmall(target.qubit_count()));
    }
    if !target.is_connected() {
        return Err(AnnealError::Disconnected);
    }
    objective(target, probs).map(|_| ())
}

/// One annealing run seeded with `config.seed`.
pub fn anneal(target: &GraphState, probs: &PairProbabilities, config: &SaConfig) -> Result<SaResult, AnnealError> {
    let mut rng = rng::seeded(config.seed);
    anneal_with_rng(target, probs, config, &mut rng)
}

/// One annealing run drawing from `rng`.
///
/// Each iteration draws the pivot, then the uniform `r`, whether or not the
/// move improves. The best state seen (first one on ties) is returned
/// together with the witness prefix that reaches it.
pub fn anneal_with_rng<R: RngCore + ?Sized>(
    target: &GraphState,
    probs: &PairProbabilities,
    config: &SaConfig,
    rng: &mut R,
) -> Result<SaResult, AnnealError> {
    config.validate()?;
    check_target(target, probs)?;
    let q = target.qubit_count();
    let mut current = target.clone();
    let mut current_obj = objective(&current, probs)?;
    let mut witness = Vec::new();
    let mut best = (current_obj, 0usize, current.clone());
    let mut trace = Vec::with_capacity(config.iterations());
    let mut t = config.t0;
    while t > config.tn {
        let next_t = config.beta * t;
        let a = rng::index(rng, q);
        let proposal = current.local_complement(VertexId(a))?;
        let proposal_obj = objective(&proposal, probs)?;
        let r = rng::unit(rng);
        let accepted = accepts(-proposal_obj, -current_obj, t, r);
        if accepted {
            current = proposal;
            current_obj = proposal_obj;
            witness.push(VertexId(a));
            if current_obj > best.0 {
                best = (current_obj, witness.len(), current.clone());
            }
        }
        trace.push(TraceStep {
            temperature: t,
            objective: current_obj,
            pivot: a,
            accepted,
        });
        t = next_t;
    }
    let (objective, prefix, g_star) = best;
    witness.truncate(prefix);
    Ok(SaResult {
        g_star,
        witness,
        objective,
        trace,
        best_is_initial: prefix == 0,
    })
}

/// How restarts are ranked against each other and against the target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Selection {
    /// Pair-probability product only.
    EntanglementProduct,
    /// Full distribution success including fusion and recovery gates.
    EndToEnd(NoiseParams),
}

/// Independent restarts plus the no-move candidate; the best one wins.
///
/// Candidates are ranked by score, then by position: the unmodified target
/// first, then restarts in order.
pub fn anneal_multi(
    target: &GraphState,
    probs: &PairProbabilities,
    config: &SaConfig,
    selection: Selection,
) -> Result<SaResult, AnnealError> {
    config.validate()?;
    check_target(target, probs)?;
    let score = |r: &SaResult| -> Result<f64, AnnealError> {
        match selection {
            Selection::EntanglementProduct => Ok(r.objective),
            Selection::EndToEnd(noise) => {
                planner::end_to_end_probability(target, &r.g_star, &r.witness, probs, &noise)
                    .map_err(|e| AnnealError::Plan(Box::new(e)))
            }
        }
    };
    let mut best = SaResult::identity(target, probs)?;
    let mut best_score = score(&best)?;
    for i in 0..config.restarts {
        let run = anneal(target, probs, &SaConfig { seed: config.restart_seed(i), ..*config })?;
        let s = score(&run)?;
        if s > best_score {
            best_score = s;
            best = run;
        }
    }
    best.best_is_initial = best.witness.is_empty() && best.g_star.mask() == target.mask();
    Ok(best)
}
