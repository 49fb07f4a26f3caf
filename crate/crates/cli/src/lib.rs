//! Experiment driver for `lcdist`: orbit atlas, annealing gain reports,
//! end-to-end success comparisons, EPR cost tables, single plans and the
//! self-verification suites.
//!
//! Every command returns its output as text so tests can inspect it; the
//! binary only decides where the text goes.

pub mod config;

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use lcdist::annealer::{anneal_multi, objective, AnnealError, SaConfig, Selection};
use lcdist::clifford::gate_count;
use lcdist::graph::{full_mask, GraphError, GraphState};
use lcdist::network::{generate, pair_probabilities, NetworkError, NodeMapping, PhysicalNetwork};
use lcdist::orbit::{full_census, orbit_optimum, LcKernel, Mode, OrbitError};
use lcdist::planner::{self, epr_comparison, PlanError};
use lcdist::rng;
use lcdist::verify::{self, VerifyOptions};

pub use config::{ExperimentConfig, Settings};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Registers up to this size are swept exhaustively instead of sampled.
pub const EXHAUSTIVE_TARGET_QUBITS: usize = 6;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Anneal(#[from] AnnealError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("{0} verification suite(s) failed")]
    Verification(usize),
}

impl CliError {
    /// 1 usage, 2 runtime, 3 verification.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 1,
            CliError::Verification(_) | CliError::Plan(PlanError::RecoveryVerificationFailed) => 3,
            _ => 2,
        }
    }
}

/// A finished command: file name under `--out` and the full file body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub name: String,
    pub body: String,
}

impl Output {
    /// Writes into `dir`, or to stdout when no directory is given.
    pub fn emit(&self, dir: Option<&Path>) -> Result<(), CliError> {
        match dir {
            Some(d) => {
                std::fs::create_dir_all(d)?;
                std::fs::write(d.join(&self.name), &self.body)?;
            }
            None => print!("{}", self.body),
        }
        Ok(())
    }
}

/// Commented preamble recording tool version, command and resolved config.
pub fn header(command: &str, settings: &Settings, notes: &[String]) -> String {
    let mut h = format!("# lcdist {VERSION} {command}\n");
    h.push_str(&settings.header());
    for n in notes {
        let _ = writeln!(h, "# {n}");
    }
    h
}

/// Connected targets on `q` qubits: all of them up to
/// [`EXHAUSTIVE_TARGET_QUBITS`], otherwise `samples` distinct uniform draws.
pub fn targets(q: usize, samples: usize, seed: u64) -> (Vec<GraphState>, String) {
    if q <= EXHAUSTIVE_TARGET_QUBITS {
        let kernel = LcKernel::new(q);
        let all: Vec<GraphState> = (0..=full_mask(q))
            .filter(|&m| kernel.is_connected(m))
            .map(|m| GraphState::from_mask(q, m).expect("mask in range"))
            .collect();
        let note = format!("targets q={q}: all {} connected labeled graphs", all.len());
        return (all, note);
    }
    let mut r = rng::seeded(rng::mix(seed, 0x7461_7267_0000 + q as u64));
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(samples);
    while out.len() < samples {
        let g = verify::random_connected(q, &mut r);
        if seen.insert(g.mask()) {
            out.push(g);
        }
    }
    let note = format!("targets q={q}: {samples} distinct uniform connected labeled graphs (seeded)");
    (out, note)
}

/// Seed of the `t`-th target on `q` qubits.
pub fn target_seed(seed: u64, q: usize, t: usize) -> u64 {
    rng::mix(seed, (q as u64) << 32 | t as u64)
}

/// Network from `network = <file>` if given, otherwise a generated one.
pub fn network(cfg: &ExperimentConfig) -> Result<PhysicalNetwork, CliError> {
    match &cfg.network {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let net: PhysicalNetwork = text.parse()?;
            Ok(net.with_noise(cfg.noise))
        }
        None => Ok(generate(cfg.model, cfg.nodes, cfg.seed, cfg.noise)?),
    }
}

fn model_name(cfg: &ExperimentConfig) -> &'static str {
    if cfg.network.is_some() {
        "file"
    } else {
        cfg.model.name()
    }
}

/// `(q, index, target)` triples in output order, plus sampling notes.
type WorkItems = (Vec<(usize, usize, GraphState)>, Vec<String>);

fn work_items(cfg: &ExperimentConfig, min_q: usize) -> Result<WorkItems, CliError> {
    let mut items = Vec::new();
    let mut notes = Vec::new();
    for &q in &cfg.qubits {
        if q < min_q || q > 8 {
            return Err(CliError::Usage(format!("qubit count {q} outside {min_q}..=8")));
        }
        if q > cfg.nodes {
            return Err(CliError::Usage(format!("{q} qubits do not fit on {} nodes", cfg.nodes)));
        }
        let (ts, note) = targets(q, cfg.samples, cfg.seed);
        notes.push(note);
        items.extend(ts.into_iter().enumerate().map(|(t, g)| (q, t, g)));
    }
    Ok((items, notes))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainRow {
    pub q: usize,
    pub target_mask: u128,
    pub model: &'static str,
    pub seed: u64,
    /// `log10(annealed / direct)` entanglement product.
    pub gain_exponent: f64,
    /// `log10(orbit optimum / annealed)` entanglement product.
    pub gap_exponent: f64,
    pub witness_len: usize,
    pub m2: usize,
}

/// One row per target: annealing gain over the target and gap to the exact
/// orbit optimum, both on the entanglement product.
pub fn gain_rows(cfg: &ExperimentConfig) -> Result<(Vec<GainRow>, Vec<String>), CliError> {
    let net = network(cfg)?;
    let (items, notes) = work_items(cfg, 3)?;
    let model = model_name(cfg);
    let rows = items
        .par_iter()
        .map(|(q, t, target)| {
            let seed = target_seed(cfg.seed, *q, *t);
            let mapping = NodeMapping::random(*q, net.node_count(), seed)?;
            let probs = pair_probabilities(&net, &mapping)?;
            let sa_cfg = SaConfig {
                seed: rng::mix(seed, 1),
                ..cfg.sa
            };
            let sa = anneal_multi(target, &probs, &sa_cfg, Selection::EntanglementProduct)?;
            let direct = objective(target, &probs)?;
            let found = objective(&sa.g_star, &probs)?;
            let (best, _) = orbit_optimum(target, |g| objective(g, &probs).unwrap_or(0.0), Mode::Max)?;
            let optimum = objective(&best, &probs)?;
            let recovery = planner::recovery_gates(target, &sa.g_star, &sa.witness)?;
            Ok(GainRow {
                q: *q,
                target_mask: target.mask(),
                model,
                seed,
                gain_exponent: (found / direct).log10(),
                gap_exponent: (optimum / found).log10(),
                witness_len: sa.witness.len(),
                m2: gate_count(&recovery),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok((rows, notes))
}

pub fn cmd_gain_report(settings: &Settings) -> Result<Output, CliError> {
    let mut settings = settings.clone();
    settings.default_qubits("3..5");
    let cfg = settings.resolve()?;
    let (rows, notes) = gain_rows(&cfg)?;
    let mut body = header("gain-report", &settings, &notes);
    body.push_str("q,target_mask,model,seed,gain_exponent,gap_exponent,witness_len,m2\n");
    for r in &rows {
        let _ = writeln!(
            body,
            "{},{},{},{},{:.12},{:.12},{},{}",
            r.q, r.target_mask, r.model, r.seed, r.gain_exponent, r.gap_exponent, r.witness_len, r.m2
        );
    }
    Ok(Output {
        name: "gain_report.csv".into(),
        body,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdfRow {
    pub q: usize,
    pub target_mask: u128,
    pub p_overall_base: f64,
    pub p_overall_sacc: f64,
}

/// Direct distribution against the annealed plan, both end to end.
pub fn cdf_rows(cfg: &ExperimentConfig) -> Result<(Vec<CdfRow>, Vec<String>), CliError> {
    let net = network(cfg)?;
    let (items, notes) = work_items(cfg, 2)?;
    let rows = items
        .par_iter()
        .map(|(q, t, target)| {
            let seed = target_seed(cfg.seed, *q, *t);
            let mapping = NodeMapping::random(*q, net.node_count(), seed)?;
            let probs = pair_probabilities(&net, &mapping)?;
            let sa_cfg = SaConfig {
                seed: rng::mix(seed, 1),
                ..cfg.sa
            };
            let sa = anneal_multi(target, &probs, &sa_cfg, Selection::EndToEnd(net.noise))?;
            let base = planner::direct_plan(target, &net, &mapping)?;
            let sacc = planner::plan(target, &sa, &net, &mapping)?;
            Ok(CdfRow {
                q: *q,
                target_mask: target.mask(),
                p_overall_base: base.p_overall,
                p_overall_sacc: sacc.p_overall,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok((rows, notes))
}

pub fn cmd_cdf_compare(settings: &Settings) -> Result<Output, CliError> {
    let mut settings = settings.clone();
    settings.default_qubits("6");
    let cfg = settings.resolve()?;
    let (rows, notes) = cdf_rows(&cfg)?;
    let mut body = header("cdf-compare", &settings, &notes);
    body.push_str("p_overall_base,p_overall_sacc\n");
    for r in &rows {
        let _ = writeln!(body, "{:.12e},{:.12e}", r.p_overall_base, r.p_overall_sacc);
    }
    Ok(Output {
        name: "cdf_compare.csv".into(),
        body,
    })
}

/// Population standard deviation.
pub fn spread(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

pub fn cmd_atlas(settings: &Settings) -> Result<Output, CliError> {
    let mut settings = settings.clone();
    settings.default_qubits("3..6");
    let cfg = settings.resolve()?;
    let mut body = header("atlas", &settings, &[]);
    let mut first = true;
    for &q in &cfg.qubits {
        let census = full_census(q)?;
        let csv = census.to_csv();
        // the column header appears once
        let rows = if first { &csv[..] } else { csv.split_once('\n').map_or("", |x| x.1) };
        body.push_str(rows);
        first = false;
    }
    Ok(Output {
        name: "atlas.csv".into(),
        body,
    })
}

pub fn cmd_epr_compare(settings: &Settings) -> Result<Output, CliError> {
    let mut settings = settings.clone();
    settings.default_qubits("8");
    let cfg = settings.resolve()?;
    let max = *cfg.qubits.iter().max().expect("non-empty list");
    let mut body = header("epr-compare", &settings, &[]);
    body.push_str("q,ours,edcg,reduction_pct\n");
    for row in epr_comparison(max)? {
        let _ = writeln!(body, "{},{},{},{:.2}", row.qubits, row.ours, row.edcg, 100.0 * row.reduction);
    }
    Ok(Output {
        name: "epr_compare.csv".into(),
        body,
    })
}

/// Plans one target end to end. The target comes from `target = <file>`;
/// without one a seeded random connected state on `qubits` is used. Node
/// labels in the target file fix the mapping, otherwise it is drawn.
pub fn cmd_run_sa(settings: &Settings) -> Result<Vec<Output>, CliError> {
    let mut settings = settings.clone();
    settings.default_qubits("6");
    let cfg = settings.resolve()?;
    let net = network(&cfg)?;
    let target = match &cfg.target {
        Some(path) => std::fs::read_to_string(path)?.parse::<GraphState>()?,
        None => {
            let q = cfg.qubits[0];
            if !(2..=lcdist::graph::MAX_QUBITS).contains(&q) {
                return Err(CliError::Usage(format!("qubit count {q} outside 2..=16")));
            }
            verify::random_connected(q, &mut rng::seeded(rng::mix(cfg.seed, 0x0072_756e)))
        }
    };
    let q = target.qubit_count();
    let mapping = match target.labels() {
        Some(l) => NodeMapping::new(l.iter().map(|&n| n as usize).collect(), net.node_count())?,
        None => NodeMapping::random(q, net.node_count(), cfg.seed)?,
    };
    let target = target.without_labels();
    let probs = pair_probabilities(&net, &mapping)?;
    let sa = anneal_multi(&target, &probs, &cfg.sa, Selection::EndToEnd(net.noise))?;
    let plan = planner::plan(&target, &sa, &net, &mapping)?;
    let nodes: Vec<String> = mapping.nodes().iter().map(|n| n.to_string()).collect();
    let mut body = header("run-sa", &settings, &[format!("mapping {}", nodes.join(" "))]);
    body.push_str("[target]\n");
    body.push_str(&target.to_string());
    body.push_str(&plan.to_string());
    Ok(vec![
        Output {
            name: "plan.txt".into(),
            body,
        },
        Output {
            name: "network.txt".into(),
            body: format!("{}{}", header("network", &settings, &[]), net),
        },
    ])
}

/// Runs the property suites. Any failing suite turns into exit code 3.
pub fn cmd_verify(settings: &Settings, inject_fault: bool) -> Result<(Output, bool), CliError> {
    let cfg = settings.resolve()?;
    let opts = VerifyOptions {
        seed: cfg.seed,
        cases: cfg.cases,
        census_qubits: cfg.census_qubits,
        inject_fault,
        ..VerifyOptions::default()
    };
    let reports = verify::run_all(&opts);
    let mut body = header("verify", settings, &[]);
    for r in &reports {
        let _ = writeln!(body, "{r}");
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    let _ = writeln!(body, "{} of {} suites passed", reports.len() - failed, reports.len());
    Ok((
        Output {
            name: "verify.txt".into(),
            body,
        },
        failed == 0,
    ))
}
