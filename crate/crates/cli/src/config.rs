//! Flat `key = value` experiment configuration.
//!
//! Settings are layered: built-in defaults, then the config file, then
//! command-line flags. Every key is validated before any work starts.

use std::collections::BTreeMap;
use std::path::PathBuf;

use lcdist::annealer::SaConfig;
use lcdist::network::{Detection, NoiseParams, TopologyModel};

use crate::CliError;

/// Every recognised key with its default value.
pub const KEYS: &[(&str, &str)] = &[
    ("model", "er"),
    ("nodes", "12"),
    ("seed", "0"),
    ("qubits", ""),
    ("samples", "100"),
    ("restarts", "5"),
    ("t0", "1"),
    ("tn", "0.001"),
    ("beta", "0.99"),
    ("er_p", "0.3"),
    ("ba_m", "2"),
    ("ws_k", "4"),
    ("ws_p", "0.1"),
    ("detection", "endpoint"),
    ("bsm_per_hop", "false"),
    ("eta1", "0.9"),
    ("alpha", "0.2"),
    ("epsilon_d", "0.1"),
    ("p_bsm", "0.5"),
    ("f_dc", "1000"),
    ("epsilon_1g", "0.01"),
    ("epsilon_2g", "0.05"),
    ("p_y_msr", "0.99"),
    ("cases", "1000"),
    ("census_qubits", "8"),
    ("out", ""),
    ("target", ""),
    ("network", ""),
];

/// Raw settings after layering, kept for the output header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Settings(BTreeMap<String, String>);

impl Default for Settings {
    fn default() -> Self {
        Settings(KEYS.iter().map(|&(k, v)| (k.to_string(), v.to_string())).collect())
    }
}

impl Settings {
    /// Overrides one key. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match self.0.get_mut(key) {
            Some(slot) => {
                *slot = value.trim().to_string();
                Ok(())
            }
            None => Err(CliError::Usage(format!("unknown config key `{key}`"))),
        }
    }

    /// Applies a config file body.
    pub fn apply_file(&mut self, text: &str) -> Result<(), CliError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| CliError::Config {
                line: n + 1,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            self.set(k.trim(), v).map_err(|e| CliError::Config {
                line: n + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> &str {
        self.0.get(key).map(String::as_str).unwrap_or("")
    }

    /// Fills `qubits` when neither file nor flags set it.
    pub fn default_qubits(&mut self, value: &str) {
        if self.get("qubits").is_empty() {
            self.0.insert("qubits".into(), value.into());
        }
    }

    /// `# key = value` lines in key order.
    pub fn header(&self) -> String {
        self.0.iter().map(|(k, v)| format!("# {k} = {v}\n")).collect()
    }

    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        ExperimentConfig::from_settings(self)
    }
}

fn parse<T: std::str::FromStr>(s: &Settings, key: &str) -> Result<T, CliError> {
    let v = s.get(key);
    v.parse()
        .map_err(|_| CliError::Usage(format!("invalid value `{v}` for `{key}`")))
}

fn parse_bool(s: &Settings, key: &str) -> Result<bool, CliError> {
    match s.get(key) {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        v => Err(CliError::Usage(format!("invalid value `{v}` for `{key}`"))),
    }
}

fn optional_path(s: &Settings, key: &str) -> Option<PathBuf> {
    Some(s.get(key)).filter(|v| !v.is_empty()).map(PathBuf::from)
}

/// Parses `6`, `3,4,6`, `3..5` or `3-5` (ranges are inclusive).
pub fn parse_qubits(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Usage(format!("invalid qubit list `{text}`"));
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let range = part.split_once("..").or_else(|| part.split_once('-'));
        match range {
            Some((a, b)) => {
                let a: usize = a.trim().parse().map_err(|_| bad())?;
                let b: usize = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

/// Fully validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: TopologyModel,
    pub nodes: usize,
    pub seed: u64,
    pub qubits: Vec<usize>,
    /// Sampled targets per register size above 6 qubits.
    pub samples: usize,
    pub sa: SaConfig,
    pub noise: NoiseParams,
    pub cases: usize,
    /// Largest census swept by the fusion suite of `verify`.
    pub census_qubits: usize,
    pub out: Option<PathBuf>,
    pub target: Option<PathBuf>,
    pub network: Option<PathBuf>,
}

impl ExperimentConfig {
    fn from_settings(s: &Settings) -> Result<Self, CliError> {
        let model = match s.get("model") {
            "er" => TopologyModel::Er { p: parse(s, "er_p")? },
            "ba" => TopologyModel::Ba { m: parse(s, "ba_m")? },
            "ws" => TopologyModel::Ws {
                k: parse(s, "ws_k")?,
                p: parse(s, "ws_p")?,
            },
            m => return Err(CliError::Usage(format!("unknown model `{m}` (expected er, ba or ws)"))),
        };
        let detection: Detection = s
            .get("detection")
            .parse()
            .map_err(|_| CliError::Usage(format!("invalid detection `{}`", s.get("detection"))))?;
        let noise = NoiseParams {
            eta1: parse(s, "eta1")?,
            alpha: parse(s, "alpha")?,
            epsilon_d: parse(s, "epsilon_d")?,
            p_bsm: parse(s, "p_bsm")?,
            f_dc: parse(s, "f_dc")?,
            epsilon_1g: parse(s, "epsilon_1g")?,
            epsilon_2g: parse(s, "epsilon_2g")?,
            p_y_msr: parse(s, "p_y_msr")?,
            detection,
            bsm_per_hop: parse_bool(s, "bsm_per_hop")?,
        };
        noise.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        let seed = parse(s, "seed")?;
        let sa = SaConfig {
            t0: parse(s, "t0")?,
            tn: parse(s, "tn")?,
            beta: parse(s, "beta")?,
            restarts: parse(s, "restarts")?,
            seed,
        };
        sa.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        let qubits = match s.get("qubits") {
            "" => Vec::new(),
            q => parse_qubits(q)?,
        };
        let cfg = ExperimentConfig {
            model,
            nodes: parse(s, "nodes")?,
            seed,
            qubits,
            samples: parse(s, "samples")?,
            sa,
            noise,
            cases: parse(s, "cases")?,
            census_qubits: parse(s, "census_qubits")?,
            out: optional_path(s, "out"),
            target: optional_path(s, "target"),
            network: optional_path(s, "network"),
        };
        if cfg.nodes < 2 {
            return Err(CliError::Usage(format!("nodes = {} must be at least 2", cfg.nodes)));
        }
        if !(3..=8).contains(&cfg.census_qubits) {
            return Err(CliError::Usage(format!("census_qubits = {} outside 3..=8", cfg.census_qubits)));
        }
        if cfg.samples == 0 || cfg.cases == 0 {
            return Err(CliError::Usage("samples and cases must be at least 1".into()));
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let cfg = Settings::default().resolve().unwrap();
        assert_eq!(cfg.nodes, 12);
        assert_eq!(cfg.sa, SaConfig::default());
        assert_eq!(cfg.noise, NoiseParams::default());
        assert_eq!(cfg.model, TopologyModel::Er { p: 0.3 });
    }

    #[test]
    fn file_then_flags() {
        let mut s = Settings::default();
        s.apply_file("# comment\nmodel = ba\nseed = 9  # trailing\n\nrestarts=2\n").unwrap();
        s.set("seed", "11").unwrap();
        let cfg = s.resolve().unwrap();
        assert_eq!(cfg.model, TopologyModel::Ba { m: 2 });
        assert_eq!((cfg.seed, cfg.sa.restarts, cfg.sa.seed), (11, 2, 11));
        assert!(s.header().contains("# model = ba\n"));
    }

    #[test]
    fn rejects_bad_input() {
        let mut s = Settings::default();
        assert!(matches!(s.apply_file("colour = red"), Err(CliError::Config { line: 1, .. })));
        assert!(s.apply_file("model ba").is_err());
        s.set("model", "tree").unwrap();
        assert!(s.resolve().is_err());
        let mut s = Settings::default();
        s.set("beta", "1.5").unwrap();
        assert!(s.resolve().is_err());
        let mut s = Settings::default();
        s.set("p_bsm", "2").unwrap();
        assert!(s.resolve().is_err());
    }

    #[test]
    fn qubit_lists() {
        assert_eq!(parse_qubits("6").unwrap(), vec![6]);
        assert_eq!(parse_qubits("3..5").unwrap(), vec![3, 4, 5]);
        assert_eq!(parse_qubits("3-4, 7").unwrap(), vec![3, 4, 7]);
        assert!(parse_qubits("5..3").is_err());
        assert!(parse_qubits("x").is_err());
    }
}
