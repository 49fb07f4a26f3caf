use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lcdist_cli::{CliError, Settings};

#[derive(Parser)]
#[command(name = "lcdist", version, about = "Plan graph-state distribution over fiber networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Flat `key = value` config file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// A count (6), list (3,4,6) or inclusive range (3..5).
    #[arg(long, global = true)]
    qubits: Option<String>,
    /// er, ba or ws.
    #[arg(long, global = true)]
    model: Option<String>,
    #[arg(long, global = true)]
    nodes: Option<usize>,
    /// Output directory; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// endpoint or midpoint.
    #[arg(long, global = true)]
    detection: Option<String>,
    #[arg(long, global = true)]
    restarts: Option<usize>,
    /// Sampled targets per register size above 6 qubits.
    #[arg(long, global = true)]
    samples: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// LC orbit census, one row per iso-class.
    Atlas(Common),
    /// Annealing gain and gap to the orbit optimum per target.
    GainReport(Common),
    /// End-to-end success of direct and annealed distribution per target.
    CdfCompare(Common),
    /// EPR pairs against the EDCG baseline.
    EprCompare(Common),
    /// Full distribution plan for a single target.
    RunSa {
        #[command(flatten)]
        common: Common,
        /// Graph file with `q=`, `edge u v` and optional `map v node` lines.
        #[arg(long)]
        target: Option<PathBuf>,
        /// Network file with `nodes N` and `link u v len` lines.
        #[arg(long)]
        network: Option<PathBuf>,
    },
    /// Property suites.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Fuzzed witnesses per register size.
        #[arg(long)]
        cases: Option<usize>,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

fn settings(common: &Common, extra: &[(&str, Option<String>)]) -> Result<Settings, CliError> {
    let mut s = Settings::default();
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        s.apply_file(&text)?;
    }
    let flags = [
        ("seed", common.seed.map(|v| v.to_string())),
        ("qubits", common.qubits.clone()),
        ("model", common.model.clone()),
        ("nodes", common.nodes.map(|v| v.to_string())),
        ("out", common.out.as_ref().map(|p| p.display().to_string())),
        ("detection", common.detection.clone()),
        ("restarts", common.restarts.map(|v| v.to_string())),
        ("samples", common.samples.map(|v| v.to_string())),
    ];
    for (k, v) in flags.iter().chain(extra) {
        if let Some(v) = v {
            s.set(k, v)?;
        }
    }
    Ok(s)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
    let (s, outputs) = match &cli.command {
        Command::Atlas(c) => {
            let s = settings(c, &[])?;
            let o = lcdist_cli::cmd_atlas(&s)?;
            (s, vec![o])
        }
        Command::GainReport(c) => {
            let s = settings(c, &[])?;
            let o = lcdist_cli::cmd_gain_report(&s)?;
            (s, vec![o])
        }
        Command::CdfCompare(c) => {
            let s = settings(c, &[])?;
            let o = lcdist_cli::cmd_cdf_compare(&s)?;
            (s, vec![o])
        }
        Command::EprCompare(c) => {
            let s = settings(c, &[])?;
            let o = lcdist_cli::cmd_epr_compare(&s)?;
            (s, vec![o])
        }
        Command::RunSa { common, target, network } => {
            let s = settings(common, &[("target", path(target)), ("network", path(network))])?;
            let mut outs = lcdist_cli::cmd_run_sa(&s)?;
            if s.get("out").is_empty() {
                // only the plan goes to stdout
                outs.truncate(1);
            }
            (s, outs)
        }
        Command::Verify {
            common,
            cases,
            inject_fault,
        } => {
            let s = settings(common, &[("cases", cases.map(|v| v.to_string()))])?;
            let (o, passed) = lcdist_cli::cmd_verify(&s, *inject_fault)?;
            o.emit(dir(&s))?;
            if !passed {
                return Err(CliError::Verification(
                    o.body.lines().filter(|l| l.starts_with("FAIL")).count(),
                ));
            }
            return Ok(());
        }
    };
    for o in &outputs {
        o.emit(dir(&s))?;
    }
    Ok(())
}

fn dir(s: &Settings) -> Option<&std::path::Path> {
    Some(s.get("out")).filter(|v| !v.is_empty()).map(std::path::Path::new)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
