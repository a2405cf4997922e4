//! `qsynth`: command-line front end; every verb is a request to the service.
//!
//! Exit codes: 0 success, 1 an experiment check failed, 2 any error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use qsynth_client::{Client, ClientError, DEFAULT_SERVER};
use qsynth_core::api::{failed_checks, ApproxRequest, EnumerateRequest, ExactSynthRequest, MatrixInput};
use qsynth_core::experiments::{Check, ExperimentFile};
use qsynth_core::gates::GateSet;

#[derive(Parser)]
#[command(name = "qsynth", about = "Client for the single-qubit synthesis service")]
struct Cli {
    /// Service base URL.
    #[arg(long, global = true, env = "QSYNTH_SERVER", default_value = DEFAULT_SERVER)]
    server: String,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact or approximate deterministic synthesis.
    #[command(subcommand)]
    Synth(Synth),
    /// Optimal mixed-unitary synthesis.
    ProbSynth(ApproxArgs),
    /// Writes the integer sphere points of one level as CSV.
    Enumerate {
        #[arg(long)]
        set: GateSet,
        #[arg(long)]
        level: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Runs an experiment suite from a config file.
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Subcommand)]
enum Synth {
    /// Exact synthesis of a matrix (`--entries` and `--scale`) or of a quaternion point (`--point`).
    Exact {
        #[arg(long)]
        set: GateSet,
        /// Four comma-separated Z[ζ₈] entries, row-major, e.g. `1,0,0,z`.
        #[arg(long, requires = "scale", conflicts_with = "point")]
        entries: Option<String>,
        /// The matrix is `entries / √scale`; scale in Z[√2] form, e.g. `2` or `2+w2`.
        #[arg(long)]
        scale: Option<String>,
        /// Four comma-separated Z[√2] coordinates.
        #[arg(long)]
        point: Option<String>,
        /// Also write the word to this `.gseq` file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimal G-count ε-approximation.
    Approx(ApproxArgs),
}

#[derive(Args)]
struct ApproxArgs {
    /// `q:(a,b,c,d)`, `rz:θ`, `point:a,b,c,d` or `edge:NAME`.
    #[arg(long)]
    target: String,
    #[arg(long)]
    set: GateSet,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    budget: u32,
}

impl ApproxArgs {
    fn request(&self) -> ApproxRequest {
        ApproxRequest { target: self.target.clone(), set: self.set, eps: self.eps, budget: self.budget }
    }
}

#[derive(Subcommand)]
enum Experiment {
    /// G-count scaling over targets × ε grid; writes CSV and `{target_id: slope}` JSON.
    Scaling {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `[output] csv`.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Overrides `[output] summary`.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Liouville-type sequence with exact certificates (`[liouville]` section).
    Liouville {
        #[arg(long)]
        config: PathBuf,
    },
    /// Covering radius trend (`[covering]` section).
    Covering {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug)]
enum Failure {
    Client(ClientError),
    Other(String),
}

impl From<ClientError> for Failure {
    fn from(e: ClientError) -> Self {
        Failure::Client(e)
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Client(e) => write!(f, "{e}"),
            Failure::Other(s) => write!(f, "{s}"),
        }
    }
}

fn other(e: impl std::fmt::Display) -> Failure {
    Failure::Other(e.to_string())
}

fn print_json<T: Serialize>(v: &T) -> Result<(), Failure> {
    println!("{}", serde_json::to_string_pretty(v).map_err(other)?);
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| other(format!("creating {}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| other(format!("writing {}: {e}", path.display())))
}

fn four(list: &str, what: &str) -> Result<[String; 4], Failure> {
    let v: Vec<String> = list.split(',').map(|s| s.trim().to_string()).collect();
    v.try_into().map_err(|_| other(format!("--{what} needs exactly four comma-separated values")))
}

fn load_config(path: &Path) -> Result<ExperimentFile, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| other(format!("reading {}: {e}", path.display())))?;
    ExperimentFile::parse(&text).map_err(other)
}

fn report_checks(checks: &[Check]) -> bool {
    for c in failed_checks(checks) {
        eprintln!("check failed: {}: {}", c.name, c.detail);
    }
    checks.iter().all(|c| c.passed)
}

async fn run(cli: Cli) -> Result<bool, Failure> {
    let client = Client::new(cli.server);
    match cli.cmd {
        Command::Synth(Synth::Exact { set, entries, scale, point, out }) => {
            let matrix = match (entries, scale) {
                (Some(e), Some(s)) => Some(MatrixInput { entries: four(&e, "entries")?, scale: s }),
                _ => None,
            };
            let point = point.map(|p| four(&p, "point")).transpose()?;
            let r = client.synth_exact(&ExactSynthRequest { set, matrix, point }).await?;
            if let Some(path) = out {
                write_file(&path, &format!("{}\n", r.word))?;
            }
            print_json(&r)?;
        }
        Command::Synth(Synth::Approx(a)) => print_json(&client.synth_approx(&a.request()).await?)?,
        Command::ProbSynth(a) => print_json(&client.prob_synth(&a.request()).await?)?,
        Command::Enumerate { set, level, out } => {
            let r = client.enumerate(&EnumerateRequest { set, level }).await?;
            write_file(&out, &r.csv)?;
            print_json(&serde_json::json!({ "set": r.set, "level": r.level, "count": r.count }))?;
        }
        Command::Experiment(Experiment::Scaling { config, csv, summary }) => {
            let file = load_config(&config)?;
            let mut cfg = file.scaling().map_err(other)?;
            let csv = csv.or(cfg.output.csv.take());
            let summary = summary.or(cfg.output.summary.take());
            let r = client.experiment_scaling(&cfg).await?;
            if let Some(p) = &csv {
                write_file(p, &r.csv)?;
            }
            match &summary {
                Some(p) => write_file(p, &r.summary)?,
                None => println!("{}", r.summary),
            }
            return Ok(report_checks(&r.report.checks));
        }
        Command::Experiment(Experiment::Liouville { config }) => {
            let cfg = load_config(&config)?.liouville().map_err(other)?;
            let r = client.experiment_liouville(&cfg).await?;
            print_json(&r.report)?;
            return Ok(report_checks(&r.report.checks));
        }
        Command::Experiment(Experiment::Covering { config }) => {
            let cfg = load_config(&config)?.covering().map_err(other)?;
            let r = client.experiment_covering(&cfg).await?;
            print_json(&r.report)?;
            return Ok(report_checks(&r.report.checks));
        }
    }
    Ok(true)
}

#[tokio::main]
async fn main() -> ExitCode {
    match run(Cli::parse()).await {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
