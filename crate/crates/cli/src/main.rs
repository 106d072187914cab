use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::warn;
use serde::Serialize;
use serde_json::Value;

use rforge_core::lab::{DEFAULT_PROBE_COUNT, DEFAULT_PROBE_SEED};
use rforge_core::Error;

mod commands;

#[derive(Parser, Debug)]
#[command(
    name = "rforge",
    version,
    about = "Deterministic spectral sparsification and related reductions"
)]
struct Cli {
    /// Seed for random probe configurations.
    #[arg(long, global = true, default_value_t = DEFAULT_PROBE_SEED)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Add wall-clock time to the report.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sparsify a weighted graph given as an edge list.
    SparsifyGraph(SparsifyGraphArgs),
    /// Reweight a frame (rows of a dense matrix) to a sparse near-isotropic one.
    SparsifyFrame(SparsifyFrameArgs),
    /// Select a well-conditioned column subset of a linear map.
    RiSelect(RiSelectArgs),
    /// Embed points of l1^d into low-dimensional l1.
    EmbedL1(EmbedL1Args),
    /// Reduce the coordinates carrying a subspace of l_p^m, p even.
    EmbedLp(EmbedLpArgs),
    /// Sparsify a John decomposition of the identity.
    JohnApprox(JohnApproxArgs),
    /// Measure the quality of one graph as a sparsifier of another.
    Verify(VerifyArgs),
    /// Show that p-sparsifiers need not be q-sparsifiers for q > p.
    CycleDemo(CycleDemoArgs),
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not in (0, 1)"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} is not positive"))
    }
}

#[derive(Args, Debug)]
pub struct SparsifyGraphArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_parser = unit_interval)]
    pub eps: f64,
}

#[derive(Args, Debug)]
pub struct SparsifyFrameArgs {
    /// Dense matrix whose rows are the frame vectors.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Weights file; the certificate goes to `<output>.cert.json`.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_parser = unit_interval)]
    pub eps: f64,
}

#[derive(Args, Debug)]
pub struct RiSelectArgs {
    /// Dense matrix `T` with one column per frame vector.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Frame vectors as rows; defaults to the standard basis.
    #[arg(long)]
    pub frame: Option<PathBuf>,
    /// Selected indices, one per line.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_parser = unit_interval)]
    pub eps: f64,
}

#[derive(Args, Debug)]
pub struct EmbedL1Args {
    /// Dense matrix whose rows are the points.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Embedded points as a dense matrix.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_parser = unit_interval)]
    pub eps: f64,
}

#[derive(Args, Debug)]
pub struct EmbedLpArgs {
    /// Dense `m x n` matrix whose columns span the subspace.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Weights file; the certificate goes to `<output>.cert.json`.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub p: usize,
    #[arg(long, value_parser = unit_interval)]
    pub eps: f64,
    /// Random unit vectors of the subspace on which to sample distortion.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
}

#[derive(Args, Debug)]
pub struct JohnApproxArgs {
    /// Rows `c_i x_i1 ... x_in`.
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_parser = unit_interval)]
    pub eps: f64,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub g: PathBuf,
    #[arg(long)]
    pub h: PathBuf,
    /// Energy exponent; 2 gives the exact spectral certificate, any other
    /// value a probe-based lower bound.
    #[arg(long, default_value_t = 2.0, value_parser = positive)]
    pub p: f64,
    /// Fail unless the quality is within `((1 + eps) / (1 - eps))^2`.
    #[arg(long, value_parser = unit_interval)]
    pub eps: Option<f64>,
    /// Probe configurations as rows of a dense matrix.
    #[arg(long)]
    pub probes: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_PROBE_COUNT)]
    pub probe_count: usize,
}

#[derive(Args, Debug)]
pub struct CycleDemoArgs {
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long, default_value_t = 2.0, value_parser = positive)]
    pub p: f64,
    #[arg(long, default_value_t = 4.0, value_parser = positive)]
    pub q: f64,
    #[arg(long, default_value_t = 0.5, value_parser = positive)]
    pub eps: f64,
    #[arg(long, default_value_t = DEFAULT_PROBE_COUNT)]
    pub probe_count: usize,
}

#[derive(Serialize)]
struct Report {
    command: &'static str,
    status: &'static str,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_clock_seconds: Option<f64>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::SparsifyGraph(_) => "sparsify-graph",
            Command::SparsifyFrame(_) => "sparsify-frame",
            Command::RiSelect(_) => "ri-select",
            Command::EmbedL1(_) => "embed-l1",
            Command::EmbedLp(_) => "embed-lp",
            Command::JohnApprox(_) => "john-approx",
            Command::Verify(_) => "verify",
            Command::CycleDemo(_) => "cycle-demo",
        }
    }
}

/// 1 for failed certificates and numerical breakdowns, 2 for bad input.
fn exit_status(e: &Error) -> u8 {
    match e {
        Error::Certification(_)
        | Error::InvariantViolation { .. }
        | Error::NoFeasibleCandidate { .. }
        | Error::NoConvergence { .. }
        | Error::NotPositiveDefinite { .. }
        | Error::SingularUpdate { .. } => 1,
        _ => 2,
    }
}

fn configure_threads() {
    let Ok(v) = std::env::var("RFORGE_THREADS") else {
        return;
    };
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                warn!("could not size the thread pool: {e}");
            }
        }
        _ => warn!("ignoring RFORGE_THREADS={v:?}"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    configure_threads();

    let start = Instant::now();
    let outcome = match &cli.command {
        Command::SparsifyGraph(a) => commands::sparsify_graph(a),
        Command::SparsifyFrame(a) => commands::sparsify_frame(a),
        Command::RiSelect(a) => commands::ri_select(a),
        Command::EmbedL1(a) => commands::embed_l1(a),
        Command::EmbedLp(a) => commands::embed_lp(a, cli.seed),
        Command::JohnApprox(a) => commands::john_approx(a),
        Command::Verify(a) => commands::verify(a, cli.seed),
        Command::CycleDemo(a) => commands::cycle_demo(a, cli.seed),
    };
    let elapsed = start.elapsed().as_secs_f64();

    let (status, code, result, error) = match outcome {
        Ok(v) => ("ok", 0, Some(v), None),
        Err(e) => {
            let code = exit_status(&e);
            eprintln!("error: {e}");
            let status = if code == 1 {
                "certification_failure"
            } else {
                "input_error"
            };
            (status, code, None, Some(e.to_string()))
        }
    };
    let report = Report {
        command: cli.command.name(),
        status,
        seed: cli.seed,
        result,
        error,
        wall_clock_seconds: cli.timing.then_some(elapsed),
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    let written = match &cli.report {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
