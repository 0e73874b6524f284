//! `qdpole`: residues, foliation portraits, model ends, harmonic-map solves and
//! exhaustion experiments from the command line.
//!
//! Exit status: 0 on success, 1 when a computation fails or a checked
//! postcondition is violated (artifacts are still written), 2 on a
//! configuration or parse error.

mod commands;
mod manifest;
mod output;
mod solve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use manifest::Manifest;
use output::{config_error, Failure};

/// Environment variable holding the worker-thread count.
const THREADS_VAR: &str = "QDPOLE_THREADS";

#[derive(Parser, Debug)]
#[command(name = "qdpole", version, about = "Quadratic differentials with double poles")]
struct Cli {
    /// Seed for every random choice made by the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Residue, foliation angle and center type of a pole.
    Analyze(AnalyzeArgs),
    /// SVG portrait of the horizontal foliation.
    Trace(TraceArgs),
    /// Energy, transverse measures and Hopf differential of a model end.
    Model(ModelArgs),
    /// Length-area lower bound for given modulus and transverse measures.
    Bound(BoundArgs),
    /// Discrete harmonic map for a JSON problem.
    Solve(SolveArgs),
    /// Exhaustion experiment over a sequence of moduli.
    Exhaust(ExhaustArgs),
    /// Energy growth of the collapsing map of a pole of order k.
    Probe(ProbeArgs),
    /// Validate measured-foliation coordinates and report the dimension.
    Coords(CoordsArgs),
    /// Map (tau, c) prescriptions to residues.
    Prescribe(PrescribeArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct AnalyzeArgs {
    /// Differential document.
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Index of the pole to analyze.
    #[arg(long, default_value_t = 0)]
    pub pole: usize,
    /// Vertices of the polygon used for the contour measure.
    #[arg(long, default_value_t = 256)]
    pub vertices: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum TraceDirection {
    Forward,
    Backward,
    Both,
}

#[derive(Args, Debug, Serialize)]
pub struct TraceArgs {
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Number of seed points, evenly spaced on a circle.
    #[arg(long, default_value_t = 12)]
    pub seeds: usize,
    /// Radius of the seed circle; by default it fits inside the chart.
    #[arg(long)]
    pub seed_radius: Option<f64>,
    /// Pole the seed circle is centred on; the origin when there are no poles.
    #[arg(long, default_value_t = 0)]
    pub pole: usize,
    /// Flat-metric length limit per leaf.
    #[arg(long, default_value_t = 10.0)]
    pub max_len: f64,
    /// Flat-metric step.
    #[arg(long, default_value_t = 1e-2)]
    pub step: f64,
    #[arg(long, value_enum, default_value_t = TraceDirection::Both)]
    pub direction: TraceDirection,
    /// Pixel width of the SVG.
    #[arg(long, default_value_t = 800.0)]
    pub width: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct ModelArgs {
    /// Circumference R.
    #[arg(long = "R", allow_hyphen_values = true)]
    pub circumference: f64,
    /// Foliation angle in [-π/2, π/2].
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Cylinder length L.
    #[arg(long = "L", allow_hyphen_values = true)]
    pub length: f64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct BoundArgs {
    /// Modulus M.
    #[arg(long = "M", allow_hyphen_values = true)]
    pub modulus: f64,
    /// Lower bound C on meridian image lengths.
    #[arg(long = "C", allow_hyphen_values = true)]
    pub meridian: f64,
    /// Lower bound τ on longitude image lengths.
    #[arg(long = "tau", allow_hyphen_values = true)]
    pub longitude: f64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SolveArgs {
    /// Problem document.
    pub input: PathBuf,
    /// Summary JSON; value and Hopf tables go next to it.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Random competitor maps checked against the solution.
    #[arg(long, default_value_t = 16)]
    pub candidates: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct ExhaustArgs {
    #[arg(long = "R", default_value_t = 2.0 * std::f64::consts::PI, allow_hyphen_values = true)]
    pub circumference: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, value_delimiter = ',', default_values_t = vec![2.0, 4.0, 8.0, 16.0, 32.0])]
    pub moduli: Vec<f64>,
    /// `random` (drawn from the seed), `none`, an inline JSON object, or a
    /// path to a JSON file.
    #[arg(long, default_value = "random")]
    pub perturbation: String,
    /// Grid columns; each row has `modulus * ntheta` cells.
    #[arg(long, default_value_t = 64)]
    pub ntheta: usize,
    /// CSV report.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Verdict JSON; defaults to `<stem>.verdict.json` next to the report.
    #[arg(long)]
    pub verdict: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ProbeArgs {
    /// Pole order: 2, 4 or 6.
    #[arg(long)]
    pub k: u32,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 1.0, 1.5, 2.0])]
    pub moduli: Vec<f64>,
    #[arg(long = "R", default_value_t = 2.0 * std::f64::consts::PI, allow_hyphen_values = true)]
    pub circumference: f64,
    #[arg(long, default_value_t = 64)]
    pub ntheta: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct CoordsArgs {
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct PrescribeArgs {
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub tau: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub c: Vec<f64>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn threads_from_env() -> Result<Option<usize>, Failure> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| config_error(format!("{THREADS_VAR} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    Ok(Some(n))
}

/// Run-wide settings recorded in every manifest.
struct Context {
    arguments: Vec<String>,
    seed: u64,
    threads: Option<usize>,
}

impl Context {
    fn manifest<T: Serialize>(&self, command: &'static str, args: &T) -> Result<Manifest, Failure> {
        let config = serde_json::to_value(args).map_err(|e| Failure::Runtime(e.to_string()))?;
        Ok(Manifest::new(command, self.arguments.clone(), self.seed, self.threads, config))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let ctx = Context {
        arguments: std::env::args().skip(1).collect(),
        seed: cli.seed,
        threads: threads_from_env()?,
    };
    let m = match &cli.command {
        Command::Analyze(a) => {
            let mut m = ctx.manifest("analyze", a)?;
            commands::analyze(a, &mut m)?;
            m
        }
        Command::Trace(a) => {
            let mut m = ctx.manifest("trace", a)?;
            commands::trace(a, &mut m)?;
            m
        }
        Command::Model(a) => {
            let mut m = ctx.manifest("model", a)?;
            commands::model(a, &mut m)?;
            m
        }
        Command::Bound(a) => {
            let mut m = ctx.manifest("bound", a)?;
            commands::bound(a, &mut m)?;
            m
        }
        Command::Solve(a) => {
            let mut m = ctx.manifest("solve", a)?;
            solve::solve(a, ctx.seed, &mut m)?;
            m
        }
        Command::Exhaust(a) => {
            let mut m = ctx.manifest("exhaust", a)?;
            commands::exhaust(a, ctx.seed, &mut m)?;
            m
        }
        Command::Probe(a) => {
            let mut m = ctx.manifest("probe", a)?;
            commands::probe(a, &mut m)?;
            m
        }
        Command::Coords(a) => {
            let mut m = ctx.manifest("coords", a)?;
            commands::coords(a, &mut m)?;
            m
        }
        Command::Prescribe(a) => {
            let mut m = ctx.manifest("prescribe", a)?;
            commands::prescribe(a, &mut m)?;
            m
        }
    };
    if m.passed() {
        return Ok(());
    }
    let failed: Vec<&str> = m
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    Err(Failure::Runtime(format!("postcondition violated: {}", failed.join(", "))))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version go to stdout with status 0; usage errors use 2.
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
