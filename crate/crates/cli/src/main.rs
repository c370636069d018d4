//! Command-line front end: `solve`, `landscape`, `hist` and `brute`.
//!
//! Reports are JSON and tables are CSV. Output goes to `--out` when given,
//! otherwise to stdout. Failures exit nonzero with a single-line message.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use protes_qaoa::pipeline::{self, SolveOptions};
use protes_qaoa::simulator::DEFAULT_SHOTS;
use protes_qaoa::{Backend, Graph, PipelineConfig, QaoaInstance};

#[derive(Debug, Parser)]
#[command(name = "protes-qaoa", version, about = "Tensor-train sampling optimizer for max-3-cut QAOA circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Brute force, grid optimization, local refinement and final measurement.
    Solve(SolveArgs),
    /// Dense p = 1 energy scan over [0, 2pi)^2 as CSV (gamma,beta,energy).
    Landscape(LandscapeArgs),
    /// Measurement counts at fixed angles as CSV (bitstring,count,coloring,cut).
    Hist(HistArgs),
    /// Exact max-k-cut by enumeration, as JSON.
    Brute(BruteArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Edge-list file: header `n m`, then `i j [w]` per line.
    #[arg(long)]
    graph: PathBuf,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    /// Circuit depth.
    #[arg(long, default_value_t = 4)]
    p: usize,
    #[arg(long, default_value = "diagonal", value_parser = parse_backend)]
    backend: Backend,
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    shots: usize,
    /// Overrides any seed in the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// `key = value` file with optimizer and refiner settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Include wall-clock timings (makes the report run-dependent).
    #[arg(long)]
    timings: bool,
}

#[derive(Debug, Args)]
struct LandscapeArgs {
    #[command(flatten)]
    common: Common,
    /// Grid points per angle.
    #[arg(long, default_value_t = 100)]
    resolution: usize,
}

#[derive(Debug, Args)]
struct HistArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated angles `gamma_1..gamma_p,beta_1..beta_p`.
    #[arg(long, conflicts_with = "theta_file", required_unless_present = "theta_file", allow_hyphen_values = true)]
    theta: Option<String>,
    /// File holding the angles, either as a list or as a solve report.
    #[arg(long)]
    theta_file: Option<PathBuf>,
    /// Expected depth; checked against the number of angles.
    #[arg(long)]
    p: Option<usize>,
    #[arg(long, default_value = "diagonal", value_parser = parse_backend)]
    backend: Backend,
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    shots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct BruteArgs {
    #[command(flatten)]
    common: Common,
    /// Number of colors.
    #[arg(long, default_value_t = 3)]
    k: usize,
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse()
}

fn read_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Graph::parse_edge_list(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_angles(text: &str) -> Result<Vec<f64>> {
    let trimmed = text.trim();
    if trimmed.starts_with('{') {
        let report: serde_json::Value = serde_json::from_str(trimmed).context("parsing theta JSON")?;
        let theta = report.get("theta").and_then(|t| t.as_array()).context("JSON has no `theta` array")?;
        return theta
            .iter()
            .map(|v| v.as_f64().context("non-numeric entry in `theta`"))
            .collect();
    }
    trimmed
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().with_context(|| format!("bad angle `{s}`")))
        .collect()
}

fn solve(args: SolveArgs) -> Result<()> {
    let graph = read_graph(&args.common.graph)?;
    let config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            PipelineConfig::parse(&text)?
        }
        None => PipelineConfig::default(),
    };
    let opts = SolveOptions {
        depth: args.p,
        backend: args.backend,
        config,
        shots: args.shots,
        seed: args.seed,
        record_timings: args.timings,
    };
    let report = pipeline::solve(&graph, &opts)?;
    emit(args.common.out.as_deref(), &(report.to_json() + "\n"))
}

fn landscape(args: LandscapeArgs) -> Result<()> {
    let graph = read_graph(&args.common.graph)?;
    let scan = pipeline::landscape(&graph, args.resolution)?;
    emit(args.common.out.as_deref(), &scan.to_csv())
}

fn hist(args: HistArgs) -> Result<()> {
    let graph = read_graph(&args.common.graph)?;
    let theta = match (&args.theta, &args.theta_file) {
        (Some(inline), _) => parse_angles(inline)?,
        (None, Some(path)) => {
            parse_angles(&fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)?
        }
        (None, None) => bail!("one of --theta or --theta-file is required"),
    };
    if theta.is_empty() || !theta.len().is_multiple_of(2) {
        bail!("theta needs an even, nonzero number of angles; got {}", theta.len());
    }
    let depth = theta.len() / 2;
    if let Some(p) = args.p {
        if p != depth {
            bail!("theta has {} angles but --p {p} needs {}", theta.len(), 2 * p);
        }
    }
    if args.shots == 0 {
        bail!("--shots must be at least 1");
    }
    let inst = QaoaInstance::new(graph, depth, args.backend)?;
    let rows = pipeline::histogram(&inst, &theta, args.shots, args.seed)?;
    emit(args.common.out.as_deref(), &pipeline::histogram_csv(&rows))
}

fn brute(args: BruteArgs) -> Result<()> {
    let graph = read_graph(&args.common.graph)?;
    let report = pipeline::brute(&graph, args.k)?;
    emit(args.common.out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(a) => solve(a),
        Command::Landscape(a) => landscape(a),
        Command::Hist(a) => hist(a),
        Command::Brute(a) => brute(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let msg = e.to_string();
            eprintln!("{}", msg.lines().next().unwrap_or("invalid arguments"));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
