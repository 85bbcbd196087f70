mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use hopc::raster::ImageFormat;
use hopc::similarity::MetricKind;
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "hopc", version, about = "Multimodal image registration with phase-congruency descriptors")]
struct Cli {
    /// JSON run configuration; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (falls back to HOPC_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Phase congruency amplitude and orientation maps.
    Pc(PcArgs),
    /// Dump one template descriptor as CSV.
    Descr(DescrArgs),
    /// Template matching between two images.
    Match(MatchArgs),
    /// Full registration of a slave image onto a master image.
    Register(RegisterArgs),
    /// Synthetic master/slave pair with radiometric differences.
    Synth(SynthArgs),
    /// Evaluation runs: timing, template-size sweeps, similarity curves.
    #[command(subcommand)]
    Bench(BenchCommand),
}

fn parse_format(s: &str) -> Result<ImageFormat, String> {
    s.parse().map_err(|e: hopc::Error| e.to_string())
}

fn parse_metric(s: &str) -> Result<MetricKind, String> {
    s.parse().map_err(|e: hopc::Error| e.to_string())
}

#[derive(Debug, Args, Serialize)]
pub struct PcArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Output prefix; writes `<out>.pc.f32raw`, `<out>.orient.f32raw`,
    /// `<out>.pc.pgm` and `<out>.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct DescrArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub x: isize,
    #[arg(long)]
    pub y: isize,
    #[arg(long)]
    pub template: Option<usize>,
    /// Feature behind the descriptor.
    #[arg(long, default_value = "hopcncc", value_parser = parse_metric)]
    pub metric: MetricKind,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct MatchArgs {
    #[arg(long)]
    pub master: PathBuf,
    #[arg(long)]
    pub slave: PathBuf,
    #[arg(long, value_parser = parse_metric)]
    pub metric: Option<MetricKind>,
    #[arg(long)]
    pub template: Option<usize>,
    #[arg(long)]
    pub search_radius: Option<usize>,
    /// `auto` for block-Harris points, or a CSV file with `x,y` columns.
    #[arg(long, default_value = "auto")]
    pub points: String,
    /// Recompute descriptors per offset instead of using block fields.
    #[arg(long)]
    pub naive: bool,
    /// Directory receiving one f32raw similarity surface per point.
    #[arg(long)]
    pub dump_surface: Option<PathBuf>,
    /// Control point CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct RegisterArgs {
    #[arg(long)]
    pub master: PathBuf,
    #[arg(long)]
    pub slave: PathBuf,
    #[arg(long, value_parser = parse_metric)]
    pub metric: Option<MetricKind>,
    #[arg(long)]
    pub template: Option<usize>,
    #[arg(long)]
    pub search_radius: Option<usize>,
    /// Interest-point blocks per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub points_per_block: Option<usize>,
    #[arg(long)]
    pub rmse_threshold: Option<f64>,
    /// Format of the warped image.
    #[arg(long, default_value = "f32raw", value_parser = parse_format)]
    pub format: ImageFormat,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    /// Base image path, or `procedural` for the built-in texture.
    #[arg(long, default_value = "procedural")]
    pub base: String,
    /// Side of the procedural base image.
    #[arg(long, default_value_t = 512)]
    pub size: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub noise_var: Option<f64>,
    #[arg(long, default_value = "f32raw", value_parser = parse_format)]
    pub format: ImageFormat,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Image pair for evaluation runs; a synthetic pair is generated when no
/// master is given.
#[derive(Debug, Args, Serialize)]
pub struct PairArgs {
    #[arg(long, requires = "slave")]
    pub master: Option<PathBuf>,
    #[arg(long, requires = "master")]
    pub slave: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 512)]
    pub size: usize,
}

#[derive(Debug, Subcommand)]
enum BenchCommand {
    /// Naive versus fast descriptor matching wall time.
    Timing(TimingArgs),
    /// Correct-match ratio per metric and template size.
    Sweep(SweepArgs),
    /// Full similarity surface at one point.
    Curve(CurveArgs),
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',').map(|v| v.trim().parse::<T>().map_err(|e| e.to_string())).collect()
}

fn parse_sizes(s: &str) -> Result<Vec<usize>, String> {
    parse_list(s)
}

fn parse_metrics(s: &str) -> Result<Vec<MetricKind>, String> {
    parse_list(s)
}

#[derive(Debug, Args, Serialize)]
pub struct TimingArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long)]
    pub points: Option<usize>,
    /// Comma-separated template sizes.
    #[arg(long, value_parser = parse_sizes)]
    pub templates: Option<Vec<usize>>,
    /// Comma-separated search radii.
    #[arg(long, value_parser = parse_sizes)]
    pub radii: Option<Vec<usize>>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long, value_parser = parse_metrics)]
    pub metrics: Option<Vec<MetricKind>>,
    #[arg(long, value_parser = parse_sizes)]
    pub sizes: Option<Vec<usize>>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CurveArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long)]
    pub x: isize,
    #[arg(long)]
    pub y: isize,
    #[arg(long, value_parser = parse_metric)]
    pub metric: Option<MetricKind>,
    #[arg(long)]
    pub template: Option<usize>,
    #[arg(long)]
    pub search_radius: Option<usize>,
    /// Output prefix; writes `<out>.f32raw`, `<out>.csv` and `<out>.json`.
    #[arg(long)]
    pub out: PathBuf,
}

pub enum Failure {
    Usage(anyhow::Error),
    Processing(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Processing(e.into())
    }
}

fn init_threads(flag: Option<usize>) -> Result<(), Failure> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("HOPC_THREADS") {
            Ok(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| Failure::Usage(anyhow::anyhow!("HOPC_THREADS must be a positive integer")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(Failure::Usage(anyhow::anyhow!("thread count must be >= 1")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Processing(e.into()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    init_threads(cli.threads)?;
    let cfg = match &cli.config {
        Some(p) => config::RunConfig::load(p).map_err(Failure::Usage)?,
        None => config::RunConfig::default(),
    };
    match cli.command {
        Command::Pc(a) => commands::pc(&a, cfg),
        Command::Descr(a) => commands::descr(&a, cfg),
        Command::Match(a) => commands::match_cmd(&a, cfg),
        Command::Register(a) => commands::register(&a, cfg),
        Command::Synth(a) => commands::synth(&a, cfg),
        Command::Bench(BenchCommand::Timing(a)) => commands::timing(&a, cfg),
        Command::Bench(BenchCommand::Sweep(a)) => commands::sweep(&a, cfg),
        Command::Bench(BenchCommand::Curve(a)) => commands::curve(&a, cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Processing(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
