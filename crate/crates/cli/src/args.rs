use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use netrefine::metrics::Neighborhood;
use netrefine::provider::{parse_list, ProviderSpec};
use netrefine::ReachabilityBasis;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "netrefine",
    version,
    about = "Reachability-constrained network completion for raster masks"
)]
pub struct Cli {
    /// Worker threads for instance solving and distance sampling
    /// (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Write a JSON run manifest to this path.
    #[arg(long, global = true, value_name = "PATH")]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reachability report for a network mask.
    Analyze(AnalyzeArgs),
    /// Iteratively complete a ground-truth mask.
    Refine(RefineArgs),
    /// Conventional and r-neighborhood scores.
    Metrics(MetricsArgs),
    /// Generate a synthetic network, water and gapped copy.
    Synth(SynthArgs),
    /// Break a road mask, refine it and compare sampled distances.
    Roadgap(RoadgapArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Analyze(_) => "analyze",
            Command::Refine(_) => "refine",
            Command::Metrics(_) => "metrics",
            Command::Synth(_) => "synth",
            Command::Roadgap(_) => "roadgap",
        }
    }
}

/// Comma-separated flag value such as `0.2,0.1` or `0,3`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct List<T>(pub Vec<T>);

fn list<T: std::str::FromStr>(s: &str) -> Result<List<T>, String> {
    parse_list(s).map(List).map_err(|e| e.to_string())
}

fn provider(s: &str) -> Result<ProviderSpec, String> {
    s.parse().map_err(|e: netrefine::Error| e.to_string())
}

fn provider_text(s: &str) -> Result<String, String> {
    provider(s).map(|_| s.to_string())
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    /// Network mask (PGM).
    #[arg(long)]
    pub network: PathBuf,
    /// Water mask (PGM).
    #[arg(long)]
    pub water: PathBuf,
    /// Restrict unreachable pixels to this mask (default: the network).
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Report path (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    /// Partition the current ground truth.
    Gt,
    /// Partition the pre-completion network.
    Precompletion,
}

impl From<Basis> for ReachabilityBasis {
    fn from(b: Basis) -> Self {
        match b {
            Basis::Gt => ReachabilityBasis::GroundTruth,
            Basis::Precompletion => ReachabilityBasis::PreCompletion,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct CompletionArgs {
    /// Search radius in pixels.
    #[arg(long, default_value_t = 100)]
    pub rho: usize,
    /// Likelihood threshold for the pre-completion network.
    #[arg(long, default_value_t = 0.5)]
    pub tau: f32,
    /// Confidence threshold, one value or one per iteration.
    #[arg(long, value_parser = list::<f32>, default_value = "0.2,0.2,0.1,0.01,0.01")]
    pub alpha: List<f32>,
    /// Maximum number of iterations.
    #[arg(long, default_value_t = 5)]
    pub iters: usize,
    /// Dilation kernel side for the pre-completion network.
    #[arg(long, default_value_t = 5)]
    pub kernel: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct RefineArgs {
    /// Incomplete ground-truth mask (PGM).
    #[arg(long)]
    pub gt: PathBuf,
    /// Water mask (PGM).
    #[arg(long)]
    pub water: PathBuf,
    /// Directory of per-iteration likelihoods iter_<i>.pfm.
    #[arg(
        long,
        conflicts_with = "provider",
        required_unless_present = "provider"
    )]
    pub likelihood_dir: Option<PathBuf>,
    /// Provider spec: oracle:truth=PATH[,hit=F][,false_rate=F][,blur=K][,seed=N],
    /// constant:F or file:DIR.
    #[arg(long, value_parser = provider_text)]
    pub provider: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub completion: CompletionArgs,
    /// Which network the reachability partition is computed on.
    #[arg(long, value_enum, default_value_t = Basis::Gt)]
    pub basis: Basis,
    /// Refined mask (PGM).
    #[arg(long)]
    pub out: PathBuf,
    /// Per-iteration statistics (JSON).
    #[arg(long)]
    pub stats: PathBuf,
    /// Completion paths per iteration (JSON).
    #[arg(long)]
    pub dump_paths: Option<PathBuf>,
}

impl RefineArgs {
    pub fn provider_spec(&self) -> ProviderSpec {
        match (&self.provider, &self.likelihood_dir) {
            (Some(s), _) => provider(s).expect("validated by the parser"),
            (None, Some(dir)) => ProviderSpec::File(dir.clone()),
            (None, None) => unreachable!("clap requires one of the two"),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Square,
    Disk,
}

impl From<Shape> for Neighborhood {
    fn from(s: Shape) -> Self {
        match s {
            Shape::Square => Neighborhood::Square,
            Shape::Disk => Neighborhood::Disk,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct MetricsArgs {
    /// Predicted mask (PGM).
    #[arg(long)]
    pub pred: PathBuf,
    /// Reference mask (PGM).
    #[arg(long)]
    pub gt: PathBuf,
    /// Comma-separated radii.
    #[arg(long, value_parser = list::<usize>, default_value = "0")]
    pub r: List<usize>,
    /// Neighborhood shape.
    #[arg(long, value_enum, default_value_t = Shape::Square)]
    pub neighborhood: Shape,
    /// Report path (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    /// Branching canals fed by water blobs.
    Canal,
    /// Straight road grid with an empty water mask.
    Road,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    /// Seed for the network; gaps use it too unless --gap-seed is given.
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Kind::Canal)]
    pub kind: Kind,
    #[arg(long, default_value_t = 512)]
    pub rows: usize,
    #[arg(long, default_value_t = 512)]
    pub cols: usize,
    /// Canal trunks.
    #[arg(long, default_value_t = 8)]
    pub trunks: usize,
    /// Canal branching depth.
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    /// Water blobs.
    #[arg(long, default_value_t = 4)]
    pub blobs: usize,
    /// Road line spacing.
    #[arg(long, default_value_t = 64)]
    pub spacing: usize,
    /// Number of gaps to cut.
    #[arg(long, default_value_t = 0)]
    pub gaps: usize,
    /// Comma-separated gap lengths to draw from.
    #[arg(long, value_parser = list::<usize>, default_value = "10,20,30")]
    pub beta: List<usize>,
    #[arg(long)]
    pub gap_seed: Option<u64>,
    /// Directory for network.pgm, water.pgm, broken.pgm and removed.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct RoadgapArgs {
    /// Intact road mask (PGM).
    #[arg(long)]
    pub gt: PathBuf,
    /// Seed for gap placement and point sampling.
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub gaps: usize,
    #[arg(long, value_parser = list::<usize>, default_value = "20,30,50")]
    pub beta: List<usize>,
    /// Sampled points for the distance objective.
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    /// Provider spec (default: a perfect oracle built from --gt).
    #[arg(long, value_parser = provider_text)]
    pub provider: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub completion: CompletionArgs,
    /// Directory for broken.pgm, refined.pgm, trace.json and comparison.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}
