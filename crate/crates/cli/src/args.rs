use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "treeconn", version, about = "Synthesize sparse graphs with many spanning trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random instance.
    Gen(GenArgs),
    /// Select edges with greedy, the convex relaxation, or exhaustive search.
    Synthesize(SynthesizeArgs),
    /// Bound the optimum and, given a design, its optimality gap.
    Certify(CertifyArgs),
    /// Report tree-connectivity of a graph or pose-graph dataset.
    Evaluate(EvaluateArgs),
    /// Sweep the budget or the base-graph size and tabulate bounds.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Greedy,
    Convex,
    Exhaustive,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sweep {
    K,
    MInit,
}

/// Where the instance comes from.
#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// JSON instance file.
    #[arg(long, value_name = "PATH", conflicts_with = "g2o")]
    pub instance: Option<PathBuf>,
    /// 2-D g2o pose graph; odometry is the base, loop closures the candidates.
    #[arg(long, value_name = "PATH")]
    pub g2o: Option<PathBuf>,
    /// Rescale weights so the smallest is 1.
    #[arg(long)]
    pub normalize: bool,
    /// Base-edge list for a g2o file (pairs of 0-based ids), replacing the
    /// consecutive-id rule.
    #[arg(long, value_name = "PATH", requires = "g2o")]
    pub base_edges: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write the artifact here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Include wall-clock timings in the artifact (makes it run-dependent).
    #[arg(long)]
    pub timings: bool,
    /// Time each run this many times and report the median.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub repeat: u32,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Projected-gradient residual at which the relaxation stops.
    #[arg(long, default_value_t = 1e-7)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_iters: usize,
}

#[derive(Debug, Clone, Args)]
pub struct GeneratorArgs {
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    /// Number of base edges.
    #[arg(long, default_value_t = 30)]
    pub m_init: usize,
    /// Sample this many candidates instead of taking every non-base pair.
    #[arg(long, value_name = "C")]
    pub sample_candidates: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub weight_lo: f64,
    #[arg(long, default_value_t = 1.0)]
    pub weight_hi: f64,
    /// Draw integer weights in [weight-lo, weight-hi].
    #[arg(long)]
    pub integer_weights: bool,
    /// Independent rotational weights and the two-channel objective.
    #[arg(long)]
    pub two_channel: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    /// Write the artifact here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthesizeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "greedy")]
    pub algorithm: Algorithm,
    /// Budget; overrides the instance's own.
    #[arg(long)]
    pub k: Option<usize>,
    /// Grow greedily until the gain reaches this value instead of using a
    /// fixed budget.
    #[arg(long, conflicts_with = "k")]
    pub tau_min: Option<f64>,
    /// Solve the box-constrained relaxation with this sparsity penalty and
    /// keep candidates with selector at least 1/2.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Also draw this many randomized roundings of the relaxed solution.
    #[arg(long, default_value_t = 0)]
    pub random_trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub k: Option<usize>,
    /// JSON list of 0-based candidate indices, or an object with a
    /// `selected` list.
    #[arg(long, value_name = "PATH")]
    pub design: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Evaluate the base graph without candidates.
    #[arg(long)]
    pub base_only: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[arg(long, value_enum, default_value = "k")]
    pub sweep: Sweep,
    /// Inclusive sweep range `A:B` or `A:B:STEP`.
    #[arg(long, value_name = "A:B[:STEP]")]
    pub range: String,
    /// Budget used when sweeping the base size.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Add the exhaustive optimum where enumeration is small enough.
    #[arg(long)]
    pub oracle: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}
