use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tgrab_core::SplitRule;

#[derive(Debug, Parser)]
#[command(
    name = "tgrab",
    version,
    about = "Synthetic temporal-graph reasoning tasks"
)]
pub struct Cli {
    /// Worker threads for generation (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a task instance and write it as a dataset directory.
    Gen(GenArgs),
    /// Print statistics of a dataset.
    Stats(StatsArgs),
    /// Fully validate a dataset directory.
    Validate(DatasetArg),
    /// Run a heuristic baseline through the evaluation protocol.
    Baseline(BaselineArgs),
    /// Score a prediction file against a dataset.
    Eval(EvalArgs),
    /// List change points of a periodic pattern.
    Changepoints(ChangepointArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(subcommand)]
    pub family: Family,

    #[command(flatten)]
    pub common: GenCommon,
}

#[derive(Debug, Args)]
pub struct GenCommon {
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Root under which a directory is named after the task when --out is absent.
    #[arg(long, global = true, env = "TGRAB_OUT_DIR")]
    pub out_root: Option<PathBuf>,

    /// `periods:A,B,C` or `frac:A,B,C`; defaults to whole periods for
    /// periodic tasks and 80/10/10 otherwise.
    #[arg(long, global = true)]
    pub split: Option<SplitRule>,

    /// Also write the directed event stream `events.csv`.
    #[arg(long, global = true)]
    pub events: bool,
}

#[derive(Debug, Subcommand)]
pub enum Family {
    /// Deterministic periodicity: k fixed ER graphs, each repeated n times.
    PeriodicDet {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        /// Total number of periods.
        #[arg(long, default_value_t = 48)]
        periods: usize,
        #[arg(long, default_value_t = 100)]
        nodes: u32,
        #[arg(long, default_value_t = 0.01)]
        p: f64,
        /// Draw k pairwise edge-disjoint patterns of equal size instead.
        #[arg(long)]
        disjoint: bool,
    },
    /// Stochastic periodicity: k SBM distributions with random communities.
    PeriodicSto {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, default_value_t = 48)]
        periods: usize,
        #[arg(long, default_value_t = 100)]
        nodes: u32,
        #[arg(long, default_value_t = 3)]
        blocks: u32,
        #[arg(long, default_value_t = 0.9)]
        p_intra: f64,
        #[arg(long, default_value_t = 0.01)]
        p_inter: f64,
    },
    /// Delayed cause and effect on a memory node.
    #[command(alias = "cause-effect")]
    Ce {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        lag: u64,
        /// Number of cause nodes.
        #[arg(long, default_value_t = 100)]
        nodes: u32,
        #[arg(long, default_value_t = 0.01)]
        p: f64,
        #[arg(long, default_value_t = 4000)]
        effect_steps: usize,
    },
    /// Long-range spatio-temporal paths with a delayed target.
    #[command(alias = "long-range")]
    Lr {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        lag: u64,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        dist: u32,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
        paths: u32,
        /// Number of intermediate nodes.
        #[arg(long, default_value_t = 100)]
        nodes: u32,
        #[arg(long, default_value_t = 4000)]
        effect_steps: usize,
    },
}

#[derive(Debug, Args)]
pub struct DatasetArg {
    #[arg(long)]
    pub dataset: PathBuf,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub dataset: PathBuf,

    /// Also print undirected edge counts per timestep.
    #[arg(long)]
    pub per_timestep: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Method {
    Persistence,
    Edgebank,
    Clique,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    AllPairs,
    Node,
}

#[derive(Debug, Args)]
pub struct ScoringArgs {
    #[arg(long)]
    pub dataset: PathBuf,

    /// Restrict scoring to pairs incident to this node.
    #[arg(long)]
    pub restrict_node: Option<u32>,

    /// Flag change points and report their mean (periodic datasets).
    #[arg(long)]
    pub changepoints: bool,

    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,

    /// Report path; defaults to `<dataset>/metrics_report.csv`.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long, value_enum)]
    pub method: Method,

    #[command(flatten)]
    pub scoring: ScoringArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// CSV with header `t,u,v` or `t,u,v,score`.
    #[arg(long)]
    pub pred: PathBuf,

    #[arg(long, value_enum, default_value = "all-pairs")]
    pub mode: Mode,

    /// Treat timesteps absent from the prediction file as empty predictions.
    #[arg(long)]
    pub allow_missing: bool,

    #[command(flatten)]
    pub scoring: ScoringArgs,
}

#[derive(Debug, Args)]
pub struct ChangepointArgs {
    #[arg(long, required_unless_present = "dataset")]
    pub k: Option<usize>,
    #[arg(long, required_unless_present = "dataset")]
    pub n: Option<usize>,
    /// First timestep (inclusive); defaults to 0, or the start of the
    /// evaluated range with --dataset.
    #[arg(long)]
    pub start: Option<usize>,
    /// Last timestep (exclusive); required without --dataset.
    #[arg(long, required_unless_present = "dataset")]
    pub end: Option<usize>,
    /// Take k, n and the evaluated range from a periodic dataset.
    #[arg(long, conflicts_with_all = ["k", "n"])]
    pub dataset: Option<PathBuf>,
}
