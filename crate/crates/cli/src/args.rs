use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const SEED_ENV: &str = "MSGDP_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "msgdp",
    version,
    about = "Multiple-step greedy policy iteration on tabular MDPs"
)]
pub struct Cli {
    /// Print the resolved configuration as key=value lines before running.
    #[arg(long, global = true)]
    pub dump_config: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one algorithm on an MDP file or a generated grid world.
    Solve(SolveArgs),
    /// Count simulator calls to convergence over a parameter grid.
    Sweep(SweepArgs),
    /// Check the library's invariants on a seeded batch of random MDPs.
    Verify(VerifyArgs),
    /// Print iteration and error bounds for the given parameters.
    Bounds(BoundsArgs),
    /// Write a grid-world MDP in the text format.
    Gridworld(GridworldArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    HPi,
    KappaPi,
    KappaVi,
    KappaLambdaPi,
    LambdaPi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Exact,
    Vi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepAlg {
    HPi,
    KappaPi,
    LambdaPi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalMode {
    /// Closed-form evaluation, not charged.
    Free,
    /// Evaluation by simulator sweeps, charged per query.
    Iterative,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub alg: Algorithm,
    /// MDP in the text format.
    #[arg(long, conflicts_with = "gridworld")]
    pub mdp: Option<PathBuf>,
    /// Generate an N x N grid world instead of reading a file.
    #[arg(long, value_name = "N")]
    pub gridworld: Option<usize>,
    #[arg(long)]
    pub h: Option<usize>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Stopping tolerance for kappa-vi.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Backend::Exact)]
    pub backend: Backend,
    #[arg(long, default_value_t = 1e-5)]
    pub inner_tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    /// Value-change stopping tolerance (0 = stop on a repeated policy).
    #[arg(long, default_value_t = 0.0)]
    pub outer_tol: f64,
    /// Evaluation noise amplitude (kappa-lambda-pi only).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Greedy-step suboptimality (kappa-lambda-pi only).
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for the trace CSV.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub alg: SweepAlg,
    /// Grid side lengths; repeat or separate with commas.
    #[arg(long = "n", value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    /// Horizon grid, `start:step:stop` or a comma list.
    #[arg(long)]
    pub hs: Option<String>,
    /// Kappa grid, `start:step:stop` or a comma list.
    #[arg(long)]
    pub kappas: Option<String>,
    /// Lambda grid, `start:step:stop` or a comma list.
    #[arg(long)]
    pub lambdas: Option<String>,
    /// Number of seeds, counted up from --seed.
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.97)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub inner_tol: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub outer_tol: f64,
    #[arg(long, value_enum, default_value_t = EvalMode::Iterative)]
    pub eval: EvalMode,
    #[arg(long, default_value_t = 1e-5)]
    pub eval_tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Run only these invariants (see --list).
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    /// List invariant names and exit.
    #[arg(long)]
    pub list: bool,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Random MDPs per invariant.
    #[arg(long, default_value_t = 100)]
    pub mdps: usize,
    #[arg(long, default_value_t = 8)]
    pub max_states: usize,
    #[arg(long, default_value_t = 4)]
    pub max_actions: usize,
    /// Directory for verify_report.csv.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, default_value_t = 0.9)]
    pub gamma: f64,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub h: Option<usize>,
    #[arg(long = "S", default_value_t = 1)]
    pub n_states: usize,
    #[arg(long = "A", default_value_t = 2)]
    pub n_actions: usize,
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
}

#[derive(Debug, Args)]
pub struct GridworldArgs {
    #[arg(long = "n")]
    pub size: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.97)]
    pub gamma: f64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
