//! `budinf`: generate instances, solve them offline and online, run game
//! experiments and the verification batteries. Every command prints a JSON
//! report (or, for `gen`, the instance) to stdout or `-o`.
//!
//! Exit codes: 0 on success, 1 when a verification fails, 2 on bad input.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "budinf", version, about = "Budgeted influence maximization experiments")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Global {
    /// Master seed; all randomness is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo scenarios (solve, online) or delay draws (game).
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Cap on enumerated scenario supports and search spaces.
    #[arg(long, global = true)]
    pub limit: Option<u128>,
    /// Write the output here instead of stdout.
    #[arg(short = 'o', long = "output", global = true)]
    pub output: Option<PathBuf>,
    /// Disable data parallelism.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Generate an instance or game file.
    Gen(GenArgs),
    /// Solve an instance offline.
    Solve(SolveArgs),
    /// Run the online allocator over random arrival orders.
    Online(OnlineArgs),
    /// Multi-player game experiments.
    Game(GameArgs),
    /// Run verification batteries.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum GenKind {
    Gnp,
    StarPoa,
    ClassicalImport,
    TwoNodeDemo,
    RandomGame,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum TriggerArg {
    EdgeCategorical,
    NodeMixture,
    Classical,
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    pub kind: GenKind,
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    /// Edge probability.
    #[arg(long, default_value_t = 0.3)]
    pub p: f64,
    /// Support points per edge or node.
    #[arg(long, default_value_t = 2)]
    pub support: usize,
    #[arg(long, default_value_t = 3)]
    pub budget: u32,
    /// Per-agent capacity; defaults to the budget.
    #[arg(long)]
    pub capacity: Option<u32>,
    #[arg(long, value_enum, default_value_t = TriggerArg::NodeMixture)]
    pub trigger: TriggerArg,
    /// Players (star_poa leaves, random_game players).
    #[arg(long, default_value_t = 5)]
    pub players: usize,
    /// Edge list `from to prob` for classical_import.
    #[arg(long)]
    pub edges: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Brute,
    Greedy,
    Enum,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Enum)]
    pub mode: ModeArg,
    /// Seed size for partial enumeration.
    #[arg(long, default_value_t = 3)]
    pub enum_depth: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExploreArg {
    Brute,
    Greedy,
}

#[derive(Debug, Args, Serialize)]
pub struct OnlineArgs {
    pub instance: PathBuf,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.4)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.375)]
    pub p_secretary: f64,
    #[arg(long, value_enum, default_value_t = ExploreArg::Brute)]
    pub explore_solver: ExploreArg,
    /// Include every trial record in the report.
    #[arg(long)]
    pub records: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct GameArgs {
    pub game: PathBuf,
    /// Strategy profile (JSON matrix, one row per player); zeros by default.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Best responses to the profile and dynamics started from it.
    #[arg(long)]
    pub best_response: bool,
    /// Empirical price of anarchy.
    #[arg(long)]
    pub poa: bool,
    /// Check the utility-game conditions on random profiles.
    #[arg(long)]
    pub verify_utility: bool,
    /// Random starting profiles for the PoA search.
    #[arg(long, default_value_t = 4)]
    pub starts: usize,
    #[arg(long, default_value_t = 50)]
    pub max_rounds: usize,
    /// Random profiles for --verify-utility.
    #[arg(long, default_value_t = 100)]
    pub utility_samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteArg {
    Lattice,
    Cascade,
    Solver,
    Online,
    Game,
    All,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: SuiteArg,
    /// Smaller batteries.
    #[arg(long)]
    pub quick: bool,
    /// Replace the oracle by its negation in the lattice battery.
    #[arg(long)]
    pub inject_mutant: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
