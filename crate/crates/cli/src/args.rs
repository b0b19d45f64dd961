use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "heurdim", version, about = "Heuristic-parameterized GBFS and A*: runs, certificates, and behavior-complexity experiments")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct Global {
    /// Seed for every randomized step.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output path. A directory for `lower-bound`; the main artifact for
    /// `learn` and `gap`; the report otherwise (default: stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Where to write the run manifest (default: next to `--out`).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    Gbfs,
    Astar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    PathCost,
    Subopt,
    Expansions,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    Zeros,
    Exact,
    Random,
}

#[derive(Debug, Args, Serialize)]
pub struct InstanceRho {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub rho: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct AlgoChoice {
    #[arg(long, value_enum)]
    pub algo: Algo,
    /// Reopen closed vertices on strict g improvement (A* only).
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set, value_name = "BOOL")]
    pub reopen: bool,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "subcommand")]
pub enum Command {
    /// Check an instance file and list every violated invariant.
    Validate {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Run GBFS or A* and report the returned path.
    Run {
        #[command(flatten)]
        files: InstanceRho,
        #[command(flatten)]
        algo: AlgoChoice,
        /// Write the per-iteration trace as JSON.
        #[arg(long, value_name = "FILE")]
        emit_trace: Option<PathBuf>,
    },
    /// Canonical optimal path and its cost.
    Opt {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Evaluate a bounded utility measure on one run.
    Eval {
        #[command(flatten)]
        files: InstanceRho,
        #[command(flatten)]
        algo: AlgoChoice,
        #[arg(long, value_enum, default_value_t = Measure::Subopt)]
        measure: Measure,
        /// Cap H as an exact rational (default: largest weight times n - 1,
        /// or n for expansions).
        #[arg(long)]
        cap: Option<String>,
    },
    /// Inconsistency terms along the canonical optimal path.
    Inconsistency {
        #[command(flatten)]
        files: InstanceRho,
    },
    /// Check Cost <= Opt + Delta for A*, on one instance or a random sweep.
    CheckBound {
        #[arg(long, required_unless_present = "sweep", requires = "rho")]
        instance: Option<PathBuf>,
        #[arg(long, requires = "instance")]
        rho: Option<PathBuf>,
        #[arg(long, default_value_t = false, action = clap::ArgAction::Set, value_name = "BOOL")]
        reopen: bool,
        /// Number of random instances; each is checked with and without reopening.
        #[arg(long, conflicts_with = "instance")]
        sweep: Option<usize>,
        #[arg(long, default_value_t = 16)]
        max_n: usize,
        #[arg(long, default_value_t = 10)]
        ell: u32,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Replay an A* run and check every intermediate ledger inequality.
    Ledger {
        #[command(flatten)]
        files: InstanceRho,
        #[arg(long, default_value_t = false, action = clap::ArgAction::Set, value_name = "BOOL")]
        reopen: bool,
    },
    /// Minimize empirical inconsistency over a corpus and write the heuristic.
    Learn {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        #[arg(long, default_value_t = 0.5)]
        decay: f64,
        #[arg(long, default_value_t = 2000)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Init::Zeros)]
        init: Init,
        #[arg(long, default_value_t = 0.0)]
        low: f64,
        #[arg(long, default_value_t = 10.0)]
        high: f64,
    },
    /// Write the lower-bound family (and optionally the heuristic for a subset).
    LowerBound {
        #[arg(long)]
        n: usize,
        /// Comma-separated subset of 1..=n-4; writes rho.json for it.
        #[arg(long, value_delimiter = ',')]
        subset: Option<Vec<usize>>,
    },
    /// Check that the lower-bound family is shattered at threshold 5/2.
    Shatter {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        algo: AlgoChoice,
        #[arg(long, conflicts_with = "samples")]
        exhaustive: bool,
        /// Random subsets instead of all 2^(n-4).
        #[arg(long)]
        samples: Option<usize>,
        /// Include the witness subset of every achieved pattern.
        #[arg(long)]
        witnesses: bool,
    },
    /// Count distinct behavior tuples over a corpus and compare with the bound.
    Census {
        #[command(flatten)]
        algo: AlgoChoice,
        #[arg(long)]
        corpus: PathBuf,
        /// Enumerate all vertex orders (GBFS).
        #[arg(long, conflicts_with = "samples")]
        permutations: bool,
        /// Random heuristic samples on top of the small grid (A*).
        #[arg(long)]
        samples: Option<usize>,
        /// Simple-path enumeration cap per instance.
        #[arg(long, default_value_t = heurdim::lab::DEFAULT_CATALOG_CAP)]
        cap: u64,
    },
    /// Distinct simple-path costs per vertex and their size bounds.
    Gcosts {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = heurdim::lab::DEFAULT_CATALOG_CAP)]
        cap: u64,
    },
    /// Train/held-out gap curve over growing training sets.
    Gap {
        #[arg(long)]
        config: PathBuf,
        /// Also write the observed curve with fitted reference shapes.
        #[arg(long, value_name = "FILE")]
        shape: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Run { .. } => "run",
            Command::Opt { .. } => "opt",
            Command::Eval { .. } => "eval",
            Command::Inconsistency { .. } => "inconsistency",
            Command::CheckBound { .. } => "check-bound",
            Command::Ledger { .. } => "ledger",
            Command::Learn { .. } => "learn",
            Command::LowerBound { .. } => "lower-bound",
            Command::Shatter { .. } => "shatter",
            Command::Census { .. } => "census",
            Command::Gcosts { .. } => "gcosts",
            Command::Gap { .. } => "gap",
        }
    }
}

impl AlgoChoice {
    pub fn algorithm(&self) -> heurdim::Algorithm {
        match self.algo {
            Algo::Gbfs => heurdim::Algorithm::Gbfs,
            Algo::Astar => heurdim::Algorithm::astar(self.reopen),
        }
    }
}
