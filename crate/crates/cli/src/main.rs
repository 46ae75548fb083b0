mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Bayesian network structure learning over restricted PDAGs.
#[derive(Debug, Parser)]
#[command(name = "rpdag", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Learn a structure from data and write it with a search report.
    Learn(LearnArgs),
    /// Draw seeded samples from a parameterised network into a CSV file.
    Sample(SampleArgs),
    /// Score a structure against a dataset.
    Score(ScoreArgs),
    /// Hamming distance of a learned structure from a gold DAG.
    Compare(CompareArgs),
    /// Enumerate all DAGs on n nodes and verify the RPDAG partition.
    Census(CensusArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SpaceArg {
    Rpdag,
    Dag,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Greedy,
    Tabu,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScoreArg {
    Bdeu,
    Bic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PriorArg {
    Uniform,
    ParamPenalty,
}

#[derive(Debug, Args)]
struct ScoreOpts {
    #[arg(long, value_enum, default_value = "bdeu")]
    score: ScoreArg,
    /// Equivalent sample size for BDeu.
    #[arg(long, default_value_t = 1.0)]
    ess: f64,
    #[arg(long, value_enum, default_value = "uniform")]
    prior: PriorArg,
}

#[derive(Debug, Args)]
struct LearnArgs {
    /// Training data (CSV with a header row).
    #[arg(long, required_unless_present = "net", conflicts_with = "net")]
    data: Option<PathBuf>,
    /// Sample the training data from this network instead of reading --data.
    #[arg(long, requires = "n")]
    net: Option<PathBuf>,
    /// Rows to sample when --net is given.
    #[arg(long)]
    n: Option<usize>,
    /// Gold network for Hamming columns.
    #[arg(long)]
    gold: Option<PathBuf>,
    /// Output network file.
    #[arg(long)]
    out: PathBuf,
    /// JSON report path.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "rpdag")]
    space: SpaceArg,
    #[arg(long, value_enum, default_value = "greedy")]
    strategy: StrategyArg,
    #[command(flatten)]
    score: ScoreOpts,
    /// Tabu list length [default: number of variables].
    #[arg(long)]
    tabu_len: Option<usize>,
    /// Tabu iterations [default: n(n-1)].
    #[arg(long)]
    tabu_iters: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Several sampling seeds, run concurrently (requires --net).
    #[arg(long, value_delimiter = ',', requires = "net", conflicts_with = "seed")]
    seeds: Vec<u64>,
    #[arg(long, default_value = "?")]
    missing_token: String,
    /// Starting structure (network file).
    #[arg(long)]
    start: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long)]
    net: PathBuf,
    /// Number of rows.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    data: PathBuf,
    /// Structure to score.
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    gold: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    ess: f64,
    #[arg(long, value_enum, default_value = "uniform")]
    prior: PriorArg,
    #[arg(long, default_value = "?")]
    missing_token: String,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Learned structure.
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CensusArgs {
    /// Number of nodes (at most 5).
    #[arg(long)]
    n: usize,
    #[arg(long)]
    report: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Learn(args) => commands::learn(args),
        Command::Sample(args) => commands::sample(args),
        Command::Score(args) => commands::score(args),
        Command::Compare(args) => commands::compare(args),
        Command::Census(args) => commands::census(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
