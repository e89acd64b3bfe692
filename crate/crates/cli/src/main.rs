//! Command-line driver: data generation, estimator runs, parameter sweeps,
//! closed-form oracles, and sweep rendering.

mod commands;
mod config;
mod data;

use clap::{Args, Parser, Subcommand};
use probshap::Error;

#[derive(Parser, Debug)]
#[command(
    name = "probshap",
    version,
    about = "Expectation and variance of Shapley values under stochastic data sampling"
)]
struct Cli {
    /// Worker threads for parallel games (default: all cores). Results are
    /// identical for any value.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate dataset artifacts: player specs, sample pools, validation
    /// grids, partitions.
    Gen(GenArgs),
    /// Run one estimator for R replications, writing per-replication CSVs
    /// and a JSON summary.
    Run(RunArgs),
    /// Sweep an (n_games x n_iter) grid, writing grid and long-format CSVs
    /// of the cross-replication metrics.
    Sweep(SweepArgs),
    /// Print closed-form expectation/variance oracles for a game spec file.
    Oracle(OracleArgs),
    /// Render a sweep's long-format CSV as a readable table.
    Report(ReportArgs),
}

#[derive(Args, Debug, Clone)]
struct SharedArgs {
    /// Key/value config file (TOML); command-line flags override it.
    #[arg(long)]
    config: Option<std::path::PathBuf>,

    /// Dataset: synthetic | wine.
    #[arg(long)]
    dataset: Option<String>,

    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Path to winequality-white.csv (wine dataset only).
    #[arg(long)]
    wine_csv: Option<std::path::PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct MethodArgs {
    /// Estimator: baseline | pooled | stratified.
    #[arg(long)]
    method: Option<String>,

    /// Baseline: fresh samples per player per game.
    #[arg(long)]
    n_sample: Option<usize>,

    /// Pooled/stratified: one-time pool size per player.
    #[arg(long)]
    n_pool: Option<usize>,

    /// Pooled/stratified: bootstrap size per player per game.
    #[arg(long)]
    n_boot: Option<usize>,

    /// Stratified: allocation ceiling as a fraction of the pool size.
    #[arg(long)]
    alpha: Option<f64>,

    /// Independent replications.
    #[arg(long)]
    replications: Option<usize>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[command(flatten)]
    shared: SharedArgs,

    /// Synthetic players to generate.
    #[arg(long)]
    players: Option<usize>,

    /// Samples per player in the exported pool.
    #[arg(long)]
    pool_size: Option<usize>,

    /// Points in the exported validation grid.
    #[arg(long)]
    validation_points: Option<usize>,

    /// Output directory.
    #[arg(long, default_value = "out")]
    out: std::path::PathBuf,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    shared: SharedArgs,

    #[command(flatten)]
    method: MethodArgs,

    /// Games per replication.
    #[arg(long)]
    games: Option<usize>,

    /// Permutations per game.
    #[arg(long)]
    iters: Option<usize>,

    /// Output directory.
    #[arg(long, default_value = "out")]
    out: std::path::PathBuf,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    shared: SharedArgs,

    #[command(flatten)]
    method: MethodArgs,

    /// Comma-separated n_games values, e.g. 10,50,200.
    #[arg(long)]
    games: Option<String>,

    /// Comma-separated n_iter values, e.g. 100,1000.
    #[arg(long)]
    iters: Option<String>,

    /// Output directory.
    #[arg(long, default_value = "out")]
    out: std::path::PathBuf,
}

#[derive(Args, Debug)]
struct OracleArgs {
    /// Game spec file (TOML) with an [additive] or [mixture] table.
    #[arg(long)]
    spec: std::path::PathBuf,

    /// Number of games m for the estimator-variance identities.
    #[arg(long, default_value_t = 100)]
    games: usize,

    /// Emit JSON instead of a text table.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// A sweep output directory or a long-format CSV file.
    #[arg(long)]
    input: std::path::PathBuf,

    /// Optional cleaned plot-data CSV (numeric cells only).
    #[arg(long)]
    plot_data: Option<std::path::PathBuf>,
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidConfig(_)
        | Error::SchemaMismatch { .. }
        | Error::PlayerCountExceedsCap { .. }
        | Error::EmptyInput(_)
        | Error::DimensionMismatch { .. }
        | Error::LengthMismatch { .. } => 2,
        Error::Io(_) | Error::MissingFile(_) | Error::MalformedData { .. } => 3,
        Error::Numeric(_) => 4,
        Error::UtilityEvaluation { source, .. }
        | Error::GameContext { source, .. }
        | Error::IterationContext { source, .. } => exit_code(source),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: could not configure {threads} worker threads: {e}");
            std::process::exit(2);
        }
    }
    let outcome = match cli.command {
        Command::Gen(args) => commands::gen(args),
        Command::Run(args) => commands::run(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Oracle(args) => commands::oracle(args),
        Command::Report(args) => commands::report(args),
    };
    if let Err(e) = outcome {
        eprintln!("error: {e}");
        let mut source = std::error::Error::source(&e);
        while let Some(s) = source {
            eprintln!("  caused by: {s}");
            source = s.source();
        }
        std::process::exit(exit_code(&e));
    }
}
