//! Command-line driver: simulate sessions, compute regret analyses, run
//! estimators, and evaluate estimates against ground truth.

mod commands;
mod config;
mod io;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Position-auction toolkit: simulation, regret analysis, and valuation
/// estimation from bid logs.
#[derive(Debug, Parser)]
#[command(name = "auctionkit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a synthetic bidder session and write its bid log, ground-truth
    /// values, and per-auction outcomes.
    Simulate(SimulateArgs),
    /// Compute regret curves, window totals, and the momentary regret series
    /// of a bid log.
    Regret(RegretArgs),
    /// Estimate bidder valuations from a bid log (never reads true values).
    Estimate(EstimateArgs),
    /// Score estimates against true values, including rank-based bias
    /// correction.
    Evaluate(EvaluateArgs),
    /// Bundle regret, estimates, evaluation, welfare, and correlations into
    /// one JSON report.
    Report(ReportArgs),
    /// Re-execute the manifest embedded in a previous output file.
    Rerun(RerunArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Session config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Directory for bids.csv, values.csv, outcomes.csv.
    #[arg(long)]
    out_dir: PathBuf,
    /// Overrides the config seed (and the AUCTIONKIT_SEED variable).
    #[arg(long)]
    seed: Option<u64>,
}

/// Options shared by every log-consuming command.
#[derive(Debug, Args, Clone)]
struct LogArgs {
    /// Long-form bid log CSV (auction_index,bidder_id,bid).
    #[arg(long)]
    bids: PathBuf,
    /// Treat the bid log as wide-form (auction_index,bidder_1,...).
    #[arg(long)]
    wide: bool,
    /// Auction mechanism of the log.
    #[arg(long, default_value = "gsp")]
    mechanism: String,
    /// Analysis window `first:last` (1-based inclusive); default second half.
    #[arg(long)]
    window: Option<String>,
    /// Candidate bid/value grid `lo:hi`; default 1:60.
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Debug, Args)]
struct RegretArgs {
    #[command(flatten)]
    log: LogArgs,
    /// True values CSV (bidder_id,value).
    #[arg(long)]
    values: PathBuf,
    /// Momentary-regret block length in auctions.
    #[arg(long, default_value_t = 60)]
    block_len: usize,
    /// Directory for curves.csv, totals.csv, momentary.csv.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    log: LogArgs,
    /// Estimation method: regret-min, avg-bid, regret-weighted, combined,
    /// vcg-ne, vcg-ne-raw, best-response, br-foc, br-foc-outliers,
    /// br-full-game, br-avg-value.
    #[arg(long)]
    method: String,
    /// Minimize relative instead of absolute regret (regret-min only).
    #[arg(long)]
    relative_objective: bool,
    /// Top-bidder rule for vcg-ne: second | max-second-own.
    #[arg(long, default_value = "second")]
    top_rule: String,
    /// Aggregate vcg-ne estimates by rank instead of bidder identity.
    #[arg(long)]
    by_rank: bool,
    /// Output estimates CSV.
    #[arg(long)]
    out: PathBuf,
    /// Also write best-response curves (bidder_id,bid,q,te).
    #[arg(long)]
    out_curves: Option<PathBuf>,
    /// Also write per-auction SNE deviations (vcg-ne only).
    #[arg(long)]
    out_deviations: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    log: LogArgs,
    /// Estimates CSV produced by `estimate`.
    #[arg(long)]
    estimates: PathBuf,
    /// True values CSV (bidder_id,value).
    #[arg(long)]
    values: PathBuf,
    /// Output report JSON.
    #[arg(long)]
    out: PathBuf,
    /// Optional flat CSV version of the per-bidder table.
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[command(flatten)]
    log: LogArgs,
    /// True values CSV (bidder_id,value).
    #[arg(long)]
    values: PathBuf,
    /// Comma-separated method list; default runs the regret-based family.
    #[arg(long, default_value = "regret-min,avg-bid,regret-weighted,combined")]
    methods: String,
    /// Momentary-regret and welfare block length in auctions.
    #[arg(long, default_value_t = 60)]
    block_len: usize,
    /// Output report JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct RerunArgs {
    /// Any previous output file with an embedded manifest.
    output: PathBuf,
}

fn dispatch(command: Command, recorded: Option<manifest::RunManifest>) -> anyhow::Result<()> {
    match command {
        Command::Simulate(args) => commands::simulate(args, recorded),
        Command::Regret(args) => commands::regret(args, recorded),
        Command::Estimate(args) => commands::estimate(args, recorded),
        Command::Evaluate(args) => commands::evaluate(args, recorded),
        Command::Report(args) => commands::report(args, recorded),
        Command::Rerun(args) => {
            let recorded = io::manifest_from_output(&args.output)?;
            let mut argv = vec!["auctionkit".to_string(), recorded.command.clone()];
            argv.extend(recorded.args.iter().cloned());
            let cli = Cli::try_parse_from(&argv)
                .map_err(|e| anyhow::anyhow!("manifest args failed to parse: {e}"))?;
            dispatch(cli.command, Some(recorded))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command, None) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
