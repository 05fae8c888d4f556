//! Command-line entry point: simulate predictions, backtest the trading
//! rule, compute portfolio frontiers, and assemble figure-ready CSVs.
//!
//! All commands are deterministic for a fixed input, flag set, and seed.
//! `MG_THREADS` caps internal parallelism when set.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use mgtrade::backtest::BacktestConfig;
use mgtrade::data::{synthetic_series, SyntheticKind};
use mgtrade::engine::derive_seed;

mod manifest;
mod pipeline;
mod report;
mod table;

use pipeline::{cmd_backtest, cmd_frontier, cmd_simulate, load_universe, CommandContext, FrontierOpts};

#[derive(Parser)]
#[command(name = "mgtrade", version, about = "Adaptive trading-strategy evaluation: sign predictions, costed backtests, and mean-variance frontiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic price panel in the input CSV format
    Synth(SynthArgs),
    /// Run adaptive and fixed-memory predictions over a price file
    Simulate(RunArgs),
    /// Backtest the unit-long/flat rule and emit equity and ratio tables
    Backtest(RunArgs),
    /// Median efficient frontiers for strategy and buy-and-hold returns
    Frontier(FrontierArgs),
    /// Assemble figure CSVs from completed simulate/backtest/frontier runs
    Report(ReportArgs),
}

#[derive(Args)]
struct CommonOpts {
    /// Largest memory length considered
    #[arg(long, default_value_t = 10)]
    max_memory: u8,
    /// Strategies kept per memory length
    #[arg(long, default_value_t = 10_000)]
    strategy_cap: usize,
    /// Transaction cost in basis points per position change
    #[arg(long, default_value_t = 10.0)]
    cost_bps: f64,
    /// Scored steps excluded from reported metrics
    #[arg(long, default_value_t = 500)]
    learn_in: usize,
    /// Rolling-window length in scored steps
    #[arg(long, default_value_t = 250)]
    window: usize,
    /// Steps per trading period (1, 5, or 20)
    #[arg(long, default_value_t = 1, value_parser = parse_horizon)]
    horizon: usize,
    /// Seed for bank generation and subset draws
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_horizon(s: &str) -> std::result::Result<usize, String> {
    match s {
        "1" => Ok(1),
        "5" => Ok(5),
        "20" => Ok(20),
        other => Err(format!("horizon must be 1, 5, or 20, got {other}")),
    }
}

impl CommonOpts {
    fn config(&self) -> Result<BacktestConfig> {
        if !(self.cost_bps >= 0.0 && self.cost_bps < 10_000.0) {
            bail!("--cost-bps must be in [0, 10000), got {}", self.cost_bps);
        }
        Ok(BacktestConfig {
            strategy_cap: self.strategy_cap,
            max_memory: self.max_memory,
            cost_rate: self.cost_bps / 10_000.0,
            learn_in: self.learn_in,
            window: self.window,
            horizon: self.horizon,
            seed: self.seed,
            fixed_memory: None,
        })
    }
}

#[derive(Args)]
struct RunArgs {
    /// Price CSV in `date,ticker,close` format
    prices: PathBuf,
    /// Run directory for outputs and the manifest
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct FrontierArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Assets per random portfolio subset
    #[arg(long, default_value_t = 50)]
    subset_size: usize,
    /// Number of random subsets behind the median frontier
    #[arg(long, default_value_t = 100)]
    subsets: usize,
    /// Ridge added to the covariance diagonal when it is singular
    #[arg(long, default_value_t = 1e-8)]
    ridge: f64,
}

#[derive(Args)]
struct ReportArgs {
    /// Run directory containing completed simulate/backtest/frontier output
    run_dir: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Generator: iid-coin, trend, periodic:<p>, or gbm:<mu>:<sigma>
    #[arg(long)]
    kind: String,
    /// Observations per asset
    #[arg(long)]
    length: usize,
    /// Number of assets (tickers SYN000, SYN001, ...)
    #[arg(long, default_value_t = 1)]
    assets: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

fn parse_kind(s: &str) -> Result<SyntheticKind> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["iid-coin"] => Ok(SyntheticKind::IidCoin),
        ["trend"] => Ok(SyntheticKind::Trend),
        ["periodic", p] => Ok(SyntheticKind::Periodic(
            p.parse().with_context(|| format!("bad period {p:?}"))?,
        )),
        ["gbm", mu, sigma] => Ok(SyntheticKind::Gbm {
            mu: mu.parse().with_context(|| format!("bad drift {mu:?}"))?,
            sigma: sigma
                .parse()
                .with_context(|| format!("bad volatility {sigma:?}"))?,
        }),
        _ => bail!("unknown kind {s:?}: use iid-coin, trend, periodic:<p>, or gbm:<mu>:<sigma>"),
    }
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    if args.assets == 0 {
        bail!("--assets must be at least 1");
    }
    let kind = parse_kind(&args.kind)?;
    let mut rows = Vec::new();
    for i in 0..args.assets {
        let ticker = format!("SYN{i:03}");
        let seed = derive_seed(args.seed, i as u64);
        let series = synthetic_series(kind, args.length, seed)?.with_asset_id(&ticker);
        for (date, price) in series.dates().iter().zip(series.prices()) {
            rows.push(format!("{date},{ticker},{price}"));
        }
    }
    table::write_csv(&args.out, "date,ticker,close", rows)?;
    Ok(())
}

fn run_command(args: &RunArgs) -> Result<CommandContext<'_>> {
    let config = args.common.config()?;
    let universe = load_universe(&args.prices, config.horizon)?;
    Ok(CommandContext {
        out_dir: &args.out,
        config,
        universe,
    })
}

fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var("MG_THREADS") {
        let threads: usize = value
            .parse()
            .with_context(|| format!("MG_THREADS must be a positive integer, got {value:?}"))?;
        if threads == 0 {
            bail!("MG_THREADS must be a positive integer, got 0");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

fn main() -> Result<()> {
    configure_threads()?;
    let cli = Cli::parse();
    match &cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Simulate(args) => cmd_simulate(&run_command(args)?),
        Command::Backtest(args) => cmd_backtest(&run_command(args)?),
        Command::Frontier(args) => {
            let ctx = run_command(&args.run)?;
            let opts = FrontierOpts {
                subset_size: args.subset_size,
                subsets: args.subsets,
                ridge: args.ridge,
            };
            cmd_frontier(&ctx, &opts)
        }
        Command::Report(args) => report::cmd_report(&args.run_dir),
    }
}
