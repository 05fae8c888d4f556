//! The simulate, backtest, and frontier commands: load and align prices,
//! run the prediction engine per asset, and write the per-horizon CSV
//! tables that `report` later assembles into figure files.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;

use mgtrade::backtest::{run_universe, usage_from_log, BacktestConfig, BacktestResult};
use mgtrade::data::{load_prices, resample, to_returns, PriceSeries, ReturnSeries};
use mgtrade::engine::Direction;
use mgtrade::portfolio::{
    equal_weight_returns, linspace, median_frontier, min_variance_portfolio, quantile,
    rolling_window_return, ReturnMatrix, DEFAULT_GRID_POINTS,
};

use crate::manifest::{fnv1a64, Manifest, Section};
use crate::table::{float_cells, write_csv};

pub const QUANTILE_LEVELS: [(f64, &str); 5] = [
    (0.10, "q10"),
    (0.25, "q25"),
    (0.50, "q50"),
    (0.75, "q75"),
    (0.90, "q90"),
];

/// Aligned universe at one horizon: resampled price grids (for dates) and
/// the matching return series.
pub struct Universe {
    pub prices: Vec<PriceSeries>,
    pub returns: Vec<ReturnSeries>,
    pub input_name: String,
    pub fingerprint: u64,
}

pub fn load_universe(path: &Path, horizon: usize) -> Result<Universe> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let fingerprint = fnv1a64(&bytes);
    let loaded = load_prices(bytes.as_slice())
        .with_context(|| format!("parsing {}", path.display()))?;
    for warning in &loaded.warnings {
        eprintln!("warning: {warning}");
    }
    if loaded.series.is_empty() {
        bail!("{} contains no complete price series", path.display());
    }
    let mut prices = Vec::with_capacity(loaded.series.len());
    let mut returns = Vec::with_capacity(loaded.series.len());
    for series in loaded.series {
        let resampled = resample(&series, horizon)
            .with_context(|| format!("resampling {} to horizon {horizon}", series.asset_id()))?;
        returns.push(to_returns(&resampled)?);
        prices.push(resampled);
    }
    let input_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    Ok(Universe {
        prices,
        returns,
        input_name,
        fingerprint,
    })
}

/// Date of the period that scored step `t` covers (the period's end date).
fn step_date(prices: &PriceSeries, start_step: usize, t: usize) -> NaiveDate {
    prices.dates()[start_step + t + 1]
}

pub struct CommandContext<'a> {
    pub out_dir: &'a Path,
    pub config: BacktestConfig,
    pub universe: Universe,
}

impl CommandContext<'_> {
    fn horizon_dir(&self) -> String {
        format!("h{}", self.config.horizon)
    }

    fn path(&self, relative: &str) -> PathBuf {
        self.out_dir.join(relative)
    }

    fn section_name(&self, command: &str) -> String {
        format!("{command} h={}", self.config.horizon)
    }

    fn base_section(&self) -> Section {
        let mut section = Section::default();
        section.push("tool_version", env!("CARGO_PKG_VERSION"));
        section.push("input", &self.universe.input_name);
        section.push("input_fingerprint", format!("{:016x}", self.universe.fingerprint));
        section.push("seed", self.config.seed);
        section.push("max_memory", self.config.max_memory);
        section.push("strategy_cap", self.config.strategy_cap);
        section.push("cost_rate", self.config.cost_rate);
        section.push("learn_in", self.config.learn_in);
        section.push("window", self.config.window);
        section.push("horizon", self.config.horizon);
        section
    }

    fn record(&self, command: &str, section: Section) -> Result<()> {
        let mut manifest = Manifest::load_or_default(self.out_dir)?;
        manifest.record(self.out_dir, &self.section_name(command), section)
    }

    /// Scored steps must extend past the learn-in for any metric to be
    /// reportable.
    fn reported_range(&self, results: &[BacktestResult]) -> Result<usize> {
        let scored = results[0].scored_steps();
        if self.config.learn_in >= scored {
            bail!(
                "learn-in of {} leaves no reported steps (only {scored} scored steps at horizon {})",
                self.config.learn_in,
                self.config.horizon
            );
        }
        Ok(scored)
    }
}

pub fn cmd_simulate(ctx: &CommandContext) -> Result<()> {
    let adaptive = run_universe(&ctx.universe.returns, &ctx.config)?;
    let scored = ctx.reported_range(&adaptive)?;
    let learn_in = ctx.config.learn_in;
    let window = ctx.config.window;
    let hdir = ctx.horizon_dir();
    let mut outputs: Vec<String> = Vec::new();

    // Fixed-memory comparison runs, one per memory length; rolling success
    // per asset is kept, plus the selection logs of the largest length for
    // the strategy-usage table.
    let mut fixed_rolling: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut fixed_max_logs: Vec<Vec<mgtrade::engine::Selection>> = Vec::new();
    for m in 1..=ctx.config.max_memory {
        let mut config = ctx.config.clone();
        config.fixed_memory = Some(m);
        let results = run_universe(&ctx.universe.returns, &config)?;
        fixed_rolling.push(
            results
                .iter()
                .map(|r| r.rolling_success(window))
                .collect::<mgtrade::Result<Vec<_>>>()?,
        );
        if m == ctx.config.max_memory {
            fixed_max_logs = results.into_iter().map(|r| r.selection_log).collect();
        }
    }

    // Per-asset prediction tables and rolling success matrices.
    for (i, result) in adaptive.iter().enumerate() {
        let prices = &ctx.universe.prices[i];
        let ticker = &result.asset_id;

        let rel = format!("{hdir}/predictions/{ticker}.csv");
        write_csv(
            &ctx.path(&rel),
            "step,date,prediction,realized,memory,strategy",
            (0..scored).map(|t| {
                format!(
                    "{t},{},{},{},{},{}",
                    step_date(prices, result.start_step, t),
                    result.predictions[t],
                    result.realized[t],
                    result.selection_log[t].memory,
                    result.selection_log[t].strategy_index
                )
            }),
        )?;
        outputs.push(rel);

        let adaptive_rolling = result.rolling_success(window)?;
        let header = {
            let mut cols = vec!["step".to_string(), "date".to_string()];
            cols.extend((1..=ctx.config.max_memory).map(|m| format!("m{m}")));
            cols.push("adaptive".to_string());
            cols.join(",")
        };
        let rel = format!("{hdir}/rolling/{ticker}.csv");
        write_csv(
            &ctx.path(&rel),
            &header,
            (0..adaptive_rolling.len()).map(|k| {
                let t = window - 1 + k;
                let mut cells = vec![t.to_string(), step_date(prices, result.start_step, t).to_string()];
                for per_asset in &fixed_rolling {
                    cells.push(per_asset[i][k].to_string());
                }
                cells.push(adaptive_rolling[k].to_string());
                cells.join(",")
            }),
        )?;
        outputs.push(rel);
    }

    // Per-asset summary: post-learn-in success rate and the best constant
    // prediction's rate over the same window.
    let rel = format!("{hdir}/summary.csv");
    write_csv(
        &ctx.path(&rel),
        "ticker,scored_steps,success_rate,majority_rate",
        adaptive.iter().map(|result| {
            let rate = result
                .success_rate(learn_in, scored)
                .expect("reported range is non-empty");
            let ups = result.realized[learn_in..]
                .iter()
                .filter(|&&d| d == Direction::Up)
                .count();
            let steps = scored - learn_in;
            let majority = ups.max(steps - ups) as f64 / steps as f64;
            format!("{},{},{},{}", result.asset_id, scored, rate, majority)
        }),
    )?;
    outputs.push(rel);

    // Pooled summary over all post-learn-in predictions.
    let steps = scored - learn_in;
    let mut hits = 0usize;
    let mut ups = 0usize;
    let mut best_constant = 0usize;
    for result in &adaptive {
        hits += (learn_in..scored)
            .filter(|&t| result.predictions[t] == result.realized[t])
            .count();
        let asset_ups = result.realized[learn_in..]
            .iter()
            .filter(|&&d| d == Direction::Up)
            .count();
        ups += asset_ups;
        best_constant += asset_ups.max(steps - asset_ups);
    }
    let total = steps * adaptive.len();
    let rel = format!("{hdir}/run_summary.csv");
    write_csv(
        &ctx.path(&rel),
        "metric,value",
        [
            format!("assets,{}", adaptive.len()),
            format!("scored_steps,{scored}"),
            format!("reported_steps,{steps}"),
            format!("success_rate,{}", hits as f64 / total as f64),
            format!("oracle_success_rate,{}", best_constant as f64 / total as f64),
            format!("up_fraction,{}", ups as f64 / total as f64),
        ],
    )?;
    outputs.push(rel);

    // Memory-usage fractions per asset over the reported steps.
    let header = {
        let mut cols = vec!["ticker".to_string()];
        cols.extend((1..=ctx.config.max_memory).map(|m| format!("m{m}")));
        cols.join(",")
    };
    let rel = format!("{hdir}/memory_usage.csv");
    write_csv(
        &ctx.path(&rel),
        &header,
        adaptive.iter().map(|result| {
            let usage = usage_from_log(&result.selection_log[learn_in..])
                .expect("reported range is non-empty");
            let mut fractions = vec![0.0f64; ctx.config.max_memory as usize];
            for (m, f) in usage.memory_usage {
                fractions[m as usize - 1] = f;
            }
            format!("{},{}", result.asset_id, float_cells(&fractions))
        }),
    )?;
    outputs.push(rel);

    // Sorted strategy-usage fractions from the fixed run at the largest
    // memory length.
    let rel = format!("{hdir}/strategy_usage_fixed.csv");
    write_csv(
        &ctx.path(&rel),
        "ticker,memory,rank,fraction",
        adaptive.iter().zip(&fixed_max_logs).flat_map(|(result, log)| {
            let usage = usage_from_log(&log[learn_in..]).expect("reported range is non-empty");
            usage
                .strategy_usage
                .into_iter()
                .enumerate()
                .map(|(rank, (sel, fraction))| {
                    format!("{},{},{},{fraction}", result.asset_id, sel.memory, rank + 1)
                })
                .collect::<Vec<_>>()
        }),
    )?;
    outputs.push(rel);

    let mut section = ctx.base_section();
    for output in outputs {
        section.outputs.push(output);
    }
    ctx.record("simulate", section)?;
    Ok(())
}

pub fn cmd_backtest(ctx: &CommandContext) -> Result<()> {
    let results = run_universe(&ctx.universe.returns, &ctx.config)?;
    let scored = ctx.reported_range(&results)?;
    let learn_in = ctx.config.learn_in;
    let hdir = ctx.horizon_dir();
    let mut outputs: Vec<String> = Vec::new();

    // Reported ratio paths are rebased at the learn-in boundary: wealth is
    // recompounded from there, and a position already held at the boundary
    // does not incur a transaction inside the window.
    let mut gross_ratios: Vec<Vec<f64>> = Vec::with_capacity(results.len());
    let mut net_ratios: Vec<Vec<f64>> = Vec::with_capacity(results.len());
    for (i, result) in results.iter().enumerate() {
        let prices = &ctx.universe.prices[i];
        let ticker = &result.asset_id;

        let rel = format!("{hdir}/equity/{ticker}.csv");
        write_csv(
            &ctx.path(&rel),
            "step,date,position,equity_gross,equity_net,bh_equity",
            (0..scored).map(|t| {
                format!(
                    "{t},{},{},{},{},{}",
                    step_date(prices, result.start_step, t),
                    result.positions[t] as u8,
                    result.equity_gross[t + 1],
                    result.equity_net[t + 1],
                    result.bh_equity[t + 1]
                )
            }),
        )?;
        outputs.push(rel);

        let windowed = result.window_equity(learn_in)?;
        let gross: Vec<f64> = windowed
            .equity_gross
            .iter()
            .zip(&windowed.bh_equity)
            .skip(1)
            .map(|(e, b)| e / b)
            .collect();
        let net: Vec<f64> = windowed
            .equity_net
            .iter()
            .zip(&windowed.bh_equity)
            .skip(1)
            .map(|(e, b)| e / b)
            .collect();

        let rel = format!("{hdir}/ratio/{ticker}.csv");
        write_csv(
            &ctx.path(&rel),
            "step,date,ratio_gross,ratio_net",
            (learn_in..scored).map(|t| {
                format!(
                    "{t},{},{},{}",
                    step_date(prices, result.start_step, t),
                    gross[t - learn_in],
                    net[t - learn_in]
                )
            }),
        )?;
        outputs.push(rel);
        gross_ratios.push(gross);
        net_ratios.push(net);
    }

    // Cross-asset quantiles of the ratio paths, one row per reported step.
    let dates0 = &ctx.universe.prices[0];
    let start0 = results[0].start_step;
    for (name, ratios) in [("gross", &gross_ratios), ("net", &net_ratios)] {
        let rel = format!("{hdir}/ratio_quantiles_{name}.csv");
        write_csv(
            &ctx.path(&rel),
            "step,date,q10,q25,q50,q75,q90",
            (learn_in..scored).map(|t| {
                let mut values: Vec<f64> =
                    ratios.iter().map(|path| path[t - learn_in]).collect();
                values.sort_by(|a, b| a.partial_cmp(b).expect("ratios are finite"));
                let cells: Vec<f64> = QUANTILE_LEVELS
                    .iter()
                    .map(|(q, _)| quantile(&values, *q))
                    .collect();
                format!("{t},{},{}", step_date(dates0, start0, t), float_cells(&cells))
            }),
        )?;
        outputs.push(rel);
    }

    // Equal-weight portfolio: rolling compounded returns of the costed
    // strategy versus buy-and-hold over the reported steps.
    let strategy_matrix = ReturnMatrix::new(
        results.iter().map(|r| r.asset_id.clone()).collect(),
        results
            .iter()
            .map(|r| r.net_step_returns()[learn_in..].to_vec())
            .collect(),
    )?;
    let bh_matrix = ReturnMatrix::new(
        results.iter().map(|r| r.asset_id.clone()).collect(),
        results.iter().map(|r| r.returns[learn_in..].to_vec()).collect(),
    )?;
    let strategy_rolling =
        rolling_window_return(&equal_weight_returns(&strategy_matrix), ctx.config.window)
            .context("rolling window over reported steps")?;
    let bh_rolling = rolling_window_return(&equal_weight_returns(&bh_matrix), ctx.config.window)?;
    let rel = format!("{hdir}/portfolio_rolling.csv");
    write_csv(
        &ctx.path(&rel),
        "step,date,strategy_return,bh_return",
        (0..strategy_rolling.len()).map(|k| {
            let t = learn_in + ctx.config.window - 1 + k;
            format!(
                "{t},{},{},{}",
                step_date(dates0, start0, t),
                strategy_rolling[k],
                bh_rolling[k]
            )
        }),
    )?;
    outputs.push(rel);

    let mut section = ctx.base_section();
    for output in outputs {
        section.outputs.push(output);
    }
    ctx.record("backtest", section)?;
    Ok(())
}

pub struct FrontierOpts {
    pub subset_size: usize,
    pub subsets: usize,
    pub ridge: f64,
}

pub fn cmd_frontier(ctx: &CommandContext, opts: &FrontierOpts) -> Result<()> {
    let results = run_universe(&ctx.universe.returns, &ctx.config)?;
    ctx.reported_range(&results)?;
    let learn_in = ctx.config.learn_in;
    let hdir = ctx.horizon_dir();

    if results.len() < opts.subset_size {
        bail!(
            "only {} assets survive alignment but subsets of {} were requested",
            results.len(),
            opts.subset_size
        );
    }

    let assets: Vec<String> = results.iter().map(|r| r.asset_id.clone()).collect();
    let strategy_matrix = ReturnMatrix::new(
        assets.clone(),
        results
            .iter()
            .map(|r| r.net_step_returns()[learn_in..].to_vec())
            .collect(),
    )?;
    let bh_matrix = ReturnMatrix::new(
        assets,
        results.iter().map(|r| r.returns[learn_in..].to_vec()).collect(),
    )?;

    // One shared target grid spanning both frontiers.
    let mv_strategy = min_variance_portfolio(&strategy_matrix, opts.ridge)?;
    let mv_bh = min_variance_portfolio(&bh_matrix, opts.ridge)?;
    let lo = mv_strategy.target_return.min(mv_bh.target_return);
    let hi = strategy_matrix
        .means()
        .into_iter()
        .chain(bh_matrix.means())
        .fold(f64::NEG_INFINITY, f64::max);
    let targets = linspace(lo, hi, DEFAULT_GRID_POINTS);

    // Both files carry the full shared grid; targets no subset can attain
    // keep an empty risk cell.
    let mut outputs: Vec<String> = Vec::new();
    for (name, matrix) in [("strategy", &strategy_matrix), ("bh", &bh_matrix)] {
        let frontier = median_frontier(
            matrix,
            opts.subset_size,
            opts.subsets,
            &targets,
            ctx.config.seed,
            opts.ridge,
        )?;
        let mut attained = frontier.iter().peekable();
        let rel = format!("{hdir}/frontier_{name}.csv");
        write_csv(
            &ctx.path(&rel),
            "target_return,median_stdev",
            targets.iter().map(|&target| {
                match attained.peek() {
                    Some((t, sd)) if *t == target => {
                        let row = format!("{target},{sd}");
                        attained.next();
                        row
                    }
                    _ => format!("{target},"),
                }
            }),
        )?;
        outputs.push(rel);
    }

    let mut section = ctx.base_section();
    section.push("subset_size", opts.subset_size);
    section.push("subsets", opts.subsets);
    section.push("ridge", opts.ridge);
    for output in outputs {
        section.outputs.push(output);
    }
    ctx.record("frontier", section)?;
    Ok(())
}
