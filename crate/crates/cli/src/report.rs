//! The report command: assemble figure-ready CSVs from a completed run
//! directory (simulate at horizon 1, backtest and frontier at horizons 1,
//! 5, and 20).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use mgtrade::portfolio::quantile;

use crate::manifest::{Manifest, Section};
use crate::pipeline::QUANTILE_LEVELS;
use crate::table::{float_cells, parse_f64, read_csv, write_csv};

const REQUIRED_STAGES: [(&str, &str); 7] = [
    ("simulate h=1", "simulate <prices> --horizon 1"),
    ("backtest h=1", "backtest <prices> --horizon 1"),
    ("backtest h=5", "backtest <prices> --horizon 5"),
    ("backtest h=20", "backtest <prices> --horizon 20"),
    ("frontier h=1", "frontier <prices> --horizon 1"),
    ("frontier h=5", "frontier <prices> --horizon 5"),
    ("frontier h=20", "frontier <prices> --horizon 20"),
];

pub fn cmd_report(run_dir: &Path) -> Result<()> {
    let manifest_path = Manifest::path(run_dir);
    if !manifest_path.exists() {
        bail!(
            "no manifest in {}: run simulate, backtest, and frontier first",
            run_dir.display()
        );
    }
    let mut manifest = Manifest::load(run_dir)?;
    for (section, hint) in REQUIRED_STAGES {
        if manifest.section(section).is_none() {
            bail!("missing stage `{section}`: run `mgtrade {hint} --out {}`", run_dir.display());
        }
    }

    let simulate = manifest.section("simulate h=1").expect("checked above");
    let learn_in: usize = simulate
        .get("learn_in")
        .context("manifest simulate section lacks learn_in")?
        .parse()?;
    let tickers: Vec<String> = simulate
        .outputs
        .iter()
        .filter_map(|o| {
            o.strip_prefix("h1/rolling/")
                .and_then(|rest| rest.strip_suffix(".csv"))
                .map(str::to_string)
        })
        .collect();
    if tickers.is_empty() {
        bail!("simulate stage recorded no rolling tables");
    }

    let figures_dir = run_dir.join("figures");
    fs::create_dir_all(&figures_dir)?;
    let mut outputs: Vec<String> = Vec::new();

    write_fig1_fig2(run_dir, &tickers, learn_in, &mut outputs)?;
    write_fig5_fig7(run_dir, &mut outputs)?;
    write_fig6(run_dir, &tickers, &mut outputs)?;

    copy_table(run_dir, "h1/ratio_quantiles_gross.csv", "fig8.csv", &mut outputs)?;
    copy_table(run_dir, "h1/ratio_quantiles_net.csv", "fig9.csv", &mut outputs)?;
    copy_table(run_dir, "h1/portfolio_rolling.csv", "fig10.csv", &mut outputs)?;
    copy_table(run_dir, "h5/ratio_quantiles_net.csv", "fig12_weekly.csv", &mut outputs)?;
    copy_table(run_dir, "h20/ratio_quantiles_net.csv", "fig12_monthly.csv", &mut outputs)?;

    write_frontier_join(run_dir, "h1", "fig11.csv", &mut outputs)?;
    write_frontier_join(run_dir, "h5", "fig13_weekly.csv", &mut outputs)?;
    write_frontier_join(run_dir, "h20", "fig13_monthly.csv", &mut outputs)?;

    let mut section = Section::default();
    section.push("tool_version", env!("CARGO_PKG_VERSION"));
    for output in outputs {
        section.outputs.push(output);
    }
    manifest.record(run_dir, "report", section)?;
    Ok(())
}

/// Rolling success averaged across stocks per memory column (fig 1) and
/// cross-stock quantiles of the adaptive column (fig 2), reported steps
/// only.
fn write_fig1_fig2(
    run_dir: &Path,
    tickers: &[String],
    learn_in: usize,
    outputs: &mut Vec<String>,
) -> Result<()> {
    let mut header: Vec<String> = Vec::new();
    let mut per_ticker_rows: Vec<Vec<Vec<String>>> = Vec::new();
    for ticker in tickers {
        let path = run_dir.join(format!("h1/rolling/{ticker}.csv"));
        let (h, rows) = read_csv(&path)?;
        if header.is_empty() {
            header = h;
        } else if header != h {
            bail!("rolling tables disagree on columns ({ticker})");
        }
        per_ticker_rows.push(rows);
    }
    let n_rows = per_ticker_rows[0].len();
    if per_ticker_rows.iter().any(|r| r.len() != n_rows) {
        bail!("rolling tables disagree on row counts");
    }

    let value_cols = header.len() - 2;
    let fig1_path = run_dir.join("figures/fig1.csv");
    let fig2_path = run_dir.join("figures/fig2.csv");

    let mut fig1_rows = Vec::new();
    let mut fig2_rows = Vec::new();
    for row_idx in 0..n_rows {
        let step: usize = per_ticker_rows[0][row_idx][0].parse()?;
        if step < learn_in {
            continue;
        }
        let date = &per_ticker_rows[0][row_idx][1];

        let mut means = Vec::with_capacity(value_cols);
        for col in 0..value_cols {
            let mut sum = 0.0;
            for rows in &per_ticker_rows {
                sum += parse_f64(&rows[row_idx][col + 2], run_dir)?;
            }
            means.push(sum / tickers.len() as f64);
        }
        fig1_rows.push(format!("{step},{date},{}", float_cells(&means)));

        let adaptive_col = header.len() - 1;
        let mut values: Vec<f64> = per_ticker_rows
            .iter()
            .map(|rows| parse_f64(&rows[row_idx][adaptive_col], run_dir))
            .collect::<Result<_>>()?;
        values.sort_by(|a, b| a.partial_cmp(b).expect("success rates are finite"));
        let cells: Vec<f64> = QUANTILE_LEVELS.iter().map(|(q, _)| quantile(&values, *q)).collect();
        fig2_rows.push(format!("{step},{date},{}", float_cells(&cells)));
    }

    write_csv(&fig1_path, &header.join(","), fig1_rows)?;
    outputs.push("figures/fig1.csv".into());
    write_csv(&fig2_path, "step,date,q10,q25,q50,q75,q90", fig2_rows)?;
    outputs.push("figures/fig2.csv".into());
    Ok(())
}

/// Pooled memory-usage distribution (fig 5) and the per-stock distribution
/// function of sorted memory usage with its cross-stock median (fig 7).
fn write_fig5_fig7(run_dir: &Path, outputs: &mut Vec<String>) -> Result<()> {
    let path = run_dir.join("h1/memory_usage.csv");
    let (header, rows) = read_csv(&path)?;
    let n_memories = header.len() - 1;

    let mut fractions: Vec<Vec<f64>> = Vec::with_capacity(rows.len());
    for row in &rows {
        let f: Vec<f64> = row[1..]
            .iter()
            .map(|c| parse_f64(c, &path))
            .collect::<Result<_>>()?;
        fractions.push(f);
    }

    let means: Vec<f64> = (0..n_memories)
        .map(|m| fractions.iter().map(|f| f[m]).sum::<f64>() / fractions.len() as f64)
        .collect();
    write_csv(
        &run_dir.join("figures/fig5.csv"),
        "memory,fraction",
        means
            .iter()
            .enumerate()
            .map(|(m, f)| format!("{},{f}", m + 1)),
    )?;
    outputs.push("figures/fig5.csv".into());

    // Sort each stock's usage descending, then take per-rank medians of the
    // fraction and its running sum.
    let mut sorted: Vec<Vec<f64>> = fractions;
    for f in &mut sorted {
        f.sort_by(|a, b| b.partial_cmp(a).expect("fractions are finite"));
    }
    let fig7_rows = (0..n_memories).map(|rank| {
        let mut at_rank: Vec<f64> = sorted.iter().map(|f| f[rank]).collect();
        let mut cumulative: Vec<f64> = sorted
            .iter()
            .map(|f| f[..=rank].iter().sum::<f64>())
            .collect();
        at_rank.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        cumulative.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        format!(
            "{},{},{}",
            rank + 1,
            quantile(&at_rank, 0.5),
            quantile(&cumulative, 0.5)
        )
    });
    write_csv(
        &run_dir.join("figures/fig7.csv"),
        "rank,median_fraction,median_cumulative",
        fig7_rows,
    )?;
    outputs.push("figures/fig7.csv".into());
    Ok(())
}

/// Distribution function of sorted strategy-usage fractions from the fixed
/// run at the largest memory length, with the cross-stock median (fig 6).
fn write_fig6(run_dir: &Path, tickers: &[String], outputs: &mut Vec<String>) -> Result<()> {
    let path = run_dir.join("h1/strategy_usage_fixed.csv");
    let (_, rows) = read_csv(&path)?;
    let mut per_ticker: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for row in &rows {
        per_ticker
            .entry(row[0].as_str())
            .or_default()
            .push(parse_f64(&row[3], &path)?);
    }
    if per_ticker.len() != tickers.len() {
        bail!("strategy-usage table covers {} of {} tickers", per_ticker.len(), tickers.len());
    }

    let max_rank = per_ticker.values().map(Vec::len).max().unwrap_or(0);
    let fig6_rows = (0..max_rank).map(|rank| {
        let mut at_rank: Vec<f64> = per_ticker
            .values()
            .map(|f| f.get(rank).copied().unwrap_or(0.0))
            .collect();
        let mut cumulative: Vec<f64> = per_ticker
            .values()
            .map(|f| f[..f.len().min(rank + 1)].iter().sum::<f64>())
            .collect();
        at_rank.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        cumulative.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        format!(
            "{},{},{}",
            rank + 1,
            quantile(&at_rank, 0.5),
            quantile(&cumulative, 0.5)
        )
    });
    write_csv(
        &run_dir.join("figures/fig6.csv"),
        "rank,median_fraction,median_cumulative",
        fig6_rows,
    )?;
    outputs.push("figures/fig6.csv".into());
    Ok(())
}

fn copy_table(
    run_dir: &Path,
    source: &str,
    figure: &str,
    outputs: &mut Vec<String>,
) -> Result<()> {
    let from = run_dir.join(source);
    let to = run_dir.join("figures").join(figure);
    fs::copy(&from, &to)
        .with_context(|| format!("copying {} to {}", from.display(), to.display()))?;
    outputs.push(format!("figures/{figure}"));
    Ok(())
}

/// Merge the strategy and buy-and-hold frontiers of one horizon onto their
/// shared target grid.
fn write_frontier_join(
    run_dir: &Path,
    hdir: &str,
    figure: &str,
    outputs: &mut Vec<String>,
) -> Result<()> {
    let read_frontier = |name: &str| -> Result<Vec<(f64, String, String)>> {
        let path: PathBuf = run_dir.join(format!("{hdir}/frontier_{name}.csv"));
        let (_, rows) = read_csv(&path)?;
        rows.iter()
            .map(|row| Ok((parse_f64(&row[0], &path)?, row[0].clone(), row[1].clone())))
            .collect()
    };
    let strategy = read_frontier("strategy")?;
    let bh = read_frontier("bh")?;

    // Both files share one ascending grid; merge missing targets as empty.
    let mut targets: Vec<(f64, String)> = strategy
        .iter()
        .chain(&bh)
        .map(|(v, s, _)| (*v, s.clone()))
        .collect();
    targets.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("targets are finite"));
    targets.dedup_by(|a, b| a.1 == b.1);

    let strategy_by_key: BTreeMap<&str, &str> = strategy
        .iter()
        .map(|(_, k, v)| (k.as_str(), v.as_str()))
        .collect();
    let bh_by_key: BTreeMap<&str, &str> =
        bh.iter().map(|(_, k, v)| (k.as_str(), v.as_str())).collect();

    write_csv(
        &run_dir.join("figures").join(figure),
        "target_return,strategy_median_stdev,bh_median_stdev",
        targets.iter().map(|(_, key)| {
            format!(
                "{key},{},{}",
                strategy_by_key.get(key.as_str()).copied().unwrap_or(""),
                bh_by_key.get(key.as_str()).copied().unwrap_or("")
            )
        }),
    )?;
    outputs.push(format!("figures/{figure}"));
    Ok(())
}
