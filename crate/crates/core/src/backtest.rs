//! Costed backtests of the adaptive predictor plus the evaluation metrics
//! built on them: success rates, rolling windows, equity ratios against
//! buy-and-hold, and selection-usage distributions.
//!
//! The trading rule holds one unit of the asset during periods predicted to
//! move up and stays flat otherwise. Each position change is one
//! transaction and multiplies net wealth by `1 - cost_rate`.

use rayon::prelude::*;

use crate::data::ReturnSeries;
use crate::engine::{
    AdaptiveState, Direction, EngineConfig, Selection, DEFAULT_MAX_MEMORY, DEFAULT_STRATEGY_CAP,
};
use crate::error::{Error, Result};

/// Parameters for one backtest run.
#[derive(Debug, Clone, PartialEq)]
pub struct BacktestConfig {
    pub strategy_cap: usize,
    pub max_memory: u8,
    /// Proportional cost per transaction (per leg), e.g. 0.001 for 0.1%.
    pub cost_rate: f64,
    /// Scored steps excluded from reported metrics while scores accumulate.
    pub learn_in: usize,
    /// Rolling-window length in scored steps.
    pub window: usize,
    /// Steps per period of the input return series.
    pub horizon: usize,
    pub seed: u64,
    /// Run a single fixed memory length instead of adaptive selection.
    /// Scoring still starts at `max_memory` so runs stay comparable.
    pub fixed_memory: Option<u8>,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        Self {
            strategy_cap: DEFAULT_STRATEGY_CAP,
            max_memory: DEFAULT_MAX_MEMORY,
            cost_rate: 0.001,
            learn_in: 500,
            window: 250,
            horizon: 1,
            seed: 0,
            fixed_memory: None,
        }
    }
}

impl BacktestConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.cost_rate) {
            return Err(Error::InvalidParameter(format!(
                "cost rate must be in [0, 1), got {}",
                self.cost_rate
            )));
        }
        if self.window == 0 {
            return Err(Error::InvalidParameter("window must be at least 1".into()));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be at least 1".into()));
        }
        Ok(())
    }

    fn engine_config(&self) -> EngineConfig {
        EngineConfig {
            max_memory: self.max_memory,
            strategy_cap: self.strategy_cap,
            fixed_memory: self.fixed_memory,
            seed: self.seed,
        }
    }
}

/// Wealth paths produced by the unit-long/flat rule for a prediction
/// stream. Equity vectors have one more entry than there are steps; index 0
/// is the initial wealth of 1.
#[derive(Debug, Clone)]
pub struct TradeAccounting {
    pub positions: Vec<bool>,
    pub equity_gross: Vec<f64>,
    pub equity_net: Vec<f64>,
    pub bh_equity: Vec<f64>,
    pub transactions: usize,
}

/// Apply the trading rule to an arbitrary prediction stream. The position
/// during step `t` is long iff `predictions[t]` is up; every change from
/// `initial_position` onward is one costed transaction.
pub fn apply_trading_rule(
    predictions: &[Direction],
    returns: &[f64],
    cost_rate: f64,
    initial_position: bool,
) -> Result<TradeAccounting> {
    if predictions.len() != returns.len() {
        return Err(Error::InvalidParameter(format!(
            "predictions ({}) and returns ({}) differ in length",
            predictions.len(),
            returns.len()
        )));
    }
    if !(0.0..1.0).contains(&cost_rate) {
        return Err(Error::InvalidParameter(format!(
            "cost rate must be in [0, 1), got {cost_rate}"
        )));
    }

    let steps = predictions.len();
    let mut positions = Vec::with_capacity(steps);
    let mut equity_gross = Vec::with_capacity(steps + 1);
    let mut equity_net = Vec::with_capacity(steps + 1);
    let mut bh_equity = Vec::with_capacity(steps + 1);
    equity_gross.push(1.0);
    equity_net.push(1.0);
    bh_equity.push(1.0);

    let mut gross = 1.0f64;
    let mut net = 1.0f64;
    let mut bh = 1.0f64;
    let mut prev = initial_position;
    let mut transactions = 0usize;

    for (&pred, &r) in predictions.iter().zip(returns) {
        let pos = pred == Direction::Up;
        if pos != prev {
            net *= 1.0 - cost_rate;
            transactions += 1;
        }
        let step_factor = if pos { 1.0 + r } else { 1.0 };
        gross *= step_factor;
        net *= step_factor;
        bh *= 1.0 + r;
        positions.push(pos);
        equity_gross.push(gross);
        equity_net.push(net);
        bh_equity.push(bh);
        prev = pos;
    }

    Ok(TradeAccounting {
        positions,
        equity_gross,
        equity_net,
        bh_equity,
        transactions,
    })
}

/// Full record of one backtest: predictions, positions, wealth paths, and
/// the per-step memory/strategy selections. Step indices are relative to
/// the scoring start (`start_step` changes into the series).
#[derive(Debug, Clone)]
pub struct BacktestResult {
    pub asset_id: String,
    pub config: BacktestConfig,
    /// Index of the first scored change: equals `config.max_memory`.
    pub start_step: usize,
    /// Per-period simple returns over the scored steps.
    pub returns: Vec<f64>,
    pub predictions: Vec<Direction>,
    pub realized: Vec<Direction>,
    pub positions: Vec<bool>,
    /// Wealth multiples (length `scored_steps() + 1`, starting at 1.0).
    pub equity_gross: Vec<f64>,
    pub equity_net: Vec<f64>,
    pub bh_equity: Vec<f64>,
    pub transactions: usize,
    pub selection_log: Vec<Selection>,
}

/// Run the predictor over a return series and account for the trading rule.
///
/// For each step from the unified scoring start the prediction is issued
/// before the realized sign is revealed, then every bank is scored.
pub fn run_backtest(returns: &ReturnSeries, config: &BacktestConfig) -> Result<BacktestResult> {
    config.validate()?;
    if returns.horizon() != config.horizon {
        return Err(Error::InvalidParameter(format!(
            "return series horizon {} does not match configured horizon {}",
            returns.horizon(),
            config.horizon
        )));
    }
    let n = returns.len();
    let start = config.max_memory as usize;
    if n <= start + 1 {
        return Err(Error::SeriesTooShort {
            needed: start + 2,
            available: n,
        });
    }

    let mut state = AdaptiveState::new(&config.engine_config())?;
    let signs = returns.signs();
    let mut predictions = Vec::with_capacity(n - start);
    for t in start..n {
        predictions.push(state.predict_next(&signs[..t])?);
        state.update_scores(&signs[..t], signs[t])?;
    }

    let scored_returns = returns.simple_returns()[start..].to_vec();
    let accounting = apply_trading_rule(&predictions, &scored_returns, config.cost_rate, false)?;

    Ok(BacktestResult {
        asset_id: returns.asset_id().to_string(),
        config: config.clone(),
        start_step: start,
        returns: scored_returns,
        predictions,
        realized: signs[start..].to_vec(),
        positions: accounting.positions,
        equity_gross: accounting.equity_gross,
        equity_net: accounting.equity_net,
        bh_equity: accounting.bh_equity,
        transactions: accounting.transactions,
        selection_log: state.selection_log().to_vec(),
    })
}

/// Backtest several assets in parallel. Each asset gets its own state with
/// seed `config.seed ^ asset_index` for reproducibility; results come back
/// in input order.
pub fn run_universe(
    universe: &[ReturnSeries],
    config: &BacktestConfig,
) -> Result<Vec<BacktestResult>> {
    universe
        .par_iter()
        .enumerate()
        .map(|(i, series)| {
            let mut asset_config = config.clone();
            asset_config.seed = config.seed ^ i as u64;
            run_backtest(series, &asset_config)
        })
        .collect()
}

/// Selection-usage fractions: how often each memory length and each
/// (memory, strategy) pair was chosen.
#[derive(Debug, Clone)]
pub struct UsageDistributions {
    /// Fractions per selected memory length, ascending by m; sums to 1.
    pub memory_usage: Vec<(u8, f64)>,
    /// Fractions per selected strategy, sorted descending; sums to 1.
    pub strategy_usage: Vec<(Selection, f64)>,
}

/// Usage fractions over an arbitrary slice of a selection log.
pub fn usage_from_log(log: &[Selection]) -> Result<UsageDistributions> {
    if log.is_empty() {
        return Err(Error::EmptyInput("selection log"));
    }
    let total = log.len() as f64;
    let mut by_memory: std::collections::BTreeMap<u8, usize> = Default::default();
    let mut by_strategy: std::collections::BTreeMap<(u8, u32), usize> = Default::default();
    for sel in log {
        *by_memory.entry(sel.memory).or_insert(0) += 1;
        *by_strategy.entry((sel.memory, sel.strategy_index)).or_insert(0) += 1;
    }
    let memory_usage = by_memory
        .into_iter()
        .map(|(m, c)| (m, c as f64 / total))
        .collect();
    let mut strategy_usage: Vec<(Selection, f64)> = by_strategy
        .into_iter()
        .map(|((memory, strategy_index), c)| {
            (
                Selection {
                    memory,
                    strategy_index,
                },
                c as f64 / total,
            )
        })
        .collect();
    strategy_usage.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("fractions are finite")
            .then_with(|| (a.0.memory, a.0.strategy_index).cmp(&(b.0.memory, b.0.strategy_index)))
    });
    Ok(UsageDistributions {
        memory_usage,
        strategy_usage,
    })
}

impl BacktestResult {
    pub fn scored_steps(&self) -> usize {
        self.predictions.len()
    }

    /// Fraction of steps in `[from, to)` where the prediction matched the
    /// realized sign.
    pub fn success_rate(&self, from: usize, to: usize) -> Result<f64> {
        if from >= to || to > self.scored_steps() {
            return Err(Error::InvalidParameter(format!(
                "step range [{from}, {to}) is empty or out of bounds (0..{})",
                self.scored_steps()
            )));
        }
        let hits = (from..to)
            .filter(|&t| self.predictions[t] == self.realized[t])
            .count();
        Ok(hits as f64 / (to - from) as f64)
    }

    /// Success rate over each trailing window: one value per step from the
    /// `window`-th scored step onward.
    pub fn rolling_success(&self, window: usize) -> Result<Vec<f64>> {
        rolling_success_over(&self.predictions, &self.realized, window)
    }

    /// Elementwise strategy equity divided by buy-and-hold equity, over the
    /// full curves from the scoring start. Values above 1 mean the strategy
    /// is ahead.
    pub fn return_ratio(&self, net: bool) -> Vec<f64> {
        let equity = if net { &self.equity_net } else { &self.equity_gross };
        equity
            .iter()
            .zip(&self.bh_equity)
            .map(|(e, b)| e / b)
            .collect()
    }

    /// Recompound wealth paths from scored step `from` onward, treating the
    /// position already held at the boundary as cost-free. This is the
    /// basis for reported metrics that exclude the learn-in steps.
    pub fn window_equity(&self, from: usize) -> Result<TradeAccounting> {
        if from >= self.scored_steps() {
            return Err(Error::InvalidParameter(format!(
                "window start {from} is beyond the {} scored steps",
                self.scored_steps()
            )));
        }
        let initial = if from == 0 {
            false
        } else {
            self.positions[from - 1]
        };
        apply_trading_rule(
            &self.predictions[from..],
            &self.returns[from..],
            self.config.cost_rate,
            initial,
        )
    }

    /// Per-step simple returns of the strategy net of costs.
    pub fn net_step_returns(&self) -> Vec<f64> {
        let mut prev = false;
        let mut out = Vec::with_capacity(self.scored_steps());
        for (&pos, &r) in self.positions.iter().zip(&self.returns) {
            let mut factor = if pos { 1.0 + r } else { 1.0 };
            if pos != prev {
                factor *= 1.0 - self.config.cost_rate;
            }
            out.push(factor - 1.0);
            prev = pos;
        }
        out
    }

    /// Usage fractions over the full selection log.
    pub fn usage_distributions(&self) -> Result<UsageDistributions> {
        usage_from_log(&self.selection_log)
    }
}

/// Rolling success rate of a prediction stream against realized signs.
pub fn rolling_success_over(
    predictions: &[Direction],
    realized: &[Direction],
    window: usize,
) -> Result<Vec<f64>> {
    if window == 0 {
        return Err(Error::InvalidParameter("window must be at least 1".into()));
    }
    let n = predictions.len().min(realized.len());
    if window > n {
        return Err(Error::WindowTooLong {
            window,
            available: n,
        });
    }
    let mut out = Vec::with_capacity(n - window + 1);
    let mut hits = 0usize;
    for t in 0..n {
        if predictions[t] == realized[t] {
            hits += 1;
        }
        if t + 1 >= window {
            out.push(hits as f64 / window as f64);
            if predictions[t + 1 - window] == realized[t + 1 - window] {
                hits -= 1;
            }
        }
    }
    Ok(out)
}

/// Benchmark achieved by the best constant prediction per asset: the
/// observation-weighted average of `max(up fraction, down fraction)`.
pub fn oracle_success_rate(universe: &[ReturnSeries]) -> Result<f64> {
    if universe.is_empty() {
        return Err(Error::EmptyInput("return series collection"));
    }
    let mut best = 0usize;
    let mut total = 0usize;
    for series in universe {
        let ups = series
            .signs()
            .iter()
            .filter(|&&d| d == Direction::Up)
            .count();
        best += ups.max(series.len() - ups);
        total += series.len();
    }
    if total == 0 {
        return Err(Error::EmptyInput("return series collection"));
    }
    Ok(best as f64 / total as f64)
}
