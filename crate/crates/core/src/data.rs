//! Price ingestion and alignment, horizon resampling, return/sign series,
//! and seeded synthetic price generators.
//!
//! Input format: long-form CSV with header `date,ticker,close`, ISO-8601
//! dates, one close per (date, ticker). Tickers that do not cover every
//! date present in the file are dropped with a warning so that all
//! surviving series share one date grid.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use chrono::{Days, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::engine::Direction;
use crate::error::{Error, Result};

/// A per-asset price path on a strictly increasing date grid.
///
/// `step` records how many original observations one entry spans (1 for
/// as-loaded data, the horizon after [`resample`]).
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    asset_id: String,
    dates: Vec<NaiveDate>,
    prices: Vec<f64>,
    step: usize,
}

impl PriceSeries {
    pub fn new(
        asset_id: impl Into<String>,
        dates: Vec<NaiveDate>,
        prices: Vec<f64>,
    ) -> Result<Self> {
        if dates.len() != prices.len() {
            return Err(Error::InvalidParameter(format!(
                "dates ({}) and prices ({}) differ in length",
                dates.len(),
                prices.len()
            )));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "dates must be strictly increasing".into(),
            ));
        }
        if prices.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err(Error::InvalidParameter(
                "prices must be finite and positive".into(),
            ));
        }
        Ok(Self {
            asset_id: asset_id.into(),
            dates,
            prices,
            step: 1,
        })
    }

    pub fn asset_id(&self) -> &str {
        &self.asset_id
    }

    pub fn with_asset_id(mut self, asset_id: impl Into<String>) -> Self {
        self.asset_id = asset_id.into();
        self
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    /// Original observations spanned by one entry of this series.
    pub fn step(&self) -> usize {
        self.step
    }
}

/// Per-period simple returns and their signs for one asset at a given
/// horizon (periods per return: 1, 5, or 20 in practice).
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    asset_id: String,
    horizon: usize,
    simple_returns: Vec<f64>,
    signs: Vec<Direction>,
}

impl ReturnSeries {
    pub fn asset_id(&self) -> &str {
        &self.asset_id
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn simple_returns(&self) -> &[f64] {
        &self.simple_returns
    }

    pub fn signs(&self) -> &[Direction] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.simple_returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simple_returns.is_empty()
    }
}

/// Result of loading a price file: aligned series plus warnings for any
/// tickers that were dropped.
#[derive(Debug, Clone)]
pub struct LoadedPrices {
    pub series: Vec<PriceSeries>,
    pub warnings: Vec<String>,
}

/// Parse long-form `date,ticker,close` CSV into one aligned [`PriceSeries`]
/// per ticker, sorted by ticker. Tickers missing any date from the union of
/// all dates in the stream are dropped with a warning. An empty stream
/// yields an empty collection.
pub fn load_prices<R: Read>(reader: R) -> Result<LoadedPrices> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    {
        let headers = csv_reader.headers()?;
        if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
            return Ok(LoadedPrices {
                series: Vec::new(),
                warnings: Vec::new(),
            });
        }
        let got: Vec<String> = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
        if got != ["date", "ticker", "close"] {
            return Err(Error::MalformedRow {
                line: 1,
                message: format!("expected header date,ticker,close, got {}", got.join(",")),
            });
        }
    }

    let mut by_ticker: BTreeMap<String, BTreeMap<NaiveDate, f64>> = BTreeMap::new();
    let mut all_dates: BTreeSet<NaiveDate> = BTreeSet::new();

    for record in csv_reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 3 {
            return Err(Error::MalformedRow {
                line,
                message: format!("expected 3 fields, got {}", record.len()),
            });
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|e| {
            Error::MalformedRow {
                line,
                message: format!("bad date {:?}: {e}", &record[0]),
            }
        })?;
        let ticker = record[1].to_string();
        if ticker.is_empty() {
            return Err(Error::MalformedRow {
                line,
                message: "empty ticker".into(),
            });
        }
        let close: f64 = record[2].parse().map_err(|e| Error::MalformedRow {
            line,
            message: format!("bad price {:?}: {e}", &record[2]),
        })?;
        if !close.is_finite() || close <= 0.0 {
            return Err(Error::NonPositivePrice {
                line,
                ticker,
                value: close,
            });
        }
        all_dates.insert(date);
        if by_ticker.entry(ticker.clone()).or_default().insert(date, close).is_some() {
            return Err(Error::DuplicateEntry {
                line,
                ticker,
                date: date.to_string(),
            });
        }
    }

    let grid: Vec<NaiveDate> = all_dates.into_iter().collect();
    let mut series = Vec::new();
    let mut warnings = Vec::new();
    for (ticker, prices) in by_ticker {
        if prices.len() == grid.len() {
            let values: Vec<f64> = prices.values().copied().collect();
            series.push(PriceSeries::new(ticker, grid.clone(), values)?);
        } else {
            warnings.push(format!(
                "ticker {ticker} dropped: covers {} of {} dates",
                prices.len(),
                grid.len()
            ));
        }
    }
    Ok(LoadedPrices { series, warnings })
}

/// Keep every `horizon`-th observation starting from index 0. A horizon of
/// 1 returns the series unchanged.
pub fn resample(series: &PriceSeries, horizon: usize) -> Result<PriceSeries> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    if series.len() <= horizon {
        return Err(Error::SeriesTooShort {
            needed: horizon + 1,
            available: series.len(),
        });
    }
    let dates = series.dates.iter().step_by(horizon).copied().collect();
    let prices = series.prices.iter().step_by(horizon).copied().collect();
    Ok(PriceSeries {
        asset_id: series.asset_id.clone(),
        dates,
        prices,
        step: series.step * horizon,
    })
}

/// Simple returns and signs between consecutive observations. A zero price
/// change counts as `Down`.
pub fn to_returns(series: &PriceSeries) -> Result<ReturnSeries> {
    if series.len() < 2 {
        return Err(Error::SeriesTooShort {
            needed: 2,
            available: series.len(),
        });
    }
    let simple_returns: Vec<f64> = series
        .prices
        .windows(2)
        .map(|w| w[1] / w[0] - 1.0)
        .collect();
    let signs = simple_returns.iter().map(|&r| Direction::from_return(r)).collect();
    Ok(ReturnSeries {
        asset_id: series.asset_id.clone(),
        horizon: series.step,
        simple_returns,
        signs,
    })
}

/// Synthetic price-path generators used for testing and benchmarks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SyntheticKind {
    /// Equiprobable +/-1% moves.
    IidCoin,
    /// Strictly increasing prices (+0.1% per step); ignores the seed.
    Trend,
    /// Sign pattern repeating with the given period, realized as +/-1%
    /// moves: the first `ceil(p/2)` steps of each cycle move up, the rest
    /// move down. Ignores the seed.
    Periodic(usize),
    /// Geometric Brownian motion with per-step drift and volatility.
    Gbm { mu: f64, sigma: f64 },
}

/// First date assigned to synthetic series.
const SYNTHETIC_EPOCH: (i32, u32, u32) = (2000, 1, 3);

/// Generate a deterministic synthetic price series of `length` observations.
pub fn synthetic_series(kind: SyntheticKind, length: usize, seed: u64) -> Result<PriceSeries> {
    if length < 2 {
        return Err(Error::SeriesTooShort {
            needed: 2,
            available: length,
        });
    }
    if let SyntheticKind::Periodic(p) = kind {
        if p == 0 {
            return Err(Error::InvalidParameter("period must be at least 1".into()));
        }
    }
    if let SyntheticKind::Gbm { mu, sigma } = kind {
        if !mu.is_finite() || !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gbm parameters must be finite with sigma >= 0, got mu={mu}, sigma={sigma}"
            )));
        }
    }

    let epoch = NaiveDate::from_ymd_opt(SYNTHETIC_EPOCH.0, SYNTHETIC_EPOCH.1, SYNTHETIC_EPOCH.2)
        .expect("valid epoch");
    let dates: Vec<NaiveDate> = (0..length)
        .map(|i| epoch.checked_add_days(Days::new(i as u64)).expect("date in range"))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut prices = Vec::with_capacity(length);
    let mut price = 100.0f64;
    prices.push(price);
    for i in 0..length - 1 {
        let factor = match kind {
            SyntheticKind::IidCoin => {
                if rng.random::<bool>() {
                    1.01
                } else {
                    0.99
                }
            }
            SyntheticKind::Trend => 1.001,
            SyntheticKind::Periodic(p) => {
                if i % p < p.div_ceil(2) {
                    1.01
                } else {
                    0.99
                }
            }
            SyntheticKind::Gbm { mu, sigma } => {
                let z: f64 = StandardNormal.sample(&mut rng);
                (mu - 0.5 * sigma * sigma + sigma * z).exp()
            }
        };
        price *= factor;
        prices.push(price);
    }

    let asset_id = match kind {
        SyntheticKind::IidCoin => "iid-coin".to_string(),
        SyntheticKind::Trend => "trend".to_string(),
        SyntheticKind::Periodic(p) => format!("periodic-{p}"),
        SyntheticKind::Gbm { .. } => "gbm".to_string(),
    };
    PriceSeries::new(asset_id, dates, prices)
}
