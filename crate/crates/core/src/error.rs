//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by prediction, data, backtest, and portfolio routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient history: need {needed} signs, have {available}")]
    InsufficientHistory { needed: usize, available: usize },

    #[error("memory length mismatch: strategy has m={strategy_m}, history has m={history_m}")]
    MemoryMismatch { strategy_m: u8, history_m: u8 },

    #[error("series too short: need at least {needed} observations, have {available}")]
    SeriesTooShort { needed: usize, available: usize },

    #[error("window of {window} steps exceeds the {available} available steps")]
    WindowTooLong { window: usize, available: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line {line}: {message}")]
    MalformedRow { line: u64, message: String },

    #[error("line {line}: non-positive price {value} for ticker {ticker}")]
    NonPositivePrice {
        line: u64,
        ticker: String,
        value: f64,
    },

    #[error("line {line}: duplicate entry for ({date}, {ticker})")]
    DuplicateEntry {
        line: u64,
        ticker: String,
        date: String,
    },

    #[error("covariance matrix is singular even after ridge regularization")]
    SingularCovariance,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
