//! Adaptive direction prediction for asset returns and the evaluation
//! stack around it.
//!
//! The crate is organized around four layers:
//!
//! - [`engine`]: per-memory-length strategy banks with virtual scoring and
//!   endogenous memory-length selection.
//! - [`data`]: price ingestion and alignment, horizon resampling, return
//!   and sign series, and seeded synthetic generators.
//! - [`backtest`]: the unit-long/flat trading rule with proportional
//!   transaction costs, plus success-rate, ratio, and usage metrics.
//! - [`portfolio`]: equally weighted aggregates and closed-form
//!   mean-variance frontiers, including median frontiers over random
//!   asset subsets.
//!
//! Everything is deterministic given the configured seeds; states for
//! different assets are independent and safe to process in parallel.

pub mod backtest;
pub mod data;
pub mod engine;
pub mod error;
pub mod portfolio;

pub use error::{Error, Result};
