//! Exact stochastic simulation and stability analysis for chunk-based
//! file-sharing networks and the interacting branching processes behind them.
//!
//! * [`kernel`]: seeded Gillespie simulation, trajectories, replications.
//! * [`processes`]: the Yule, killed-Yule, renewing birth-death, single-chunk,
//!   free, two-chunk, saturated and coupled models, plus the `(W, Z)` pair and
//!   the embedded `V` chain.
//! * [`analysis`]: closed-form thresholds, stationary laws, regime
//!   classification and the Monte Carlo estimators that check limit claims.
//! * `cli` (feature `cli`): JSON-configured batch front-end.

pub mod analysis;
#[cfg(feature = "cli")]
pub mod cli;
mod error;
pub mod kernel;
pub mod processes;

pub use error::{Error, Result};
