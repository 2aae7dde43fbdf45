//! Closed-form thresholds, stationary laws, stability verdicts and Monte
//! Carlo estimators.

mod classify;
mod estimators;
pub mod stationary;
pub mod stats;
mod thresholds;

pub use classify::{classify, short, Network, StabilityVerdict, TailDiagnostic, Verdict, TIE_TOLERANCE};
pub use estimators::{
    estimate_growth_slope, estimate_h0_scaling, estimate_nk, estimate_series_sum, estimate_stationary_departure_rate,
    estimate_survival, estimate_time_average, nk_drift_check, DoublingEstimate, ScalingRow, ScalingTable, SlopeMethod,
    DEFAULT_K, DEFAULT_MAX_STEPS, EXCLUSION_LIMIT, STABILITY_TOLERANCE,
};
pub use stationary::{birth_death_stationary, required_z_max};
pub use thresholds::{eta_star, gamma_eta, lambda_star, ThresholdModel};
