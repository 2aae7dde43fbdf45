//! Closed-form stability thresholds.

use std::fmt;

use crate::error::{positive, Error, Result};

/// Which threshold formula to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ThresholdModel {
    /// Single-chunk network with an `x1 ∨ 1` boundary.
    FreeOrOne,
    /// Single-chunk network with an `x1 + 1` boundary.
    FreePlusOne,
    /// Two-chunk network; `mu` is the second-chunk rate `mu2`.
    TwoChunk,
}

impl ThresholdModel {
    pub const NAMES: [&'static str; 3] = ["FreeOrOne", "FreePlusOne", "TwoChunk"];

    pub fn name(self) -> &'static str {
        match self {
            ThresholdModel::FreeOrOne => Self::NAMES[0],
            ThresholdModel::FreePlusOne => Self::NAMES[1],
            ThresholdModel::TwoChunk => Self::NAMES[2],
        }
    }
}

impl fmt::Display for ThresholdModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ThresholdModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "FreeOrOne" | "free_or_one" => Ok(ThresholdModel::FreeOrOne),
            "FreePlusOne" | "free_plus_one" => Ok(ThresholdModel::FreePlusOne),
            "TwoChunk" | "two_chunk" => Ok(ThresholdModel::TwoChunk),
            other => Err(Error::param("model", format!("unknown threshold model `{other}`"))),
        }
    }
}

/// The maximal arrival rate `lambda*` for stability.
///
/// For the `∨ 1` boundary this is `delta mu / ((1 - rho)(1 - log(1 - rho)))`
/// with `rho = delta mu / nu`; it is `+inf` when `rho >= 1`, where the
/// second coordinate of the free process is transient. For the `+ 1`
/// boundary the free process has a geometric law and the threshold is
/// `delta mu nu / (nu - delta mu)`, which needs `nu > delta mu`.
pub fn lambda_star(model: ThresholdModel, mu: f64, nu: f64, delta: f64) -> Result<f64> {
    positive("mu", mu)?;
    positive("nu", nu)?;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::param("delta", format!("must lie in (0, 1], got {delta}")));
    }
    let rate = delta * mu;
    match model {
        ThresholdModel::FreeOrOne | ThresholdModel::TwoChunk => {
            let rho = rate / nu;
            if rho >= 1.0 {
                return Ok(f64::INFINITY);
            }
            Ok(rate / ((1.0 - rho) * (1.0 - (-rho).ln_1p())))
        }
        ThresholdModel::FreePlusOne => {
            if nu <= rate {
                return Err(Error::Domain(format!(
                    "the + 1 boundary threshold needs nu > delta * mu, got nu={nu}, delta*mu={rate}"
                )));
            }
            Ok(rate * nu / (nu - rate))
        }
    }
}

/// Smaller root of `(1 - x) eta^2 - (2 - x) eta + (1 - x) = 0`.
pub fn eta_star(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("eta_star needs 0 < x < 1, got {x}")));
    }
    // The roots multiply to 1; dividing by the larger one avoids the
    // cancellation in `2 - x - sqrt(x(4 - 3x))` as x -> 1.
    let disc = (x * (4.0 - 3.0 * x)).sqrt();
    Ok(2.0 * (1.0 - x) / (2.0 - x + disc))
}

/// Upper bound `mu_z / ((1 - eta)(mu_z - eta (mu_z - nu)))` on the moment
/// `E exp(eta alpha (T_1 + E))` of one excursion of `Z`.
pub fn gamma_eta(eta: f64, mu_z: f64, nu: f64) -> Result<f64> {
    positive("mu_z", mu_z)?;
    positive("nu", nu)?;
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::Domain(format!("gamma_eta needs 0 <= eta < 1, got {eta}")));
    }
    let alpha = mu_z - nu;
    if eta * alpha >= mu_z {
        return Err(Error::Domain(format!("gamma_eta needs eta * (mu_z - nu) < mu_z, got {}", eta * alpha)));
    }
    Ok(mu_z / ((1.0 - eta) * (mu_z - eta * alpha)))
}
