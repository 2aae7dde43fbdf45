use std::fmt;
use std::sync::Arc;

use crate::error::{positive, Error, Result};

/// Per-individual birth rate of a Yule process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YuleParams {
    pub mu: f64,
}

impl YuleParams {
    pub fn new(mu: f64) -> Result<Self> {
        Ok(YuleParams { mu: positive("mu", mu)? })
    }
}

/// Renewing birth-death process: birth rate `mu_z * max(z, 1)`, death rate
/// `nu * z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbhParams {
    pub mu_z: f64,
    pub nu: f64,
}

impl RbhParams {
    pub fn new(mu_z: f64, nu: f64) -> Result<Self> {
        Ok(RbhParams {
            mu_z: positive("mu_z", mu_z)?,
            nu: positive("nu", nu)?,
        })
    }

    /// Malthusian parameter `mu_z - nu`.
    pub fn malthusian(&self) -> f64 {
        self.mu_z - self.nu
    }

    /// Per-particle event rate of the embedded binary branching process.
    pub fn split_rate(&self) -> f64 {
        self.mu_z + self.nu
    }

    /// Probability that an event of a particle is a split.
    pub fn split_prob(&self) -> f64 {
        self.mu_z / (self.mu_z + self.nu)
    }

    /// Extinction probability of the branching process started from one
    /// particle.
    pub fn extinction_prob(&self) -> f64 {
        (self.nu / self.mu_z).min(1.0)
    }

    /// Load `mu_z / nu`; the process is positive recurrent iff this is < 1.
    pub fn load(&self) -> f64 {
        self.mu_z / self.nu
    }
}

/// State-dependent efficiency `r(x0, x1)` in `[0, 1]` of chunk transfers.
#[derive(Clone)]
pub enum RateFunction {
    /// `r` identically equal to `delta`.
    Constant(f64),
    /// `r = x0 / (x0 + x1)`.
    DownloadShare,
    /// `r = min(1, alpha * x0 / x1)`.
    CappedRatio(f64),
    /// User-supplied function. `tends_to_one` declares whether
    /// `r(x0, x1) -> 1` as `x0 -> infinity` for every fixed `x1`.
    Custom {
        f: Arc<dyn Fn(i64, i64) -> f64 + Send + Sync>,
        tends_to_one: bool,
    },
}

impl fmt::Debug for RateFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateFunction::Constant(d) => write!(f, "Constant({d})"),
            RateFunction::DownloadShare => write!(f, "DownloadShare"),
            RateFunction::CappedRatio(a) => write!(f, "CappedRatio({a})"),
            RateFunction::Custom { tends_to_one, .. } => {
                write!(f, "Custom {{ tends_to_one: {tends_to_one} }}")
            }
        }
    }
}

impl RateFunction {
    pub fn constant(delta: f64) -> Result<Self> {
        if delta > 0.0 && delta <= 1.0 {
            Ok(RateFunction::Constant(delta))
        } else {
            Err(Error::param("delta", format!("must lie in (0, 1], got {delta}")))
        }
    }

    pub fn capped_ratio(alpha: f64) -> Result<Self> {
        Ok(RateFunction::CappedRatio(positive("alpha", alpha)?))
    }

    pub fn custom(f: impl Fn(i64, i64) -> f64 + Send + Sync + 'static, tends_to_one: bool) -> Self {
        RateFunction::Custom {
            f: Arc::new(f),
            tends_to_one,
        }
    }

    /// Evaluates `r` at `(x0, x1)`.
    ///
    /// At `x0 = 0` the transfer is disabled anyway; the share-based forms
    /// return 0 there and `CappedRatio` returns 1 when `x1 = 0 < x0`.
    pub fn eval(&self, x0: i64, x1: i64) -> f64 {
        match self {
            RateFunction::Constant(d) => *d,
            RateFunction::DownloadShare => {
                if x0 <= 0 {
                    0.0
                } else {
                    x0 as f64 / (x0 + x1) as f64
                }
            }
            RateFunction::CappedRatio(alpha) => {
                if x0 <= 0 {
                    0.0
                } else if x1 == 0 {
                    1.0
                } else {
                    (alpha * x0 as f64 / x1 as f64).min(1.0)
                }
            }
            RateFunction::Custom { f, .. } => f(x0, x1),
        }
    }

    /// Whether `r(x0, x1) -> 1` as `x0 -> infinity` for every `x1`.
    pub fn tends_to_one(&self) -> bool {
        match self {
            RateFunction::Constant(d) => *d == 1.0,
            RateFunction::DownloadShare | RateFunction::CappedRatio(_) => true,
            RateFunction::Custom { tends_to_one, .. } => *tends_to_one,
        }
    }

    pub fn is_identically_one(&self) -> bool {
        matches!(self, RateFunction::Constant(d) if *d == 1.0)
    }
}

/// How the server count enters the transfer rate when no peer holds the file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// `max(x1, 1)`: a standby server activates when the swarm is empty.
    #[default]
    OrOne,
    /// `x1 + 1`: one permanent server is always active.
    PlusOne,
}

impl Boundary {
    pub fn servers(self, x1: i64) -> f64 {
        match self {
            Boundary::OrOne => x1.max(1) as f64,
            Boundary::PlusOne => (x1 + 1) as f64,
        }
    }
}

/// Single-chunk network: arrivals, one transfer stage, departures.
#[derive(Debug, Clone)]
pub struct SingleChunkParams {
    pub lambda: f64,
    pub mu: f64,
    pub nu: f64,
    pub rate_fn: RateFunction,
    pub boundary: Boundary,
}

impl SingleChunkParams {
    pub fn new(lambda: f64, mu: f64, nu: f64, rate_fn: RateFunction, boundary: Boundary) -> Result<Self> {
        Ok(SingleChunkParams {
            lambda: positive("lambda", lambda)?,
            mu: positive("mu", mu)?,
            nu: positive("nu", nu)?,
            rate_fn,
            boundary,
        })
    }

    /// `r = 1`, `max(x1, 1)` boundary.
    pub fn plain(lambda: f64, mu: f64, nu: f64) -> Result<Self> {
        Self::new(lambda, mu, nu, RateFunction::Constant(1.0), Boundary::OrOne)
    }
}

/// Free process: the single-chunk model with constant efficiency `delta` and
/// no positivity constraint on the first queue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeParams {
    pub delta: f64,
    pub mu: f64,
    pub nu: f64,
    /// Arrival rate; zero is allowed.
    pub lambda: f64,
}

impl FreeParams {
    pub fn new(delta: f64, mu: f64, nu: f64, lambda: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::param("delta", format!("must lie in (0, 1], got {delta}")));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::param("lambda", format!("must be finite and >= 0, got {lambda}")));
        }
        Ok(FreeParams {
            delta,
            mu: positive("mu", mu)?,
            nu: positive("nu", nu)?,
            lambda,
        })
    }
}

/// Two-chunk network with sequential chunk retrieval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoChunkParams {
    pub lambda: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub nu: f64,
}

impl TwoChunkParams {
    pub fn new(lambda: f64, mu1: f64, mu2: f64, nu: f64) -> Result<Self> {
        Ok(TwoChunkParams {
            lambda: positive("lambda", lambda)?,
            mu1: positive("mu1", mu1)?,
            mu2: positive("mu2", mu2)?,
            nu: positive("nu", nu)?,
        })
    }

    pub fn saturated(&self) -> SaturatedParams {
        SaturatedParams {
            mu1: self.mu1,
            mu2: self.mu2,
            nu: self.nu,
        }
    }
}

/// The last two queues of the two-chunk network with the first queue never
/// empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturatedParams {
    pub mu1: f64,
    pub mu2: f64,
    pub nu: f64,
}

impl SaturatedParams {
    pub fn new(mu1: f64, mu2: f64, nu: f64) -> Result<Self> {
        Ok(SaturatedParams {
            mu1: positive("mu1", mu1)?,
            mu2: positive("mu2", mu2)?,
            nu: positive("nu", nu)?,
        })
    }

    /// The birth-death process followed by the last queue while the middle
    /// queue is non-empty.
    pub fn last_queue(&self) -> RbhParams {
        RbhParams {
            mu_z: self.mu2,
            nu: self.nu,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_branching_quantities() {
        let p = RbhParams::new(2.0, 1.0).unwrap();
        assert_eq!(p.malthusian(), 1.0);
        assert_eq!(p.split_rate(), 3.0);
        assert!((p.split_prob() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(p.extinction_prob(), 0.5);
        // q = (1 - p) / p
        assert!((p.extinction_prob() - (1.0 - p.split_prob()) / p.split_prob()).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_rates() {
        assert!(RbhParams::new(0.0, 1.0).is_err());
        assert!(YuleParams::new(-1.0).is_err());
        let err = TwoChunkParams::new(-1.0, 1.0, 1.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("lambda"));
        assert!(RateFunction::constant(0.0).is_err());
        assert!(RateFunction::constant(1.5).is_err());
    }

    #[test]
    fn rate_functions_stay_in_unit_interval() {
        let fns = [
            RateFunction::Constant(0.3),
            RateFunction::DownloadShare,
            RateFunction::CappedRatio(0.7),
            RateFunction::CappedRatio(5.0),
        ];
        for r in &fns {
            for x0 in 0..30 {
                for x1 in 0..30 {
                    let v = r.eval(x0, x1);
                    assert!((0.0..=1.0).contains(&v), "{r:?} at ({x0},{x1}) = {v}");
                }
            }
        }
    }

    #[test]
    fn share_forms() {
        assert_eq!(RateFunction::DownloadShare.eval(3, 1), 0.75);
        assert_eq!(RateFunction::CappedRatio(1.0).eval(1, 4), 0.25);
        assert_eq!(RateFunction::CappedRatio(1.0).eval(8, 4), 1.0);
        assert_eq!(RateFunction::CappedRatio(1.0).eval(2, 0), 1.0);
        assert!(RateFunction::DownloadShare.tends_to_one());
        assert!(!RateFunction::Constant(0.5).tends_to_one());
    }

    #[test]
    fn boundary_server_counts() {
        assert_eq!(Boundary::OrOne.servers(0), 1.0);
        assert_eq!(Boundary::OrOne.servers(4), 4.0);
        assert_eq!(Boundary::PlusOne.servers(0), 1.0);
        assert_eq!(Boundary::PlusOne.servers(4), 5.0);
    }
}
