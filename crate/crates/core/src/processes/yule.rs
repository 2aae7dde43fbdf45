//! Yule processes, with and without a deterministic killing schedule.

use std::fmt;
use std::sync::Arc;

use rand_distr::{Distribution, Gamma, Poisson};

use super::params::YuleParams;
use crate::error::{Error, Result};
use crate::kernel::{exp1, run_ctmc, FnGenerator, Generator, RngStream, StopReason, StoppingRule, Trajectory};

/// Pure-birth generator: `x -> x + 1` at rate `mu * x`.
pub fn yule_generator(mu: f64) -> impl Generator {
    FnGenerator::new(1, &[&[1]], move |s, r| r[0] = mu * s[0] as f64)
}

/// Constant path of a process started in the absorbing state 0.
fn degenerate_path(stop: &StoppingRule) -> Trajectory {
    let mut traj = Trajectory::new(&[0]);
    match stop.horizon_value() {
        Some(h) => traj.finish(h, StopReason::Horizon),
        None => traj.finish(0.0, StopReason::Stalled),
    }
    traj.degenerate = true;
    traj
}

/// Simulates a Yule process from `y0` individuals.
///
/// `y0 = 0` yields a constant-zero path flagged `degenerate`.
pub fn simulate_yule(params: &YuleParams, y0: i64, stop: &StoppingRule, rng: &mut RngStream) -> Result<Trajectory> {
    if y0 < 0 {
        return Err(Error::param("y0", format!("must be >= 0, got {y0}")));
    }
    if y0 == 0 {
        return Ok(degenerate_path(stop));
    }
    run_ctmc(&yule_generator(params.mu), &[y0], stop, rng)
}

/// Number of births in a Yule process of rate `mu` started from `w`
/// individuals, over a window of length `dt`.
///
/// The count is negative binomial with `w` successes and success probability
/// `exp(-mu dt)`, drawn as a gamma-mixed Poisson variate.
pub(crate) fn yule_increment(w: i64, mu: f64, dt: f64, rng: &mut RngStream) -> Result<i64> {
    if w <= 0 || dt <= 0.0 {
        return Ok(0);
    }
    let p = (-mu * dt).exp();
    if p >= 1.0 {
        return Ok(0);
    }
    let odds = if p > 0.0 { (1.0 - p) / p } else { f64::INFINITY };
    let gamma = Gamma::new(w as f64, odds).map_err(|e| Error::Domain(format!("yule increment: {e}")))?;
    let mean = gamma.sample(rng);
    if mean == 0.0 {
        return Ok(0);
    }
    if mean.is_nan() || mean >= MAX_EXACT {
        return Err(Error::Domain(format!(
            "population exceeds the exactly representable range (mean increment {mean:e})"
        )));
    }
    let poisson = Poisson::new(mean).map_err(|e| Error::Domain(format!("yule increment: {e}")))?;
    let n: f64 = poisson.sample(rng);
    Ok(n as i64)
}

/// Largest count handled exactly in floating point.
const MAX_EXACT: f64 = 9.0e15;

/// Population above which the killed Yule simulator jumps from one kill
/// epoch to the next instead of resolving individual births.
pub const LUMP_THRESHOLD: i64 = 1024;

type EpochFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

/// Epochs `sigma_1 <= sigma_2 <= ...` at which one individual is removed.
#[derive(Clone)]
pub enum KillSchedule {
    /// A finite list of epochs.
    Epochs(Arc<[f64]>),
    /// `sigma_n = n * spacing`.
    Arithmetic(f64),
    /// `sigma_n = ln(1 + n)`.
    Logarithmic,
    /// `sigma_n = f(n)` for `n >= 1`; checked for monotonicity as it is read.
    Custom(EpochFn),
}

impl fmt::Debug for KillSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KillSchedule::Epochs(e) => write!(f, "Epochs({} epochs)", e.len()),
            KillSchedule::Arithmetic(s) => write!(f, "Arithmetic({s})"),
            KillSchedule::Logarithmic => write!(f, "Logarithmic"),
            KillSchedule::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl KillSchedule {
    /// No killing at all.
    pub fn empty() -> Self {
        KillSchedule::Epochs(Arc::from(Vec::new()))
    }

    pub fn arithmetic(spacing: f64) -> Result<Self> {
        Ok(KillSchedule::Arithmetic(crate::error::positive("spacing", spacing)?))
    }

    pub fn logarithmic() -> Self {
        KillSchedule::Logarithmic
    }

    pub fn from_epochs(epochs: Vec<f64>) -> Result<Self> {
        if let Some(&first) = epochs.first() {
            if !(first.is_finite() && first > 0.0) {
                return Err(Error::param("sigma", format!("first epoch must be > 0, got {first}")));
            }
        }
        for (i, w) in epochs.windows(2).enumerate() {
            if !(w[1].is_finite() && w[1] >= w[0]) {
                return Err(Error::param(
                    "sigma",
                    format!("epochs must be nondecreasing and finite (index {})", i + 1),
                ));
            }
        }
        Ok(KillSchedule::Epochs(Arc::from(epochs)))
    }

    pub fn custom(f: impl Fn(u64) -> f64 + Send + Sync + 'static) -> Self {
        KillSchedule::Custom(Arc::new(f))
    }

    /// The `n`-th epoch (1-based), or `None` past the end of a finite list.
    pub fn epoch(&self, n: u64) -> Option<f64> {
        debug_assert!(n >= 1);
        match self {
            KillSchedule::Epochs(e) => e.get((n - 1) as usize).copied(),
            KillSchedule::Arithmetic(s) => Some(n as f64 * s),
            KillSchedule::Logarithmic => Some((n as f64).ln_1p()),
            KillSchedule::Custom(f) => Some(f(n)),
        }
    }

    /// Number of epochs in `(0, t]`.
    pub fn count(&self, t: f64) -> u64 {
        let mut n = 0;
        while let Some(s) = self.epoch(n + 1) {
            if s > t {
                break;
            }
            n += 1;
        }
        n
    }
}

/// Result of [`simulate_killed_yule`].
#[derive(Debug, Clone)]
pub struct KilledYuleRun {
    pub trajectory: Trajectory,
    pub extinct: bool,
    pub extinction_epoch: Option<f64>,
}

/// Simulates a Yule process of rate `mu` from `w0` individuals in which one
/// individual is removed at every epoch of `kills`. The state 0 is absorbing.
///
/// Once the population exceeds [`LUMP_THRESHOLD`] and a horizon is set, the
/// path is advanced from one kill epoch to the next with the exact Yule
/// transition law; such paths are flagged `thinned`.
pub fn simulate_killed_yule(
    params: &YuleParams,
    w0: i64,
    kills: &KillSchedule,
    stop: &StoppingRule,
    rng: &mut RngStream,
) -> Result<KilledYuleRun> {
    if w0 < 0 {
        return Err(Error::param("w0", format!("must be >= 0, got {w0}")));
    }
    if w0 == 0 {
        return Ok(KilledYuleRun {
            trajectory: degenerate_path(stop),
            extinct: true,
            extinction_epoch: Some(0.0),
        });
    }
    let mu = params.mu;
    let horizon = stop.horizon_value();
    let mut traj = Trajectory::new(&[w0]);
    let mut w = w0;
    let mut t = 0.0;
    let mut events = 0u64;
    let mut n = 1u64;
    let mut next_kill = kills.epoch(1);

    let advance_kill = |n: &mut u64, current: f64| -> Result<Option<f64>> {
        *n += 1;
        let next = kills.epoch(*n);
        if let Some(s) = next {
            if !s.is_finite() || s < current {
                return Err(Error::Model(format!("kill schedule decreases at index {n}: {s} < {current}")));
            }
        }
        Ok(next)
    };

    let reason = loop {
        if w == 0 || stop.absorbed(&[w]) {
            break StopReason::Absorbed;
        }
        if stop.budget_spent(events) {
            break StopReason::EventBudget;
        }
        let kill_due = next_kill.filter(|&s| horizon.is_none_or(|h| s <= h));

        if w >= LUMP_THRESHOLD && horizon.is_some() {
            let until = kill_due.unwrap_or_else(|| horizon.unwrap());
            w += yule_increment(w, mu, until - t, rng)?;
            t = until;
            traj.thinned = true;
            if let Some(s) = kill_due {
                w -= 1;
                events += 1;
                next_kill = advance_kill(&mut n, s)?;
                record(&mut traj, t, w);
                continue;
            }
            record(&mut traj, t, w);
            break StopReason::Horizon;
        }

        let birth_at = t + exp1(rng) / (mu * w as f64);
        match kill_due {
            Some(s) if s <= birth_at => {
                t = s;
                w -= 1;
                next_kill = advance_kill(&mut n, s)?;
            }
            _ => {
                if let Some(h) = horizon {
                    if birth_at > h {
                        t = h;
                        break StopReason::Horizon;
                    }
                }
                t = if birth_at > t { birth_at } else { f64::from_bits(t.to_bits() + 1) };
                w += 1;
            }
        }
        events += 1;
        record(&mut traj, t, w);
    };

    let extinct = w == 0;
    let extinction_epoch = extinct.then_some(t);
    traj.finish(t, reason);
    Ok(KilledYuleRun {
        trajectory: traj,
        extinct,
        extinction_epoch,
    })
}

/// Appends an epoch, merging simultaneous kills into one row.
fn record(traj: &mut Trajectory, t: f64, w: i64) {
    if t > *traj.times().last().unwrap() {
        traj.push(t, &[w]);
    } else {
        traj.replace_last(&[w]);
    }
}
