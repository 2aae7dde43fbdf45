//! Joint simulation of the single-chunk network and a free process on shared
//! clocks.
//!
//! The joint chain lives on `(x0, x1, y0, y1)`. Each transition type fires
//! for both components at the smaller of the two rates, and for the faster
//! component alone at the excess rate.

use super::params::{Boundary, FreeParams, SingleChunkParams};
use super::single_chunk::{check_nonneg, transfer_rate};
use crate::error::{Error, Result};
use crate::kernel::{simulate, FnGenerator, Observer, RngStream, StopReason, StoppingRule, Trajectory};

/// Which free process the network is coupled with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingMode {
    /// Free process with `delta = 1`: it bounds the network's first queue
    /// from below and its second queue from above.
    Upper,
    /// Free process with `delta < 1`: the reverse bounds, valid while the
    /// rate function stays above `delta` and the first queue is non-empty.
    Lower,
}

/// Why a coupled run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoupledStop {
    Horizon,
    EventBudget,
    /// The rate function of the network fell to `delta` or below.
    RateBelowDelta,
    /// The network's first queue emptied.
    FirstQueueEmpty,
}

#[derive(Debug, Clone)]
pub struct CoupledRun {
    /// Joint path on `(x0, x1, y0, y1)`.
    pub joint: Trajectory,
    pub stop_reason: CoupledStop,
}

impl CoupledRun {
    /// Path of the network.
    pub fn x(&self) -> Trajectory {
        self.joint.project(&[0, 1])
    }

    /// Path of the free process.
    pub fn y(&self) -> Trajectory {
        self.joint.project(&[2, 3])
    }
}

/// Checks the coordinate orderings after every event.
struct OrderCheck {
    mode: CouplingMode,
    violation: Option<(f64, String)>,
}

impl OrderCheck {
    fn holds(mode: CouplingMode, s: &[i64]) -> bool {
        match mode {
            CouplingMode::Upper => s[0] >= s[2] && s[1] <= s[3],
            CouplingMode::Lower => s[0] <= s[2] && s[1] >= s[3],
        }
    }
}

impl Observer for OrderCheck {
    fn on_jump(&mut self, t: f64, _from: &[i64], to: &[i64], _jump: usize) {
        if self.violation.is_none() && !Self::holds(self.mode, to) {
            self.violation = Some((t, format!("{:?} ordering fails at state {to:?}", self.mode)));
        }
    }
}

/// Simulates the network `X` and a free process `Y` from the same state.
///
/// In `Upper` mode `delta` must be 1. In `Lower` mode the run also stops as
/// soon as `r(X) <= delta` or `X0 = 0`. Any ordering violation is returned as
/// [`Error::CouplingViolation`].
pub fn simulate_coupled(
    mode: CouplingMode,
    params: &SingleChunkParams,
    delta: f64,
    init: [i64; 2],
    stop: &StoppingRule,
    rng: &mut RngStream,
) -> Result<CoupledRun> {
    check_nonneg("init", &init)?;
    if params.boundary != Boundary::OrOne {
        return Err(Error::param("boundary", "the coupling is defined for the max(x1, 1) boundary"));
    }
    match mode {
        CouplingMode::Upper if delta != 1.0 => {
            return Err(Error::param("delta", format!("upper coupling uses delta = 1, got {delta}")))
        }
        CouplingMode::Lower if !(delta > 0.0 && delta < 1.0) => {
            return Err(Error::param("delta", format!("lower coupling needs delta in (0, 1), got {delta}")))
        }
        _ => {}
    }
    let free = FreeParams::new(delta, params.mu, params.nu, params.lambda)?;

    let gen = FnGenerator::new(
        4,
        &[
            &[1, 0, 1, 0],
            &[-1, 1, -1, 1],
            &[-1, 1, 0, 0],
            &[0, 0, -1, 1],
            &[0, -1, 0, -1],
            &[0, -1, 0, 0],
            &[0, 0, 0, -1],
        ],
        |s, r| {
            let a = transfer_rate(params, s[0], s[1]);
            let b = free.mu * free.delta * s[3].max(1) as f64;
            let both = a.min(b);
            r[0] = params.lambda;
            r[1] = both;
            r[2] = (a - both).max(0.0);
            r[3] = (b - both).max(0.0);
            let (dx, dy) = (s[1], s[3]);
            r[4] = params.nu * dx.min(dy) as f64;
            r[5] = params.nu * (dx - dx.min(dy)) as f64;
            r[6] = params.nu * (dy - dx.min(dy)) as f64;
            if a.is_nan() {
                r[2] = f64::NAN;
            }
        },
    );

    let mut stop = stop.clone();
    if mode == CouplingMode::Lower {
        let rf = params.rate_fn.clone();
        stop = stop.with_absorb(move |s| s[0] == 0 || rf.eval(s[0], s[1]) <= delta);
    }

    let state = [init[0], init[1], init[0], init[1]];
    let mut obs = (Trajectory::new(&state), OrderCheck { mode, violation: None });
    let summary = simulate(&gen, &state, &stop, rng, &mut obs)?;
    let (joint, check) = obs;
    if let Some((time, detail)) = check.violation {
        return Err(Error::CouplingViolation { time, detail });
    }
    let stop_reason = match summary.reason {
        StopReason::Absorbed if summary.final_state[0] == 0 => CoupledStop::FirstQueueEmpty,
        StopReason::Absorbed => CoupledStop::RateBelowDelta,
        StopReason::EventBudget => CoupledStop::EventBudget,
        StopReason::Horizon | StopReason::Stalled => CoupledStop::Horizon,
    };
    Ok(CoupledRun { joint, stop_reason })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::params::RateFunction;

    fn params(rf: RateFunction) -> SingleChunkParams {
        SingleChunkParams::new(1.0, 1.0, 2.0, rf, Boundary::OrOne).unwrap()
    }

    #[test]
    fn identical_until_first_queue_empties() {
        // With r = 1 both components move together while x0 > 0.
        let p = params(RateFunction::Constant(1.0));
        for i in 0..200 {
            let mut rng = RngStream::new(12, i);
            let run = simulate_coupled(CouplingMode::Upper, &p, 1.0, [5, 1], &StoppingRule::horizon(50.0), &mut rng)
                .unwrap();
            for (_, s) in run.joint.iter() {
                if s[0] == 0 {
                    break;
                }
                assert_eq!((s[0], s[1]), (s[2], s[3]));
            }
        }
    }

    #[test]
    fn upper_ordering_with_download_share() {
        let p = params(RateFunction::DownloadShare);
        for i in 0..200 {
            let mut rng = RngStream::new(13, i);
            simulate_coupled(CouplingMode::Upper, &p, 1.0, [3, 2], &StoppingRule::horizon(50.0), &mut rng).unwrap();
        }
    }

    #[test]
    fn lower_mode_stops_when_rate_drops() {
        let p = params(RateFunction::CappedRatio(1.0));
        let mut seen_rate_stop = false;
        for i in 0..200 {
            let mut rng = RngStream::new(14, i);
            let run =
                simulate_coupled(CouplingMode::Lower, &p, 0.5, [4, 1], &StoppingRule::horizon(100.0), &mut rng).unwrap();
            let last = run.joint.final_state();
            match run.stop_reason {
                CoupledStop::FirstQueueEmpty => assert_eq!(last[0], 0),
                CoupledStop::RateBelowDelta => {
                    seen_rate_stop = true;
                    assert!(RateFunction::CappedRatio(1.0).eval(last[0], last[1]) <= 0.5);
                }
                _ => {}
            }
        }
        assert!(seen_rate_stop);
    }

    #[test]
    fn projections_split_the_joint_path() {
        let p = params(RateFunction::DownloadShare);
        let mut rng = RngStream::new(15, 0);
        let run = simulate_coupled(CouplingMode::Upper, &p, 1.0, [2, 0], &StoppingRule::horizon(10.0), &mut rng).unwrap();
        let (x, y) = (run.x(), run.y());
        assert_eq!(x.dim(), 2);
        assert_eq!(x.final_state(), &run.joint.final_state()[..2]);
        assert_eq!(y.final_state(), &run.joint.final_state()[2..]);
    }

    #[test]
    fn rejects_bad_configurations() {
        let mut p = params(RateFunction::DownloadShare);
        let mut rng = RngStream::new(0, 0);
        let stop = StoppingRule::horizon(1.0);
        assert!(simulate_coupled(CouplingMode::Upper, &p, 0.5, [1, 1], &stop, &mut rng).is_err());
        assert!(simulate_coupled(CouplingMode::Lower, &p, 1.0, [1, 1], &stop, &mut rng).is_err());
        p.boundary = Boundary::PlusOne;
        assert!(simulate_coupled(CouplingMode::Upper, &p, 1.0, [1, 1], &stop, &mut rng).is_err());
    }
}
