//! The renewing birth-death process `Z`, its queueing (time-change)
//! representation and the binary branching process behind it.

use super::params::RbhParams;
use crate::error::{positive, Error, Result};
use crate::kernel::{
    exp1, run_ctmc, simulate, Accumulator, FnGenerator, Generator, Observer, RngStream, StopReason, StoppingRule,
    Trajectory,
};

/// Ordered epochs of the positive jumps of a one-dimensional path.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BirthLog {
    sigma: Vec<f64>,
}

impl BirthLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Collects the up-jump epochs of coordinate `coord` of a path.
    pub fn from_trajectory(traj: &Trajectory, coord: usize) -> Self {
        let sigma = (1..traj.len())
            .filter(|&i| traj.state(i)[coord] > traj.state(i - 1)[coord])
            .map(|i| traj.times()[i])
            .collect();
        BirthLog { sigma }
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// Number of births in `[0, t]`.
    pub fn count(&self, t: f64) -> usize {
        self.sigma.partition_point(|&s| s <= t)
    }

    /// `sum_n exp(-gamma sigma_n)` over the births up to `t`.
    pub fn discounted_sum(&self, gamma: f64, t: f64) -> f64 {
        let mut acc = Accumulator::default();
        for &s in &self.sigma[..self.count(t)] {
            acc.add((-gamma * s).exp());
        }
        acc.sum()
    }
}

impl Observer for BirthLog {
    fn on_jump(&mut self, t: f64, from: &[i64], to: &[i64], _jump: usize) {
        if to[0] > from[0] {
            self.sigma.push(t);
        }
    }
}

/// Generator of `Z`: `z -> z + 1` at `mu_z * max(z, 1)`, `z -> z - 1` at
/// `nu * z`.
pub fn rbh_generator(params: &RbhParams) -> impl Generator {
    let RbhParams { mu_z, nu } = *params;
    FnGenerator::new(1, &[&[1], &[-1]], move |s, r| {
        r[0] = mu_z * s[0].max(1) as f64;
        r[1] = nu * s[0] as f64;
    })
}

fn check_start(name: &str, z0: i64) -> Result<()> {
    if z0 < 0 {
        Err(Error::param(name, format!("must be >= 0, got {z0}")))
    } else {
        Ok(())
    }
}

/// Simulates `Z` from `z0` and records its birth epochs.
pub fn simulate_rbh(
    params: &RbhParams,
    z0: i64,
    stop: &StoppingRule,
    rng: &mut RngStream,
) -> Result<(Trajectory, BirthLog)> {
    check_start("z0", z0)?;
    let mut obs = (Trajectory::new(&[z0]), BirthLog::new());
    simulate(&rbh_generator(params), &[z0], stop, rng, &mut obs)?;
    Ok(obs)
}

/// M/M/1 queue: arrivals at `arrival`, service at `service` while busy.
pub fn mm1_generator(arrival: f64, service: f64) -> impl Generator {
    FnGenerator::new(1, &[&[1], &[-1]], move |s, r| {
        r[0] = arrival;
        r[1] = if s[0] > 0 { service } else { 0.0 };
    })
}

/// Runs a queue path on the clock `A(t) = int_0^t du / max(L(u), 1)`.
///
/// The jump chain is unchanged; a piece of queue time `d` spent at level `l`
/// lasts `d / max(l, 1)` on the new clock.
pub fn time_change(queue: &Trajectory) -> Trajectory {
    assert_eq!(queue.dim(), 1);
    let mut out = Trajectory::new(queue.initial_state());
    let mut clock = Accumulator::default();
    let times = queue.times();
    for i in 1..queue.len() {
        let level = queue.state(i - 1)[0].max(1) as f64;
        clock.add((times[i] - times[i - 1]) / level);
        out.push(clock.sum(), queue.state(i));
    }
    let level = queue.final_state()[0].max(1) as f64;
    clock.add((queue.end_time() - times[queue.len() - 1]) / level);
    out.finish(clock.sum(), queue.stop_reason());
    out
}

/// Simulates `Z` through its queueing representation: an M/M/1 queue with
/// arrival rate `mu_z` and service rate `nu` is run and read on the clock
/// `A`. The stopping rule is expressed in the new clock.
pub fn simulate_z_via_timechange(
    params: &RbhParams,
    z0: i64,
    stop: &StoppingRule,
    rng: &mut RngStream,
) -> Result<Trajectory> {
    check_start("z0", z0)?;
    let RbhParams { mu_z, nu } = *params;
    let horizon = stop.horizon_value();
    let mut traj = Trajectory::new(&[z0]);
    let mut l = z0;
    let mut clock = 0.0f64;
    let mut events = 0u64;
    let reason = loop {
        if stop.absorbed(&[l]) {
            break StopReason::Absorbed;
        }
        if stop.budget_spent(events) {
            break StopReason::EventBudget;
        }
        let service = if l > 0 { nu } else { 0.0 };
        let total = mu_z + service;
        let queue_time = exp1(rng) / total;
        let next = clock + queue_time / l.max(1) as f64;
        if let Some(h) = horizon {
            if next > h {
                clock = h;
                break StopReason::Horizon;
            }
        }
        l += if rng.uniform() * total < mu_z { 1 } else { -1 };
        clock = if next > clock { next } else { f64::from_bits(clock.to_bits() + 1) };
        events += 1;
        traj.push(clock, &[l]);
    };
    traj.finish(clock, reason);
    Ok(traj)
}

/// A binary branching process: every particle, at rate `lambda`, splits in
/// two with probability `p` or dies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchingParams {
    pub p: f64,
    pub lambda: f64,
}

impl BranchingParams {
    pub fn new(p: f64, lambda: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::param("p", format!("must lie in (0, 1), got {p}")));
        }
        Ok(BranchingParams {
            p,
            lambda: positive("lambda", lambda)?,
        })
    }

    /// The process followed by `Z` away from 0.
    pub fn from_rbh(params: &RbhParams) -> Self {
        BranchingParams {
            p: params.split_prob(),
            lambda: params.split_rate(),
        }
    }

    /// Swaps split and death probabilities. Applied to a supercritical
    /// process, this gives its law conditioned on extinction.
    pub fn dual(&self) -> Self {
        BranchingParams {
            p: 1.0 - self.p,
            lambda: self.lambda,
        }
    }
}

pub fn branching_generator(params: &BranchingParams) -> impl Generator {
    let BranchingParams { p, lambda } = *params;
    FnGenerator::new(1, &[&[1], &[-1]], move |s, r| {
        let n = s[0] as f64;
        r[0] = lambda * p * n;
        r[1] = lambda * (1.0 - p) * n;
    })
}

/// Simulates the particle count from `n0` particles. The count is absorbed
/// at 0.
pub fn simulate_branching(
    params: &BranchingParams,
    n0: i64,
    stop: &StoppingRule,
    rng: &mut RngStream,
) -> Result<Trajectory> {
    check_start("n0", n0)?;
    run_ctmc(&branching_generator(params), &[n0], stop, rng)
}
