//! The two-chunk network and its saturated subsystem.

use super::params::{SaturatedParams, TwoChunkParams};
use super::single_chunk::check_nonneg;
use super::yule::yule_increment;
use crate::error::Result;
use crate::kernel::{exp1, run_ctmc, FnGenerator, Generator, RngStream, StopReason, StoppingRule, Trajectory};

/// Generator on `(x0, x1, x2)`: peers with no chunk, with the first chunk,
/// and seeds.
pub fn two_chunk_generator(params: &TwoChunkParams) -> impl Generator {
    let TwoChunkParams { lambda, mu1, mu2, nu } = *params;
    FnGenerator::new(3, &[&[1, 0, 0], &[-1, 1, 0], &[0, -1, 1], &[0, 0, -1]], move |s, r| {
        r[0] = lambda;
        r[1] = if s[0] > 0 { mu1 * s[1].max(1) as f64 } else { 0.0 };
        r[2] = if s[1] > 0 { mu2 * s[2].max(1) as f64 } else { 0.0 };
        r[3] = nu * s[2] as f64;
    })
}

pub fn simulate_two_chunk(
    params: &TwoChunkParams,
    x0: [i64; 3],
    stop: &StoppingRule,
    rng: &mut RngStream,
) -> Result<Trajectory> {
    check_nonneg("x0", &x0)?;
    run_ctmc(&two_chunk_generator(params), &x0, stop, rng)
}

/// Generator on `(z1, z2)` of the saturated system.
pub fn saturated_generator(params: &SaturatedParams) -> impl Generator {
    let SaturatedParams { mu1, mu2, nu } = *params;
    FnGenerator::new(2, &[&[1, 0], &[-1, 1], &[0, -1]], move |s, r| {
        r[0] = mu1 * s[0].max(1) as f64;
        r[1] = if s[0] > 0 { mu2 * s[1].max(1) as f64 } else { 0.0 };
        r[2] = nu * s[1] as f64;
    })
}

/// Event-by-event simulation of the saturated system.
pub fn simulate_saturated(
    params: &SaturatedParams,
    z0: [i64; 2],
    stop: &StoppingRule,
    rng: &mut RngStream,
) -> Result<Trajectory> {
    check_nonneg("z0", &z0)?;
    run_ctmc(&saturated_generator(params), &z0, stop, rng)
}

/// Value at which the first coordinate stops growing in
/// [`simulate_saturated_lumped`].
pub const Z1_CAP: i64 = 1_000_000_000_000_000;

/// Simulates the saturated system resolving only the events that move the
/// second coordinate.
///
/// While `z1 >= 1` the transfer indicator is on and `z1` evolves as a Yule
/// process between transfers, so it is advanced with the exact Yule
/// transition law over each holding time of `z2`. Recorded epochs are the
/// moves of `z2` (plus births of `z1` from 0), so `z2` is exact as a path and
/// time averages of `z2` are exact. Once `z1` reaches [`Z1_CAP`], or its
/// conditional mean over a holding time does, it is held at the cap; the
/// indicator is then on for any feasible number of transfers.
/// The returned path is flagged `thinned`.
pub fn simulate_saturated_lumped(
    params: &SaturatedParams,
    z0: [i64; 2],
    stop: &StoppingRule,
    rng: &mut RngStream,
) -> Result<Trajectory> {
    check_nonneg("z0", &z0)?;
    let SaturatedParams { mu1, mu2, nu } = *params;
    let horizon = stop.horizon_value();
    let mut traj = Trajectory::new(&z0);
    traj.thinned = true;
    let [mut z1, mut z2] = z0;
    let mut t = 0.0f64;
    let mut events = 0u64;

    let reason = loop {
        if stop.absorbed(&[z1, z2]) {
            break StopReason::Absorbed;
        }
        if stop.budget_spent(events) {
            break StopReason::EventBudget;
        }
        let transfer = if z1 > 0 { mu2 * z2.max(1) as f64 } else { 0.0 };
        let depart = nu * z2 as f64;
        let birth_from_empty = if z1 == 0 { mu1 } else { 0.0 };
        let total = transfer + depart + birth_from_empty;
        let hold = exp1(rng) / total;
        let next = t + hold;
        let end = horizon.filter(|&h| next > h);
        let dt = end.unwrap_or(next) - t;
        if z1 > 0 && z1 < Z1_CAP {
            z1 = if z1 as f64 * (mu1 * dt).exp() >= Z1_CAP as f64 {
                Z1_CAP
            } else {
                (z1 + yule_increment(z1, mu1, dt, rng)?).min(Z1_CAP)
            };
        }
        if let Some(h) = end {
            t = h;
            break StopReason::Horizon;
        }
        let u = rng.uniform() * total;
        if u < transfer {
            z1 -= 1;
            z2 += 1;
        } else if u < transfer + depart {
            z2 -= 1;
        } else {
            z1 += 1;
        }
        t = if next > t { next } else { f64::from_bits(t.to_bits() + 1) };
        events += 1;
        traj.push(t, &[z1, z2]);
    };
    if reason == StopReason::Horizon {
        let last = traj.final_state().to_vec();
        if last != [z1, z2] && t > *traj.times().last().unwrap() {
            traj.push(t, &[z1, z2]);
        }
    }
    traj.finish(t, reason);
    Ok(traj)
}
