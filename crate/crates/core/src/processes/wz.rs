//! A Yule population `W` killed at the birth epochs of an independent
//! renewing birth-death process `Z`.

use super::params::RbhParams;
use crate::error::{positive, Error, Result};
use crate::kernel::{simulate, FnGenerator, Generator, Observer, RngStream, StopReason, StoppingRule, Trajectory};

/// Event budget of a single run, far beyond what the stable regime needs.
const MAX_EVENTS: u64 = 50_000_000;

/// Outcome of [`run_wz_to_extinction`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WzOutcome {
    /// Extinction epoch of `W`, or the time the run was cut off.
    pub h0: f64,
    /// `Z` at `h0`.
    pub z_at_h0: i64,
    /// Supremum of `exp(-mu_w t) Y(t)` over `[0, h0]`, where `Y` is the
    /// unkilled Yule envelope of `W`.
    pub my_star: f64,
    pub extinct: bool,
}

/// Generator on `(W, Y, Z)`. `Y` shares every birth of `W` and additionally
/// grows through the lineages removed from `W`.
pub fn wz_generator(mu_w: f64, rbh: &RbhParams) -> impl Generator {
    let RbhParams { mu_z, nu } = *rbh;
    FnGenerator::new(
        3,
        &[&[1, 1, 0], &[0, 1, 0], &[-1, 0, 1], &[0, 0, -1]],
        move |s, r| {
            let (w, y, z) = (s[0], s[1], s[2]);
            r[0] = mu_w * w as f64;
            r[1] = mu_w * (y - w) as f64;
            r[2] = mu_z * z.max(1) as f64;
            r[3] = nu * z as f64;
        },
    )
}

struct EnvelopeSup {
    mu_w: f64,
    sup: f64,
}

impl Observer for EnvelopeSup {
    fn on_jump(&mut self, t: f64, _from: &[i64], to: &[i64], _jump: usize) {
        // Between jumps exp(-mu_w t) Y(t) decreases, so the supremum is
        // attained at a jump epoch or at 0.
        self.sup = self.sup.max((-self.mu_w * t).exp() * to[1] as f64);
    }
}

fn validate(mu_w: f64, init: [i64; 2]) -> Result<()> {
    positive("mu_w", mu_w)?;
    if init[0] < 1 {
        return Err(Error::param("w0", format!("must be >= 1, got {}", init[0])));
    }
    if init[1] < 0 {
        return Err(Error::param("z0", format!("must be >= 0, got {}", init[1])));
    }
    Ok(())
}

fn outcome(
    mu_w: f64,
    rbh: &RbhParams,
    init: [i64; 2],
    stop: &StoppingRule,
    rng: &mut RngStream,
    traj: Option<&mut Trajectory>,
) -> Result<WzOutcome> {
    let state = [init[0], init[0], init[1]];
    let mut sup = EnvelopeSup {
        mu_w,
        sup: init[0] as f64,
    };
    let gen = wz_generator(mu_w, rbh);
    let summary = match traj {
        Some(t) => {
            let mut obs = (t, &mut sup);
            simulate(&gen, &state, stop, rng, &mut obs)?
        }
        None => simulate(&gen, &state, stop, rng, &mut sup)?,
    };
    Ok(WzOutcome {
        h0: summary.end_time,
        z_at_h0: summary.final_state[2],
        my_star: sup.sup,
        extinct: summary.reason == StopReason::Absorbed,
    })
}

fn wz_stop(safety_horizon: f64) -> Result<StoppingRule> {
    let h = positive("safety_horizon", safety_horizon)?;
    Ok(StoppingRule::new(Some(h), Some(MAX_EVENTS))?.with_absorb(|s| s[0] == 0))
}

/// Runs `(W, Z)` from `init = (w0, z0)` until `W` dies out.
///
/// If `W` is still alive at `safety_horizon` (or after an event budget of
/// fifty million) the outcome has `extinct = false`.
pub fn run_wz_to_extinction(
    mu_w: f64,
    rbh: &RbhParams,
    init: [i64; 2],
    rng: &mut RngStream,
    safety_horizon: f64,
) -> Result<WzOutcome> {
    validate(mu_w, init)?;
    outcome(mu_w, rbh, init, &wz_stop(safety_horizon)?, rng, None)
}

/// As [`run_wz_to_extinction`], also recording the path of `(W, Y, Z)`.
pub fn simulate_wz(
    mu_w: f64,
    rbh: &RbhParams,
    init: [i64; 2],
    rng: &mut RngStream,
    safety_horizon: f64,
) -> Result<(Trajectory, WzOutcome)> {
    validate(mu_w, init)?;
    let mut traj = Trajectory::new(&[init[0], init[0], init[1]]);
    let out = outcome(mu_w, rbh, init, &wz_stop(safety_horizon)?, rng, Some(&mut traj))?;
    Ok((traj, out))
}
