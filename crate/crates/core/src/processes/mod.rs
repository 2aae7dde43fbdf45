//! The stochastic process models and their simulators.

mod coupled;
mod params;
mod rbh;
mod single_chunk;
mod two_chunk;
mod vchain;
mod wz;
mod yule;

pub use coupled::{simulate_coupled, CoupledRun, CoupledStop, CouplingMode};
pub use params::{
    Boundary, FreeParams, RateFunction, RbhParams, SaturatedParams, SingleChunkParams, TwoChunkParams, YuleParams,
};
pub use rbh::{
    branching_generator, mm1_generator, rbh_generator, simulate_branching, simulate_rbh, simulate_z_via_timechange,
    time_change, BirthLog, BranchingParams,
};
pub use single_chunk::{free_generator, simulate_free, simulate_single_chunk, single_chunk_generator, transfer_rate};
pub use two_chunk::{
    saturated_generator, simulate_saturated, simulate_saturated_lumped, simulate_two_chunk, two_chunk_generator,
    Z1_CAP,
};
pub use vchain::{
    v_chain_hitting_time, v_chain_simulate, v_chain_step, Thinning, VChainParams, VChainRun, DEFAULT_SAFETY_HORIZON,
};
pub use wz::{run_wz_to_extinction, simulate_wz, wz_generator, WzOutcome};
pub use yule::{simulate_killed_yule, simulate_yule, yule_generator, KillSchedule, KilledYuleRun, LUMP_THRESHOLD};

use crate::error::{Error, Result};
use crate::kernel::{RngStream, StopReason, StoppingRule, Trajectory};

/// A fully parameterized process model together with its initial state.
#[derive(Debug, Clone)]
pub enum ProcessSpec {
    Yule { params: YuleParams, y0: i64 },
    KilledYule { params: YuleParams, w0: i64, kills: KillSchedule },
    Rbh { params: RbhParams, z0: i64 },
    RbhTimechange { params: RbhParams, z0: i64 },
    SingleChunk { params: SingleChunkParams, x0: [i64; 2] },
    Free { params: FreeParams, y0: [i64; 2] },
    TwoChunk { params: TwoChunkParams, x0: [i64; 3] },
    Saturated { params: SaturatedParams, z0: [i64; 2] },
    Coupled { mode: CouplingMode, params: SingleChunkParams, delta: f64, init: [i64; 2] },
    Wz { mu_w: f64, rbh: RbhParams, init: [i64; 2] },
    VChain { params: VChainParams, v0: i64, k: i64 },
}

impl ProcessSpec {
    /// Model names, in the order of the variants.
    pub const NAMES: [&'static str; 11] = [
        "yule",
        "killed_yule",
        "rbh",
        "rbh_timechange",
        "single_chunk",
        "free",
        "two_chunk",
        "saturated",
        "coupled",
        "wz",
        "v_chain",
    ];

    pub fn name(&self) -> &'static str {
        let i = match self {
            ProcessSpec::Yule { .. } => 0,
            ProcessSpec::KilledYule { .. } => 1,
            ProcessSpec::Rbh { .. } => 2,
            ProcessSpec::RbhTimechange { .. } => 3,
            ProcessSpec::SingleChunk { .. } => 4,
            ProcessSpec::Free { .. } => 5,
            ProcessSpec::TwoChunk { .. } => 6,
            ProcessSpec::Saturated { .. } => 7,
            ProcessSpec::Coupled { .. } => 8,
            ProcessSpec::Wz { .. } => 9,
            ProcessSpec::VChain { .. } => 10,
        };
        Self::NAMES[i]
    }

    /// Dimension of the paths returned by [`ProcessSpec::sample_path`].
    pub fn dim(&self) -> usize {
        match self {
            ProcessSpec::Yule { .. }
            | ProcessSpec::KilledYule { .. }
            | ProcessSpec::Rbh { .. }
            | ProcessSpec::RbhTimechange { .. }
            | ProcessSpec::VChain { .. } => 1,
            ProcessSpec::SingleChunk { .. } | ProcessSpec::Free { .. } | ProcessSpec::Saturated { .. } => 2,
            ProcessSpec::TwoChunk { .. } | ProcessSpec::Wz { .. } => 3,
            ProcessSpec::Coupled { .. } => 4,
        }
    }

    /// Simulates one path.
    ///
    /// Coupled runs return the joint path `(x0, x1, y0, y1)`, `wz` runs the
    /// path of `(W, Y, Z)` with the horizon as safety cut-off, and the
    /// V-chain is indexed by step number up to `floor(horizon)` steps.
    pub fn sample_path(&self, stop: &StoppingRule, rng: &mut RngStream) -> Result<Trajectory> {
        match self {
            ProcessSpec::Yule { params, y0 } => simulate_yule(params, *y0, stop, rng),
            ProcessSpec::KilledYule { params, w0, kills } => {
                Ok(simulate_killed_yule(params, *w0, kills, stop, rng)?.trajectory)
            }
            ProcessSpec::Rbh { params, z0 } => Ok(simulate_rbh(params, *z0, stop, rng)?.0),
            ProcessSpec::RbhTimechange { params, z0 } => simulate_z_via_timechange(params, *z0, stop, rng),
            ProcessSpec::SingleChunk { params, x0 } => simulate_single_chunk(params, *x0, stop, rng),
            ProcessSpec::Free { params, y0 } => simulate_free(params, *y0, stop, rng),
            ProcessSpec::TwoChunk { params, x0 } => simulate_two_chunk(params, *x0, stop, rng),
            ProcessSpec::Saturated { params, z0 } => simulate_saturated(params, *z0, stop, rng),
            ProcessSpec::Coupled { mode, params, delta, init } => {
                Ok(simulate_coupled(*mode, params, *delta, *init, stop, rng)?.joint)
            }
            ProcessSpec::Wz { mu_w, rbh, init } => {
                let h = stop
                    .horizon_value()
                    .ok_or_else(|| Error::param("horizon", "the wz model needs a horizon"))?;
                Ok(simulate_wz(*mu_w, rbh, *init, rng, h)?.0)
            }
            ProcessSpec::VChain { params, v0, k } => {
                let h = stop
                    .horizon_value()
                    .ok_or_else(|| Error::param("horizon", "the v_chain model needs a horizon"))?;
                let steps = (h.floor() as usize).max(1);
                let run = v_chain_simulate(params, *v0, steps, *k, rng)?;
                let mut traj = Trajectory::new(&[run.path[0]]);
                for (n, &v) in run.path.iter().enumerate().skip(1) {
                    traj.push(n as f64, &[v]);
                }
                traj.finish(steps as f64, StopReason::Horizon);
                traj.thinned = true;
                Ok(traj)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_and_dimensions_match_paths() {
        let rbh = RbhParams::new(2.0, 1.0).unwrap();
        let specs = vec![
            ProcessSpec::Yule { params: YuleParams::new(1.0).unwrap(), y0: 1 },
            ProcessSpec::KilledYule { params: YuleParams::new(1.0).unwrap(), w0: 1, kills: KillSchedule::logarithmic() },
            ProcessSpec::Rbh { params: rbh, z0: 0 },
            ProcessSpec::RbhTimechange { params: rbh, z0: 0 },
            ProcessSpec::SingleChunk { params: SingleChunkParams::plain(1.0, 1.0, 2.0).unwrap(), x0: [0, 0] },
            ProcessSpec::Free { params: FreeParams::new(1.0, 1.0, 2.0, 1.0).unwrap(), y0: [0, 0] },
            ProcessSpec::TwoChunk { params: TwoChunkParams::new(1.0, 1.0, 1.0, 2.0).unwrap(), x0: [0, 0, 0] },
            ProcessSpec::Saturated { params: SaturatedParams::new(1.0, 1.0, 2.0).unwrap(), z0: [0, 0] },
            ProcessSpec::Coupled {
                mode: CouplingMode::Upper,
                params: SingleChunkParams::plain(1.0, 1.0, 2.0).unwrap(),
                delta: 1.0,
                init: [1, 1],
            },
            ProcessSpec::Wz { mu_w: 0.1, rbh, init: [1, 0] },
            ProcessSpec::VChain { params: VChainParams::new(0.5, 0.1, rbh).unwrap(), v0: 100, k: 50 },
        ];
        for (i, spec) in specs.iter().enumerate() {
            assert_eq!(spec.name(), ProcessSpec::NAMES[i]);
            let mut rng = RngStream::new(1, i as u64);
            let traj = spec.sample_path(&StoppingRule::horizon(3.0), &mut rng).unwrap();
            assert_eq!(traj.dim(), spec.dim(), "{}", spec.name());
        }
    }
}
