//! Monte Carlo estimators built on the replication harness.

use super::classify::TailDiagnostic;
use super::stats::{affine_fit, AffineFit};
use crate::error::{positive, Error, Result};
use crate::kernel::{replicate, replicate_map, simulate, EstimateSummary, RngStream, StoppingRule, Trajectory};
use crate::processes::{
    rbh_generator, run_wz_to_extinction, simulate_killed_yule, simulate_saturated_lumped, v_chain_hitting_time,
    v_chain_step, BirthLog, KillSchedule, ProcessSpec, RbhParams, VChainParams, YuleParams,
};

/// Relative change on horizon doubling below which an estimate counts as
/// stabilized.
pub const STABILITY_TOLERANCE: f64 = 0.05;

/// Share of excluded replications above which a scaling row is flagged.
pub const EXCLUSION_LIMIT: f64 = 0.01;

/// Default target set `[0, K]` of the V-chain.
pub const DEFAULT_K: i64 = 50;

/// Default cap on the number of V-chain steps of one replication.
pub const DEFAULT_MAX_STEPS: usize = 10_000;

/// An estimate at horizon `H` and the same estimate at `2H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoublingEstimate {
    pub estimate: EstimateSummary,
    pub doubled: EstimateSummary,
    pub diagnostic: TailDiagnostic,
}

impl DoublingEstimate {
    fn from_pairs(pairs: &[(f64, f64)], base_seed: u64) -> Self {
        let at_h: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let at_2h: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let estimate = EstimateSummary::from_values(&at_h, base_seed);
        let doubled = EstimateSummary::from_values(&at_2h, base_seed);
        let sum: f64 = at_h.iter().map(|v| v.abs()).sum();
        let max = at_h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let change = if estimate.mean == doubled.mean {
            0.0
        } else {
            (doubled.mean - estimate.mean).abs() / estimate.mean.abs()
        };
        DoublingEstimate {
            estimate,
            doubled,
            diagnostic: TailDiagnostic {
                max_to_sum_ratio: if sum > 0.0 { max / sum } else { 0.0 },
                stabilized: change < STABILITY_TOLERANCE,
            },
        }
    }

    /// Relative change of the mean from `H` to `2H`.
    pub fn relative_change(&self) -> f64 {
        if self.estimate.mean == self.doubled.mean {
            0.0
        } else {
            (self.doubled.mean - self.estimate.mean).abs() / self.estimate.mean.abs()
        }
    }
}

fn check_reps(reps: usize) -> Result<()> {
    if reps == 0 {
        Err(Error::param("reps", "must be at least 1"))
    } else {
        Ok(())
    }
}

fn coordinate_value(state: &[i64], coord: Option<usize>) -> f64 {
    match coord {
        Some(c) => state[c] as f64,
        None => state.iter().sum::<i64>() as f64,
    }
}

fn check_coordinate(spec: &ProcessSpec, coord: Option<usize>) -> Result<()> {
    match coord {
        Some(c) if c >= spec.dim() => Err(Error::param(
            "coordinate",
            format!("{c} is out of range for {} (dimension {})", spec.name(), spec.dim()),
        )),
        _ => Ok(()),
    }
}

/// Path used for time averages. The saturated system is sampled with the
/// lumped simulator, since its first coordinate grows exponentially.
fn averaging_path(spec: &ProcessSpec, stop: &StoppingRule, rng: &mut RngStream) -> Result<Trajectory> {
    match spec {
        ProcessSpec::Saturated { params, z0 } => simulate_saturated_lumped(params, *z0, stop, rng),
        other => other.sample_path(stop, rng),
    }
}

fn time_average(traj: &Trajectory, coord: Option<usize>, from: f64, to: f64) -> f64 {
    match coord {
        Some(c) => traj.time_average(c, from, to),
        None => traj.integral(from, to, |s| s.iter().sum::<i64>() as f64) / (to.min(traj.end_time()) - from),
    }
}

/// Time average of `coord` (or of the total population when `None`) over
/// `[burn_in, H]`, compared with the average over `[burn_in, 2H]`.
///
/// `burn_in` defaults to `H / 5`.
pub fn estimate_time_average(
    spec: &ProcessSpec,
    coord: Option<usize>,
    horizon: f64,
    burn_in: Option<f64>,
    reps: usize,
    base_seed: u64,
) -> Result<DoublingEstimate> {
    positive("horizon", horizon)?;
    check_reps(reps)?;
    check_coordinate(spec, coord)?;
    let b = burn_in.unwrap_or(horizon / 5.0);
    if !(0.0..horizon).contains(&b) {
        return Err(Error::param("burn_in", format!("must lie in [0, horizon), got {b}")));
    }
    let stop = StoppingRule::horizon(2.0 * horizon);
    let pairs = replicate_map(reps, base_seed, |rng| {
        let traj = averaging_path(spec, &stop, rng)?;
        Ok((
            time_average(&traj, coord, b, horizon),
            time_average(&traj, coord, b, 2.0 * horizon),
        ))
    })?;
    Ok(DoublingEstimate::from_pairs(&pairs, base_seed))
}

/// Equilibrium departure rate `nu E(Z(inf))` of a renewing birth-death
/// process, or `nu E(X_2^S(inf))` of the saturated system.
///
/// Fails with [`Error::TransientRegime`] when the parameters are not in a
/// positive-recurrent regime. A non-stabilized estimate is returned with
/// `stabilized = false`.
pub fn estimate_stationary_departure_rate(
    spec: &ProcessSpec,
    horizon: f64,
    burn_in: Option<f64>,
    reps: usize,
    base_seed: u64,
) -> Result<(EstimateSummary, TailDiagnostic)> {
    let (nu, coord) = match spec {
        ProcessSpec::Rbh { params, .. } | ProcessSpec::RbhTimechange { params, .. } => {
            if params.nu <= params.mu_z {
                return Err(Error::TransientRegime(format!(
                    "nu={} <= mu_z={}: Z is not positive recurrent",
                    params.nu, params.mu_z
                )));
            }
            (params.nu, 0)
        }
        ProcessSpec::Saturated { params, .. } => {
            let alpha = params.mu2 - params.nu;
            if !(alpha > params.mu1 || params.nu > params.mu2) {
                return Err(Error::TransientRegime(format!(
                    "the saturated system needs mu2 - nu > mu1 or nu > mu2, got mu1={}, mu2={}, nu={}",
                    params.mu1, params.mu2, params.nu
                )));
            }
            (params.nu, 1)
        }
        other => {
            return Err(Error::param(
                "model",
                format!("departure rates are defined for rbh and saturated, not {}", other.name()),
            ))
        }
    };
    let est = estimate_time_average(spec, Some(coord), horizon, burn_in, reps, base_seed)?;
    Ok((scale(est.estimate, nu), est.diagnostic))
}

fn scale(s: EstimateSummary, c: f64) -> EstimateSummary {
    EstimateSummary {
        mean: s.mean * c,
        ci_half_width: s.ci_half_width * c,
        std_error: s.std_error * c,
        ..s
    }
}

/// How a linear growth rate is read off a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SlopeMethod {
    /// `X(H) / H`.
    #[default]
    Endpoint,
    /// `(X(H) - X(H/2)) / (H/2)`, free of the contribution of the initial
    /// and equilibrium levels.
    Increment,
}

/// Mean linear growth rate of `coord` (or of the total population).
pub fn estimate_growth_slope(
    spec: &ProcessSpec,
    coord: Option<usize>,
    horizon: f64,
    method: SlopeMethod,
    reps: usize,
    base_seed: u64,
) -> Result<EstimateSummary> {
    positive("horizon", horizon)?;
    check_coordinate(spec, coord)?;
    let stop = StoppingRule::horizon(horizon);
    replicate(reps, base_seed, |rng| {
        let traj = spec.sample_path(&stop, rng)?;
        let end = coordinate_value(traj.final_state(), coord);
        Ok(match method {
            SlopeMethod::Endpoint => end / horizon,
            SlopeMethod::Increment => {
                let mid = coordinate_value(traj.state_at(horizon / 2.0), coord);
                (end - mid) / (horizon / 2.0)
            }
        })
    })
}

/// Survival of a killed Yule population.
///
/// Returns the fraction of replications alive at `horizon` and the mean of
/// `exp(-mu_w horizon) W(horizon)`.
pub fn estimate_survival(
    mu_w: f64,
    w0: i64,
    kills: &KillSchedule,
    horizon: f64,
    reps: usize,
    base_seed: u64,
) -> Result<(EstimateSummary, EstimateSummary)> {
    let params = YuleParams::new(mu_w)?;
    positive("horizon", horizon)?;
    if w0 < 1 {
        return Err(Error::param("w0", format!("must be >= 1, got {w0}")));
    }
    let stop = StoppingRule::horizon(horizon);
    let discount = (-mu_w * horizon).exp();
    let runs = replicate_map(reps, base_seed, |rng| {
        let run = simulate_killed_yule(&params, w0, kills, &stop, rng)?;
        let w = run.trajectory.final_state()[0];
        Ok((if w >= 1 { 1.0 } else { 0.0 }, discount * w as f64))
    })?;
    let alive: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let mw: Vec<f64> = runs.iter().map(|r| r.1).collect();
    Ok((
        EstimateSummary::from_values(&alive, base_seed),
        EstimateSummary::from_values(&mw, base_seed),
    ))
}

/// Mean of `sum_n exp(-gamma sigma_n)` over the birth epochs `sigma_n <= H`
/// of `Z`, with the diagnostic of the same sum up to `2H`.
pub fn estimate_series_sum(
    gamma: f64,
    rbh: &RbhParams,
    z0: i64,
    horizon: f64,
    reps: usize,
    base_seed: u64,
) -> Result<(EstimateSummary, TailDiagnostic)> {
    positive("gamma", gamma)?;
    positive("horizon", horizon)?;
    if z0 < 0 {
        return Err(Error::param("z0", format!("must be >= 0, got {z0}")));
    }
    let gen = rbh_generator(rbh);
    let stop = StoppingRule::horizon(2.0 * horizon);
    let pairs = replicate_map(reps, base_seed, |rng| {
        let mut log = BirthLog::new();
        simulate(&gen, &[z0], &stop, rng, &mut log)?;
        Ok((
            log.discounted_sum(gamma, horizon),
            log.discounted_sum(gamma, 2.0 * horizon),
        ))
    })?;
    let d = DoublingEstimate::from_pairs(&pairs, base_seed);
    Ok((d.estimate, d.diagnostic))
}

/// One row of a scaling table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    /// Grid value (`w0` or `v`).
    pub x: i64,
    pub estimate: EstimateSummary,
    /// Replications that did not finish and were left out.
    pub excluded: usize,
    /// Whether more than 1% of the replications were excluded.
    pub flagged: bool,
}

/// Per-grid-point estimates and an affine fit of the means against the log
/// of the grid value.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingTable {
    pub rows: Vec<ScalingRow>,
    pub fit: AffineFit,
}

fn scaling_table(
    grid: &[i64],
    reps: usize,
    base_seed: u64,
    log_x: impl Fn(i64) -> f64,
    run: impl Fn(i64, &mut RngStream) -> Result<Option<f64>> + Sync + Send,
) -> Result<ScalingTable> {
    check_reps(reps)?;
    if grid.is_empty() {
        return Err(Error::param("grid", "must not be empty"));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &x in grid {
        // Every grid point reuses the same streams, which pairs the runs.
        let values = replicate_map(reps, base_seed, |rng| run(x, rng))?;
        let kept: Vec<f64> = values.iter().flatten().copied().collect();
        if kept.is_empty() {
            return Err(Error::Model(format!("every replication at grid value {x} was excluded")));
        }
        let excluded = reps - kept.len();
        rows.push(ScalingRow {
            x,
            estimate: EstimateSummary::from_values(&kept, base_seed),
            excluded,
            flagged: excluded as f64 > EXCLUSION_LIMIT * reps as f64,
        });
    }
    let xs: Vec<f64> = grid.iter().map(|&x| log_x(x)).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.estimate.mean).collect();
    let fit = if grid.len() >= 2 {
        affine_fit(&xs, &ys)?
    } else {
        AffineFit {
            slope: 0.0,
            intercept: ys[0],
            max_relative_residual: 0.0,
        }
    };
    Ok(ScalingTable { rows, fit })
}

/// Mean extinction time `H_0` of `W` in the pair `(W, Z)` started from
/// `(w0, 0)`, for each `w0` in the grid, fitted against `log(w0)`.
///
/// Runs in which `W` survives `safety_horizon` are excluded and counted.
pub fn estimate_h0_scaling(
    mu_w: f64,
    rbh: &RbhParams,
    w0_grid: &[i64],
    reps: usize,
    base_seed: u64,
    safety_horizon: f64,
) -> Result<ScalingTable> {
    positive("mu_w", mu_w)?;
    if let Some(&w) = w0_grid.iter().find(|&&w| w < 1) {
        return Err(Error::param("w0", format!("grid values must be >= 1, got {w}")));
    }
    scaling_table(
        w0_grid,
        reps,
        base_seed,
        |w| (w as f64).ln(),
        |w0, rng| {
            let out = run_wz_to_extinction(mu_w, rbh, [w0, 0], rng, safety_horizon)?;
            Ok(out.extinct.then_some(out.h0))
        },
    )
}

/// Mean number of V-chain steps `N_K` needed to enter `[0, K]` from each
/// `v` in the grid, fitted against `log(1 + v)`.
///
/// Replications that hit the safety horizon of a step or need more than
/// `max_steps` steps are excluded and counted.
pub fn estimate_nk(
    params: &VChainParams,
    k: i64,
    v_grid: &[i64],
    reps: usize,
    base_seed: u64,
    max_steps: usize,
) -> Result<ScalingTable> {
    if k < 0 {
        return Err(Error::param("K", format!("must be >= 0, got {k}")));
    }
    if let Some(&v) = v_grid.iter().find(|&&v| v < 0) {
        return Err(Error::param("v", format!("grid values must be >= 0, got {v}")));
    }
    scaling_table(
        v_grid,
        reps,
        base_seed,
        |v| (1.0 + v as f64).ln(),
        |v, rng| match v_chain_hitting_time(params, v, k, max_steps, rng) {
            Ok(n) => Ok(n.map(|n| n as f64)),
            Err(Error::NotExtinct { .. }) => Ok(None),
            Err(e) => Err(e),
        },
    )
}

/// One-step drift `E(log(1 + V_1) - log(1 + K))` of the V-chain from `K`.
/// A negative value supports `K` as the size of the target set.
pub fn nk_drift_check(params: &VChainParams, k: i64, reps: usize, base_seed: u64) -> Result<EstimateSummary> {
    if k < 0 {
        return Err(Error::param("K", format!("must be >= 0, got {k}")));
    }
    let base = (1.0 + k as f64).ln();
    replicate(reps, base_seed, |rng| {
        let v1 = v_chain_step(params, k, rng)?;
        Ok((1.0 + v1 as f64).ln() - base)
    })
}
