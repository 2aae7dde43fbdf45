//! Built-in self-check suite run by the `validate` command.

use crate::analysis::stats::ks_two_sample;
use crate::analysis::{birth_death_stationary, eta_star, gamma_eta, lambda_star, required_z_max, ThresholdModel};
use crate::analysis::stationary::mean;
use crate::error::{Error, Result};
use crate::kernel::{derive_seed, replicate, replicate_map, RngStream, StoppingRule, Trajectory};
use crate::processes::{
    simulate_coupled, simulate_rbh, simulate_yule, simulate_z_via_timechange, CouplingMode, RateFunction, RbhParams,
    SingleChunkParams, YuleParams,
};

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Runs every check with streams derived from `seed`.
pub fn run_suite(seed: u64) -> Result<Vec<Check>> {
    Ok(vec![
        closed_forms()?,
        representation(derive_seed(seed, 1))?,
        jump_chain(derive_seed(seed, 2))?,
        coupling(derive_seed(seed, 3))?,
        martingale(derive_seed(seed, 4))?,
    ])
}

fn closed_forms() -> Result<Check> {
    let mut worst = 0.0f64;
    for rho in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let nu = 2.0;
        // The first moment has a heavier tail than the mass; truncate deeper.
        let pi = birth_death_stationary(rho, 2 * required_z_max(rho)?)?;
        let l = lambda_star(ThresholdModel::FreeOrOne, rho * nu, nu, 1.0)?;
        worst = worst.max((nu * mean(&pi) - l).abs());
    }
    let mut residual = 0.0f64;
    for i in 1..100 {
        let x = i as f64 / 100.0;
        let e = eta_star(x)?;
        residual = residual.max(((1.0 - x) * e * e - (2.0 - x) * e + (1.0 - x)).abs());
    }
    let g = (gamma_eta(eta_star(0.5)?, 2.0, 1.0)? - 2.0).abs();
    Ok(Check {
        name: "closed_forms",
        passed: worst < 1e-9 && residual < 1e-12 && g < 1e-9,
        detail: format!("lambda* identity error {worst:.2e}, eta* residual {residual:.2e}, gamma(eta*) error {g:.2e}"),
    })
}

fn rbh_params() -> RbhParams {
    RbhParams::new(2.0, 1.0).expect("valid rates")
}

fn representation(seed: u64) -> Result<Check> {
    let p = rbh_params();
    let stop = StoppingRule::horizon(1.0);
    let reps = 10_000;
    let a = replicate_map(reps, derive_seed(seed, 0), |rng| {
        Ok(simulate_rbh(&p, 0, &stop, rng)?.0.final_state()[0] as f64)
    })?;
    let b = replicate_map(reps, derive_seed(seed, 1), |rng| {
        Ok(simulate_z_via_timechange(&p, 0, &stop, rng)?.final_state()[0] as f64)
    })?;
    let ks = ks_two_sample(&a, &b)?;
    Ok(Check {
        name: "representation_ks",
        passed: ks.p_value > 1e-3,
        detail: format!("KS D={:.4}, p={:.4}", ks.statistic, ks.p_value),
    })
}

/// Fraction of up-jumps among the jumps leaving states `z >= 1`.
pub fn up_fraction(paths: &[Trajectory]) -> f64 {
    let (mut up, mut total) = (0u64, 0u64);
    for p in paths {
        for i in 1..p.len() {
            let (from, to) = (p.state(i - 1)[0], p.state(i)[0]);
            if from >= 1 {
                total += 1;
                up += u64::from(to > from);
            }
        }
    }
    up as f64 / total.max(1) as f64
}

fn jump_chain(seed: u64) -> Result<Check> {
    let p = rbh_params();
    let stop = StoppingRule::horizon(1.0);
    let reps = 10_000;
    let a = replicate_map(reps, derive_seed(seed, 0), |rng| Ok(simulate_rbh(&p, 0, &stop, rng)?.0))?;
    let b = replicate_map(reps, derive_seed(seed, 1), |rng| simulate_z_via_timechange(&p, 0, &stop, rng))?;
    let (fa, fb) = (up_fraction(&a), up_fraction(&b));
    let rel = (fa - fb).abs() / fa;
    Ok(Check {
        name: "jump_chain",
        passed: rel < 0.02,
        detail: format!("up-jump fractions {fa:.4} vs {fb:.4} (relative gap {rel:.4})"),
    })
}

/// Rate functions exercised by the coupling check.
pub fn builtin_rate_functions() -> Vec<(&'static str, RateFunction)> {
    vec![
        ("one", RateFunction::Constant(1.0)),
        ("constant_0.8", RateFunction::Constant(0.8)),
        ("download_share", RateFunction::DownloadShare),
        ("capped_ratio_1", RateFunction::CappedRatio(1.0)),
    ]
}

/// Runs `runs` joint paths per mode and rate function and counts ordering
/// violations.
pub fn coupling_violations(runs: usize, seed: u64) -> Result<(usize, usize)> {
    let stop = StoppingRule::horizon(50.0);
    let mut violations = 0;
    let mut total = 0;
    for (k, (_, rf)) in builtin_rate_functions().into_iter().enumerate() {
        let params = SingleChunkParams::new(2.0, 1.0, 2.0, rf, Default::default())?;
        for (m, (mode, delta, init)) in [(CouplingMode::Upper, 1.0, [5, 2]), (CouplingMode::Lower, 0.5, [50, 5])]
            .into_iter()
            .enumerate()
        {
            let results = replicate_map(runs, derive_seed(seed, (2 * k + m) as u64), |rng: &mut RngStream| {
                match simulate_coupled(mode, &params, delta, init, &stop, rng) {
                    Ok(_) => Ok(false),
                    Err(Error::CouplingViolation { .. }) => Ok(true),
                    Err(e) => Err(e),
                }
            })?;
            violations += results.iter().filter(|&&v| v).count();
            total += runs;
        }
    }
    Ok((violations, total))
}

fn coupling(seed: u64) -> Result<Check> {
    let (violations, total) = coupling_violations(200, seed)?;
    Ok(Check {
        name: "coupling",
        passed: violations == 0,
        detail: format!("{violations} ordering violations in {total} joint runs"),
    })
}

fn martingale(seed: u64) -> Result<Check> {
    let p = YuleParams::new(1.0)?;
    let t = 3.0;
    let stop = StoppingRule::horizon(t);
    let s = replicate(4000, seed, |rng| {
        Ok((-t).exp() * simulate_yule(&p, 1, &stop, rng)?.final_state()[0] as f64)
    })?;
    let z = s.z_score(1.0);
    Ok(Check {
        name: "yule_martingale",
        passed: z < 3.0,
        detail: format!("mean of exp(-t) Y(t) = {:.4} ± {:.4} (z = {z:.2})", s.mean, s.ci_half_width),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_check_passes() {
        assert!(closed_forms().unwrap().passed);
    }

    #[test]
    fn up_fraction_by_hand() {
        let mut p = Trajectory::new(&[0]);
        for (t, z) in [(1.0, 1), (2.0, 2), (3.0, 1), (4.0, 2)] {
            p.push(t, &[z]);
        }
        assert!((up_fraction(&[p]) - 2.0 / 3.0).abs() < 1e-15);
    }
}
