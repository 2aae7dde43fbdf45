//! Stationary law of the free process' second coordinate.

use crate::error::{Error, Result};
use crate::kernel::compensated_sum;

/// Tail mass tolerated by [`birth_death_stationary`].
pub const TAIL_TOLERANCE: f64 = 1e-10;

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("rho must lie in (0, 1), got {rho}")))
    }
}

fn pi0(rho: f64) -> f64 {
    1.0 / (1.0 - (-rho).ln_1p())
}

/// Bound on the mass above `z` of the untruncated law.
fn tail_bound(rho: f64, z: usize) -> f64 {
    let n = (z + 1) as f64;
    pi0(rho) * (n * rho.ln()).exp() / (n * (1.0 - rho))
}

/// Smallest `z_max` whose tail bound `pi(0) rho^(z+1) / ((z+1)(1-rho))` is
/// below [`TAIL_TOLERANCE`].
pub fn required_z_max(rho: f64) -> Result<usize> {
    check_rho(rho)?;
    let mut lo = 0usize;
    let mut hi = 1usize;
    while tail_bound(rho, hi) >= TAIL_TOLERANCE {
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if tail_bound(rho, mid) < TAIL_TOLERANCE {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(if tail_bound(rho, lo) < TAIL_TOLERANCE { lo } else { hi })
}

/// Stationary law of the birth-death chain with birth rate `rho max(z, 1)`
/// and death rate `z`, truncated to `0..=z_max` and renormalized.
///
/// `pi(0) = 1 / (1 - log(1 - rho))` and `pi(z) = pi(0) rho^z / z`.
pub fn birth_death_stationary(rho: f64, z_max: usize) -> Result<Vec<f64>> {
    check_rho(rho)?;
    let required = required_z_max(rho)?;
    if z_max < required {
        return Err(Error::InsufficientTruncation { required });
    }
    let p0 = pi0(rho);
    let mut pi = Vec::with_capacity(z_max + 1);
    pi.push(p0);
    let mut power = 1.0;
    for z in 1..=z_max {
        power *= rho;
        pi.push(p0 * power / z as f64);
    }
    let total = compensated_sum(pi.iter().copied());
    for p in &mut pi {
        *p /= total;
    }
    Ok(pi)
}

/// `sum_z z pi(z)`.
pub fn mean(pi: &[f64]) -> f64 {
    compensated_sum(pi.iter().enumerate().map(|(z, p)| z as f64 * p))
}

/// `sum_z max(z, 1) pi(z)`.
pub fn mean_or_one(pi: &[f64]) -> f64 {
    compensated_sum(pi.iter().enumerate().map(|(z, p)| z.max(1) as f64 * p))
}
