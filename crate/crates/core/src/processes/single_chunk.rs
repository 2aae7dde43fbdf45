//! The single-chunk network and its free (unconstrained) counterpart.

use super::params::{FreeParams, SingleChunkParams};
use crate::error::{Error, Result};
use crate::kernel::{run_ctmc, FnGenerator, Generator, RngStream, StoppingRule, Trajectory};

/// Transfer rate of the single-chunk network at `(x0, x1)`.
///
/// Returns NaN when the rate function leaves `[0, 1]`, which the kernel
/// reports as a model error.
pub fn transfer_rate(params: &SingleChunkParams, x0: i64, x1: i64) -> f64 {
    if x0 <= 0 {
        return 0.0;
    }
    let r = params.rate_fn.eval(x0, x1);
    if !(0.0..=1.0).contains(&r) {
        return f64::NAN;
    }
    params.mu * r * params.boundary.servers(x1)
}

/// Generator on `(x0, x1)`: arrival, transfer, departure.
pub fn single_chunk_generator(params: &SingleChunkParams) -> impl Generator + '_ {
    FnGenerator::new(2, &[&[1, 0], &[-1, 1], &[0, -1]], move |s, r| {
        r[0] = params.lambda;
        r[1] = transfer_rate(params, s[0], s[1]);
        r[2] = params.nu * s[1] as f64;
    })
}

pub(crate) fn check_nonneg(name: &str, xs: &[i64]) -> Result<()> {
    match xs.iter().position(|&x| x < 0) {
        Some(i) => Err(Error::param(format!("{name}[{i}]"), format!("must be >= 0, got {}", xs[i]))),
        None => Ok(()),
    }
}

/// Simulates the single-chunk network from `x0 = (downloaders, seeds)`.
pub fn simulate_single_chunk(
    params: &SingleChunkParams,
    x0: [i64; 2],
    stop: &StoppingRule,
    rng: &mut RngStream,
) -> Result<Trajectory> {
    check_nonneg("x0", &x0)?;
    run_ctmc(&single_chunk_generator(params), &x0, stop, rng)
}

/// Generator of the free process. The first coordinate may go negative.
pub fn free_generator(params: &FreeParams) -> impl Generator {
    let FreeParams { delta, mu, nu, lambda } = *params;
    FnGenerator::new(2, &[&[1, 0], &[-1, 1], &[0, -1]], move |s, r| {
        r[0] = lambda;
        r[1] = mu * delta * s[1].max(1) as f64;
        r[2] = nu * s[1] as f64;
    })
}

/// Simulates the free process from `y0`; only `y0[1]` must be nonnegative.
pub fn simulate_free(params: &FreeParams, y0: [i64; 2], stop: &StoppingRule, rng: &mut RngStream) -> Result<Trajectory> {
    check_nonneg("y0", &y0[1..]).map_err(|_| Error::param("y0[1]", format!("must be >= 0, got {}", y0[1])))?;
    run_ctmc(&free_generator(params), &y0, stop, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::params::{Boundary, RateFunction};

    #[test]
    fn no_transfer_without_downloaders() {
        for rf in [RateFunction::Constant(1.0), RateFunction::DownloadShare, RateFunction::CappedRatio(2.0)] {
            let p = SingleChunkParams::new(1.0, 1.0, 2.0, rf, Boundary::OrOne).unwrap();
            for x1 in 0..5 {
                assert_eq!(transfer_rate(&p, 0, x1), 0.0);
            }
        }
    }

    #[test]
    fn boundary_variants() {
        let mut p = SingleChunkParams::plain(1.0, 1.5, 2.0).unwrap();
        assert_eq!(transfer_rate(&p, 3, 0), 1.5);
        assert_eq!(transfer_rate(&p, 3, 2), 3.0);
        p.boundary = Boundary::PlusOne;
        assert_eq!(transfer_rate(&p, 3, 0), 1.5);
        assert_eq!(transfer_rate(&p, 3, 2), 4.5);
    }

    #[test]
    fn out_of_range_rate_function_is_a_model_error() {
        let rf = RateFunction::custom(|_, _| 1.5, true);
        let p = SingleChunkParams::new(1.0, 1.0, 2.0, rf, Boundary::OrOne).unwrap();
        let mut rng = RngStream::new(0, 0);
        let err = simulate_single_chunk(&p, [2, 1], &StoppingRule::horizon(10.0), &mut rng).unwrap_err();
        assert!(matches!(err, Error::Model(_)));
    }

    #[test]
    fn single_chunk_stays_nonnegative() {
        let p = SingleChunkParams::new(1.0, 1.0, 2.0, RateFunction::DownloadShare, Boundary::OrOne).unwrap();
        let mut rng = RngStream::new(1, 0);
        let traj = simulate_single_chunk(&p, [0, 0], &StoppingRule::horizon(200.0), &mut rng).unwrap();
        assert!(traj.iter().all(|(_, s)| s[0] >= 0 && s[1] >= 0));
    }

    #[test]
    fn free_process_without_arrivals_drains() {
        let p = FreeParams::new(1.0, 1.0, 2.0, 0.0).unwrap();
        let mut rng = RngStream::new(2, 0);
        let traj = simulate_free(&p, [3, 0], &StoppingRule::horizon(20.0), &mut rng).unwrap();
        for w in 1..traj.len() {
            assert!(traj.state(w)[0] <= traj.state(w - 1)[0]);
        }
        assert!(traj.final_state()[0] < 0);
    }

    #[test]
    fn free_rejects_negative_seed_count() {
        let p = FreeParams::new(1.0, 1.0, 2.0, 1.0).unwrap();
        let mut rng = RngStream::new(2, 0);
        let err = simulate_free(&p, [-4, -1], &StoppingRule::horizon(1.0), &mut rng).unwrap_err();
        assert!(err.to_string().contains("y0[1]"));
    }
}
