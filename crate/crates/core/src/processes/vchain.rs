//! The embedded chain `V_{n+1} = sum_{k <= A_n(V_n)} I_{n,k}`, where
//! `A_n(v)` is the value of `Z` when a killed Yule population started from
//! one individual dies out, with `Z(0) = v`.

use rand_distr::{Binomial, Distribution};

use super::params::{RbhParams, SaturatedParams};
use super::wz::run_wz_to_extinction;
use crate::error::{positive, Error, Result};
use crate::kernel::{exp1, RngStream};

/// How the offspring `A_n` are thinned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Thinning {
    /// Independent Bernoulli(`p`) indicators.
    Bernoulli,
    /// A shared window `E ~ Exp(mu_w)`; each customer is kept independently
    /// with probability `exp(-nu E)`. The mean of an indicator is
    /// `mu_w / (mu_w + nu)`.
    SharedWindow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VChainParams {
    /// Mean of an indicator under [`Thinning::Bernoulli`].
    pub p: f64,
    pub mu_w: f64,
    pub rbh: RbhParams,
    pub thinning: Thinning,
    /// Cut-off for each killed-Yule run.
    pub safety_horizon: f64,
}

pub const DEFAULT_SAFETY_HORIZON: f64 = 1e3;

impl VChainParams {
    /// Chain with independent Bernoulli(`p`) thinning.
    pub fn new(p: f64, mu_w: f64, rbh: RbhParams) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::param("p", format!("must lie in (0, 1), got {p}")));
        }
        Ok(VChainParams {
            p,
            mu_w: positive("mu_w", mu_w)?,
            rbh,
            thinning: Thinning::Bernoulli,
            safety_horizon: DEFAULT_SAFETY_HORIZON,
        })
    }

    /// Chain read off the saturated system: `mu_w = mu1`, `Z` uses
    /// `(mu2, nu)`, shared-window thinning.
    pub fn from_saturated(params: &SaturatedParams) -> Self {
        VChainParams {
            p: params.mu1 / (params.mu1 + params.nu),
            mu_w: params.mu1,
            rbh: params.last_queue(),
            thinning: Thinning::SharedWindow,
            safety_horizon: DEFAULT_SAFETY_HORIZON,
        }
    }

    pub fn with_thinning(mut self, thinning: Thinning) -> Self {
        self.thinning = thinning;
        self
    }

    /// Whether `mu_z - nu > mu_w`, which makes every step finite.
    pub fn in_stable_regime(&self) -> bool {
        self.rbh.malthusian() > self.mu_w
    }
}

/// One transition of the chain from `v`.
pub fn v_chain_step(params: &VChainParams, v: i64, rng: &mut RngStream) -> Result<i64> {
    let out = run_wz_to_extinction(params.mu_w, &params.rbh, [1, v], rng, params.safety_horizon)?;
    if !out.extinct {
        return Err(Error::NotExtinct {
            horizon: params.safety_horizon,
        });
    }
    let a = out.z_at_h0.max(0) as u64;
    let keep = match params.thinning {
        Thinning::Bernoulli => params.p,
        Thinning::SharedWindow => {
            let e = exp1(rng);
            (-params.rbh.nu * e / params.mu_w).exp()
        }
    };
    let b = Binomial::new(a, keep).map_err(|e| Error::Domain(format!("thinning: {e}")))?;
    Ok(b.sample(rng) as i64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VChainRun {
    /// `V_0, ..., V_steps`.
    pub path: Vec<i64>,
    /// First `n` with `V_n <= K`.
    pub n_k: Option<usize>,
    /// Number of `n >= 1` with `V_n <= K`.
    pub visits: usize,
}

/// Runs `steps` transitions from `v0` and records visits to `[0, k]`.
pub fn v_chain_simulate(params: &VChainParams, v0: i64, steps: usize, k: i64, rng: &mut RngStream) -> Result<VChainRun> {
    if v0 < 0 {
        return Err(Error::param("v0", format!("must be >= 0, got {v0}")));
    }
    if steps == 0 {
        return Err(Error::param("steps", "must be positive"));
    }
    let mut path = Vec::with_capacity(steps + 1);
    path.push(v0);
    let mut v = v0;
    for _ in 0..steps {
        v = v_chain_step(params, v, rng)?;
        path.push(v);
    }
    let n_k = path.iter().position(|&x| x <= k);
    let visits = path[1..].iter().filter(|&&x| x <= k).count();
    Ok(VChainRun { path, n_k, visits })
}

/// Number of steps until the chain started at `v0` first enters `[0, k]`.
/// Returns `None` if that takes more than `max_steps` steps.
pub fn v_chain_hitting_time(
    params: &VChainParams,
    v0: i64,
    k: i64,
    max_steps: usize,
    rng: &mut RngStream,
) -> Result<Option<usize>> {
    let mut v = v0;
    for n in 0..=max_steps {
        if v <= k {
            return Ok(Some(n));
        }
        if n < max_steps {
            v = v_chain_step(params, v, rng)?;
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: f64) -> VChainParams {
        VChainParams::new(p, 0.1, RbhParams::new(2.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn hitting_time_zero_inside_the_set() {
        let mut rng = RngStream::new(41, 0);
        assert_eq!(v_chain_hitting_time(&params(0.5), 10, 50, 100, &mut rng).unwrap(), Some(0));
        let run = v_chain_simulate(&params(0.5), 10, 5, 50, &mut rng).unwrap();
        assert_eq!(run.n_k, Some(0));
        assert_eq!(run.path.len(), 6);
    }

    #[test]
    fn heavy_thinning_empties_the_chain() {
        let p = params(0.01);
        let zeros = (0..1000)
            .filter(|&i| {
                let mut rng = RngStream::new(42, i);
                v_chain_step(&p, 10, &mut rng).unwrap() == 0
            })
            .count();
        assert!(zeros > 800, "{zeros}");
    }

    #[test]
    fn saturated_parameters_use_shared_window() {
        let sat = SaturatedParams::new(0.5, 4.0, 1.0).unwrap();
        let v = VChainParams::from_saturated(&sat);
        assert_eq!(v.thinning, Thinning::SharedWindow);
        assert!((v.p - 1.0 / 3.0).abs() < 1e-15);
        assert!(v.in_stable_regime());
    }

    #[test]
    fn shared_window_keep_fraction() {
        // E[V_1 / A] should be mu_w / (mu_w + nu) on average; check with a
        // large v so that A is essentially v + 1.
        let sat = SaturatedParams::new(0.5, 4.0, 1.0).unwrap();
        let v = VChainParams::from_saturated(&sat);
        let reps = 4000;
        let mut acc = 0.0;
        for i in 0..reps {
            let mut rng = RngStream::new(43, i);
            acc += v_chain_step(&v, 200, &mut rng).unwrap() as f64 / 201.0;
        }
        let mean = acc / reps as f64;
        assert!((mean - 1.0 / 3.0).abs() < 0.03, "{mean}");
    }
}
