//! Event-by-event exact simulation of continuous-time Markov chains.
//!
//! At a state `x` the generator reports one rate per admissible jump. The
//! holding time is exponential with the total rate `R`, and jump `i` is
//! selected with probability `rate_i / R`. A state with `R = 0` is absorbing:
//! the run stays there until the horizon.

use std::fmt;
use std::sync::Arc;

use rand_distr::{Distribution, Exp1};

use super::rng::RngStream;
use super::trajectory::{StopReason, Trajectory};
use crate::error::{Error, Result};

/// Largest state dimension supported by the fixed-size jump vectors.
pub const MAX_DIM: usize = 4;

/// A jump vector, padded with zeros past the generator's dimension.
pub type Jump = [i64; MAX_DIM];

/// Draws a standard exponential variate.
pub fn exp1(rng: &mut RngStream) -> f64 {
    Exp1.sample(rng)
}

/// Draws an exponential variate with the given rate.
pub fn sample_exponential(rate: f64, rng: &mut RngStream) -> Result<f64> {
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::param("rate", format!("must be finite and > 0, got {rate}")));
    }
    Ok(exp1(rng) / rate)
}

/// The Q-matrix of a chain with a fixed jump table and state-dependent rates.
pub trait Generator {
    fn dim(&self) -> usize;

    /// The admissible jumps. `rates` fills one rate per entry, in order.
    fn jumps(&self) -> &[Jump];

    /// Writes the rate of every jump at `state` into `out`.
    fn rates(&self, state: &[i64], out: &mut [f64]);
}

/// A generator assembled from a jump table and a closure.
pub struct FnGenerator<F> {
    dim: usize,
    jumps: Vec<Jump>,
    rates: F,
}

impl<F> FnGenerator<F>
where
    F: Fn(&[i64], &mut [f64]),
{
    pub fn new(dim: usize, jumps: &[&[i64]], rates: F) -> Self {
        assert!(dim <= MAX_DIM);
        assert!(jumps.iter().all(|j| j.len() == dim));
        FnGenerator {
            dim,
            jumps: jump_table(dim, jumps),
            rates,
        }
    }
}

impl<F> Generator for FnGenerator<F>
where
    F: Fn(&[i64], &mut [f64]),
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    fn rates(&self, state: &[i64], out: &mut [f64]) {
        (self.rates)(state, out)
    }
}

pub(crate) fn jump_table(dim: usize, jumps: &[&[i64]]) -> Vec<Jump> {
    jumps
        .iter()
        .map(|j| {
            let mut out = [0; MAX_DIM];
            out[..dim].copy_from_slice(j);
            out
        })
        .collect()
}

type StatePredicate = Arc<dyn Fn(&[i64]) -> bool + Send + Sync>;

/// When to stop a run. At least one of horizon / event budget is set.
#[derive(Clone)]
pub struct StoppingRule {
    horizon: Option<f64>,
    max_events: Option<u64>,
    absorb: Option<StatePredicate>,
}

impl fmt::Debug for StoppingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StoppingRule")
            .field("horizon", &self.horizon)
            .field("max_events", &self.max_events)
            .field("absorb", &self.absorb.is_some())
            .finish()
    }
}

impl StoppingRule {
    pub fn new(horizon: Option<f64>, max_events: Option<u64>) -> Result<Self> {
        if horizon.is_none() && max_events.is_none() {
            return Err(Error::param(
                "stop",
                "at least one of horizon and max_events must be set",
            ));
        }
        if let Some(h) = horizon {
            if !(h.is_finite() && h >= 0.0) {
                return Err(Error::param("horizon", format!("must be finite and >= 0, got {h}")));
            }
        }
        if max_events == Some(0) {
            return Err(Error::param("max_events", "must be positive"));
        }
        Ok(StoppingRule {
            horizon,
            max_events,
            absorb: None,
        })
    }

    /// Stop at time `horizon`.
    pub fn horizon(horizon: f64) -> Self {
        Self::new(Some(horizon), None).expect("invalid horizon")
    }

    /// Stop after `n` events.
    pub fn events(n: u64) -> Self {
        Self::new(None, Some(n)).expect("invalid event budget")
    }

    pub fn with_max_events(mut self, n: u64) -> Self {
        assert!(n > 0);
        self.max_events = Some(n);
        self
    }

    pub fn with_absorb(mut self, pred: impl Fn(&[i64]) -> bool + Send + Sync + 'static) -> Self {
        self.absorb = Some(Arc::new(pred));
        self
    }

    pub fn horizon_value(&self) -> Option<f64> {
        self.horizon
    }

    pub fn max_events_value(&self) -> Option<u64> {
        self.max_events
    }

    pub(crate) fn absorbed(&self, state: &[i64]) -> bool {
        self.absorb.as_ref().is_some_and(|p| p(state))
    }

    pub(crate) fn budget_spent(&self, events: u64) -> bool {
        self.max_events.is_some_and(|m| events >= m)
    }
}

/// Receives the events of a run as they happen.
pub trait Observer {
    fn on_jump(&mut self, _t: f64, _from: &[i64], _to: &[i64], _jump: usize) {}

    fn on_end(&mut self, _t: f64, _state: &[i64], _reason: StopReason) {}
}

impl Observer for () {}

impl Observer for Trajectory {
    fn on_jump(&mut self, t: f64, _from: &[i64], to: &[i64], _jump: usize) {
        self.push(t, to);
    }

    fn on_end(&mut self, t: f64, _state: &[i64], reason: StopReason) {
        self.finish(t, reason);
    }
}

impl<T: Observer + ?Sized> Observer for &mut T {
    fn on_jump(&mut self, t: f64, from: &[i64], to: &[i64], jump: usize) {
        (**self).on_jump(t, from, to, jump)
    }

    fn on_end(&mut self, t: f64, state: &[i64], reason: StopReason) {
        (**self).on_end(t, state, reason)
    }
}

/// Runs two observers side by side.
impl<A: Observer, B: Observer> Observer for (A, B) {
    fn on_jump(&mut self, t: f64, from: &[i64], to: &[i64], jump: usize) {
        self.0.on_jump(t, from, to, jump);
        self.1.on_jump(t, from, to, jump);
    }

    fn on_end(&mut self, t: f64, state: &[i64], reason: StopReason) {
        self.0.on_end(t, state, reason);
        self.1.on_end(t, state, reason);
    }
}

/// Outcome of [`simulate`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub end_time: f64,
    pub events: u64,
    pub reason: StopReason,
    pub final_state: Vec<i64>,
}

/// Simulates the chain from `init`, streaming events to `observer`.
pub fn simulate<G, O>(
    generator: &G,
    init: &[i64],
    stop: &StoppingRule,
    rng: &mut RngStream,
    observer: &mut O,
) -> Result<RunSummary>
where
    G: Generator + ?Sized,
    O: Observer + ?Sized,
{
    let dim = generator.dim();
    if init.len() != dim {
        return Err(Error::Model(format!(
            "initial state has dimension {}, generator expects {dim}",
            init.len()
        )));
    }
    let jumps = generator.jumps();
    let mut rates = vec![0.0; jumps.len()];
    let mut state = init.to_vec();
    let mut next = state.clone();
    let mut t = 0.0f64;
    let mut events = 0u64;

    let reason = loop {
        if stop.absorbed(&state) {
            break StopReason::Absorbed;
        }
        if stop.budget_spent(events) {
            break StopReason::EventBudget;
        }
        generator.rates(&state, &mut rates);
        let mut total = 0.0;
        for (i, &r) in rates.iter().enumerate() {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::Model(format!(
                    "jump {i} has rate {r} at state {state:?}"
                )));
            }
            total += r;
        }
        if total <= 0.0 {
            match stop.horizon {
                Some(h) => {
                    t = t.max(h);
                    break StopReason::Horizon;
                }
                None => break StopReason::Stalled,
            }
        }
        let hold = exp1(rng) / total;
        let t_next = t + hold;
        if let Some(h) = stop.horizon {
            if t_next > h {
                t = h;
                break StopReason::Horizon;
            }
        }
        // Strict comparison: on an exact floating-point tie the lower index wins.
        let target = rng.uniform() * total;
        let mut acc = 0.0;
        let mut chosen = None;
        for (i, &r) in rates.iter().enumerate() {
            acc += r;
            if target < acc && r > 0.0 {
                chosen = Some(i);
                break;
            }
        }
        let chosen = chosen.unwrap_or_else(|| rates.iter().rposition(|&r| r > 0.0).unwrap());
        for (k, slot) in next.iter_mut().enumerate() {
            *slot = state[k] + jumps[chosen][k];
        }
        // Guard against holding times that underflow to zero.
        t = if t_next > t { t_next } else { f64::from_bits(t.to_bits() + 1) };
        events += 1;
        observer.on_jump(t, &state, &next, chosen);
        std::mem::swap(&mut state, &mut next);
    };

    observer.on_end(t, &state, reason);
    Ok(RunSummary {
        end_time: t,
        events,
        reason,
        final_state: state,
    })
}

/// Simulates the chain and records the full trajectory.
pub fn run_ctmc<G>(
    generator: &G,
    init: &[i64],
    stop: &StoppingRule,
    rng: &mut RngStream,
) -> Result<Trajectory>
where
    G: Generator + ?Sized,
{
    let mut traj = Trajectory::new(init);
    simulate(generator, init, stop, rng, &mut traj)?;
    Ok(traj)
}

/// Accumulates time integrals of every coordinate over `[from, to]`.
#[derive(Debug, Clone)]
pub struct TimeIntegral {
    from: f64,
    to: f64,
    last_t: f64,
    state: Vec<i64>,
    integrals: Vec<super::Accumulator>,
}

impl TimeIntegral {
    pub fn new(init: &[i64], from: f64, to: f64) -> Self {
        TimeIntegral {
            from,
            to,
            last_t: 0.0,
            state: init.to_vec(),
            integrals: vec![super::Accumulator::default(); init.len()],
        }
    }

    fn advance(&mut self, t: f64) {
        let a = self.last_t.max(self.from);
        let b = t.min(self.to);
        if b > a {
            for (acc, &x) in self.integrals.iter_mut().zip(&self.state) {
                acc.add(x as f64 * (b - a));
            }
        }
        self.last_t = t;
    }

    /// Integral of coordinate `coord` accumulated so far.
    pub fn integral(&self, coord: usize) -> f64 {
        self.integrals[coord].sum()
    }

    /// Time average of `coord` over `[from, min(to, t_end)]`.
    pub fn average(&self, coord: usize) -> f64 {
        let span = self.last_t.min(self.to) - self.from;
        if span <= 0.0 {
            return f64::NAN;
        }
        self.integral(coord) / span
    }

    pub fn span(&self) -> f64 {
        (self.last_t.min(self.to) - self.from).max(0.0)
    }
}

impl Observer for TimeIntegral {
    fn on_jump(&mut self, t: f64, _from: &[i64], to: &[i64], _jump: usize) {
        self.advance(t);
        self.state.copy_from_slice(to);
    }

    fn on_end(&mut self, t: f64, _state: &[i64], _reason: StopReason) {
        self.advance(t);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson_counter() -> FnGenerator<impl Fn(&[i64], &mut [f64])> {
        FnGenerator::new(1, &[&[1]], |_s, r| r[0] = 1.0)
    }

    #[test]
    fn exponential_mean_and_variance() {
        let mut rng = RngStream::new(11, 0);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_exponential(1.0, &mut rng).unwrap()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        assert!((0.995..=1.005).contains(&mean), "mean {mean}");

        let ys: Vec<f64> = (0..n).map(|_| sample_exponential(2.0, &mut rng).unwrap()).collect();
        let m = ys.iter().sum::<f64>() / n as f64;
        let var = ys.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((0.245..=0.255).contains(&var), "var {var}");
    }

    #[test]
    fn exponential_is_deterministic() {
        let mut a = RngStream::new(3, 9);
        let mut b = RngStream::new(3, 9);
        for _ in 0..100 {
            assert_eq!(
                sample_exponential(1.0, &mut a).unwrap().to_bits(),
                sample_exponential(1.0, &mut b).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn exponential_rejects_bad_rates() {
        let mut rng = RngStream::new(0, 0);
        for rate in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                sample_exponential(rate, &mut rng),
                Err(Error::InvalidParameter { .. })
            ));
        }
    }

    #[test]
    fn poisson_counter_rate() {
        // One path has sd 0.032 in its rate, so average 100 independent paths.
        let mut total = 0;
        for i in 0..100 {
            let mut rng = RngStream::new(5, i);
            let traj = run_ctmc(&poisson_counter(), &[0], &StoppingRule::horizon(1000.0), &mut rng).unwrap();
            assert_eq!(traj.end_time(), 1000.0);
            assert_eq!(traj.stop_reason(), StopReason::Horizon);
            total += traj.events();
        }
        let rate = total as f64 / 100.0 / 1000.0;
        assert!((0.97..=1.03).contains(&rate), "rate {rate}");
    }

    #[test]
    fn zero_rates_are_absorbing() {
        let g = FnGenerator::new(2, &[&[1, 0], &[0, -1]], |_s, r| {
            r[0] = 0.0;
            r[1] = 0.0;
        });
        let mut rng = RngStream::new(5, 0);
        let traj = run_ctmc(&g, &[3, 4], &StoppingRule::horizon(10.0), &mut rng).unwrap();
        assert_eq!(traj.events(), 0);
        assert_eq!(traj.end_time(), 10.0);
        assert_eq!(traj.final_state(), &[3, 4]);
    }

    #[test]
    fn negative_rate_is_a_model_error() {
        let g = FnGenerator::new(1, &[&[1]], |_s, r| r[0] = -0.5);
        let mut rng = RngStream::new(5, 0);
        let err = run_ctmc(&g, &[0], &StoppingRule::horizon(1.0), &mut rng).unwrap_err();
        assert!(matches!(err, Error::Model(_)));
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let mut rng = RngStream::new(5, 0);
        let traj = run_ctmc(&poisson_counter(), &[0], &StoppingRule::events(25), &mut rng).unwrap();
        assert_eq!(traj.events(), 25);
        assert_eq!(traj.stop_reason(), StopReason::EventBudget);
    }

    #[test]
    fn stopping_rule_needs_a_bound() {
        assert!(StoppingRule::new(None, None).is_err());
        assert!(StoppingRule::new(Some(-1.0), None).is_err());
    }

    #[test]
    fn absorb_predicate_stops_run() {
        let stop = StoppingRule::horizon(1e6).with_absorb(|s| s[0] >= 10);
        let mut rng = RngStream::new(1, 2);
        let traj = run_ctmc(&poisson_counter(), &[0], &stop, &mut rng).unwrap();
        assert_eq!(traj.final_state(), &[10]);
        assert_eq!(traj.stop_reason(), StopReason::Absorbed);
    }

    #[test]
    fn jumps_are_admissible_and_times_increase() {
        let g = FnGenerator::new(1, &[&[1], &[-1]], |s, r| {
            r[0] = 2.0;
            r[1] = s[0] as f64;
        });
        let mut rng = RngStream::new(8, 1);
        let traj = run_ctmc(&g, &[0], &StoppingRule::horizon(200.0), &mut rng).unwrap();
        for w in traj.times().windows(2) {
            assert!(w[1] > w[0]);
        }
        for i in 1..traj.len() {
            let d = traj.state(i)[0] - traj.state(i - 1)[0];
            assert!(d == 1 || d == -1);
        }
    }

    #[test]
    fn time_integral_matches_trajectory() {
        let g = FnGenerator::new(1, &[&[1], &[-1]], |s, r| {
            r[0] = 1.0;
            r[1] = s[0] as f64;
        });
        let stop = StoppingRule::horizon(50.0);
        let mut a = RngStream::new(8, 1);
        let traj = run_ctmc(&g, &[0], &stop, &mut a).unwrap();
        let mut b = RngStream::new(8, 1);
        let mut ti = TimeIntegral::new(&[0], 10.0, 40.0);
        simulate(&g, &[0], &stop, &mut b, &mut ti).unwrap();
        assert!((ti.average(0) - traj.time_average(0, 10.0, 40.0)).abs() < 1e-12);
    }
}
