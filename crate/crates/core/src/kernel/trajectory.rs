//! Piecewise-constant sample paths.

/// Why a simulation run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The horizon was reached.
    Horizon,
    /// The event budget ran out before the horizon.
    EventBudget,
    /// The absorbing predicate of the stopping rule fired.
    Absorbed,
    /// Total rate was zero and no horizon was configured.
    Stalled,
}

/// A right-continuous, piecewise-constant path of an integer-vector process.
///
/// `times[0]` is the start epoch (normally 0) and `states` holds one row of
/// length `dim` per epoch, flattened. The path is defined on
/// `[times[0], end_time]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dim: usize,
    times: Vec<f64>,
    states: Vec<i64>,
    end_time: f64,
    stop_reason: StopReason,
    /// Set when the path started in a degenerate (absorbing) state.
    pub degenerate: bool,
    /// Set when the path was recorded on an observation grid or otherwise
    /// lumped, so that consecutive rows may differ by more than one jump.
    pub thinned: bool,
}

impl Trajectory {
    pub fn new(init: &[i64]) -> Self {
        Trajectory {
            dim: init.len(),
            times: vec![0.0],
            states: init.to_vec(),
            end_time: 0.0,
            stop_reason: StopReason::Horizon,
            degenerate: false,
            thinned: false,
        }
    }

    /// Appends an epoch. Epochs must be strictly increasing.
    pub fn push(&mut self, t: f64, state: &[i64]) {
        debug_assert_eq!(state.len(), self.dim);
        debug_assert!(t > *self.times.last().unwrap(), "epochs must increase");
        self.times.push(t);
        self.states.extend_from_slice(state);
        self.end_time = t;
    }

    /// Overwrites the state of the last epoch.
    pub(crate) fn replace_last(&mut self, state: &[i64]) {
        debug_assert_eq!(state.len(), self.dim);
        let n = self.states.len();
        self.states[n - self.dim..].copy_from_slice(state);
    }

    pub(crate) fn finish(&mut self, end_time: f64, reason: StopReason) {
        self.end_time = end_time.max(*self.times.last().unwrap());
        self.stop_reason = reason;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn end_time(&self) -> f64 {
        self.end_time
    }

    pub fn stop_reason(&self) -> StopReason {
        self.stop_reason
    }

    /// Number of recorded epochs, including the initial one.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of jumps.
    pub fn events(&self) -> usize {
        self.times.len() - 1
    }

    pub fn state(&self, i: usize) -> &[i64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn initial_state(&self) -> &[i64] {
        self.state(0)
    }

    pub fn final_state(&self) -> &[i64] {
        self.state(self.len() - 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[i64])> + '_ {
        self.times
            .iter()
            .copied()
            .zip(self.states.chunks_exact(self.dim))
    }

    /// State at time `t`: the state of the last epoch `<= t`.
    pub fn state_at(&self, t: f64) -> &[i64] {
        let i = self.times.partition_point(|&s| s <= t);
        self.state(i.saturating_sub(1))
    }

    /// Integral of `f(state)` over `[from, to]`, clipped to the path's span.
    pub fn integral(&self, from: f64, to: f64, f: impl Fn(&[i64]) -> f64) -> f64 {
        let to = to.min(self.end_time);
        let mut acc = crate::kernel::Accumulator::default();
        for i in 0..self.len() {
            let a = self.times[i].max(from);
            let b = self.times.get(i + 1).copied().unwrap_or(self.end_time).min(to);
            if b > a {
                acc.add(f(self.state(i)) * (b - a));
            }
        }
        acc.sum()
    }

    /// Time average of coordinate `coord` over `[from, to]`.
    pub fn time_average(&self, coord: usize, from: f64, to: f64) -> f64 {
        let to = to.min(self.end_time);
        if to <= from {
            return self.state_at(from)[coord] as f64;
        }
        self.integral(from, to, |s| s[coord] as f64) / (to - from)
    }

    /// Projects onto a subset of coordinates, dropping epochs at which the
    /// projected state does not change.
    pub fn project(&self, coords: &[usize]) -> Trajectory {
        let pick = |s: &[i64]| coords.iter().map(|&c| s[c]).collect::<Vec<_>>();
        let mut out = Trajectory::new(&pick(self.initial_state()));
        out.times[0] = self.times[0];
        let mut last = pick(self.initial_state());
        for (t, s) in self.iter().skip(1) {
            let p = pick(s);
            if p != last {
                out.push(t, &p);
                last = p;
            }
        }
        out.finish(self.end_time, self.stop_reason);
        out.degenerate = self.degenerate;
        out.thinned = self.thinned;
        out
    }

    /// Samples the path on the grid `0, dt, 2dt, ...` up to the end time.
    pub fn on_grid(&self, dt: f64) -> Trajectory {
        assert!(dt > 0.0);
        let mut out = Trajectory::new(self.initial_state());
        let steps = (self.end_time / dt).floor() as usize;
        for k in 1..=steps {
            let t = k as f64 * dt;
            out.push(t, self.state_at(t));
        }
        out.finish(self.end_time, self.stop_reason);
        out.thinned = true;
        out.degenerate = self.degenerate;
        out
    }
}
