//! Independent replications and their aggregation.

use statrs::distribution::{ContinuousCDF, StudentsT};

use super::rng::RngStream;
use crate::error::{Error, Result};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    sum: f64,
    compensation: f64,
}

impl Accumulator {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn sum(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Compensated sum of a sequence.
pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = Accumulator::default();
    for x in xs {
        acc.add(x);
    }
    acc.sum()
}

pub const DEFAULT_LEVEL: f64 = 0.95;

/// Monte Carlo point estimate with a two-sided Student-t confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateSummary {
    pub mean: f64,
    pub ci_half_width: f64,
    pub std_error: f64,
    pub replications: usize,
    pub base_seed: u64,
    pub level: f64,
}

impl EstimateSummary {
    /// Summarizes replication values at the default 95% level.
    pub fn from_values(values: &[f64], base_seed: u64) -> Self {
        Self::from_values_at(values, base_seed, DEFAULT_LEVEL)
    }

    pub fn from_values_at(values: &[f64], base_seed: u64, level: f64) -> Self {
        assert!(!values.is_empty(), "at least one replication is required");
        assert!(level > 0.0 && level < 1.0);
        let n = values.len();
        let mean = compensated_sum(values.iter().copied()) / n as f64;
        let (std_error, ci_half_width) = if n >= 2 {
            let ss = compensated_sum(values.iter().map(|x| (x - mean) * (x - mean)));
            let se = (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt();
            let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
                .expect("valid degrees of freedom")
                .inverse_cdf(0.5 + level / 2.0);
            (se, t * se)
        } else {
            (0.0, 0.0)
        };
        EstimateSummary {
            mean,
            ci_half_width,
            std_error,
            replications: n,
            base_seed,
            level,
        }
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.ci_half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.ci_half_width
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower() <= x && x <= self.upper()
    }

    pub fn excludes_zero(&self) -> bool {
        !self.contains(0.0)
    }

    /// `|mean - x|` measured in standard errors.
    pub fn z_score(&self, x: f64) -> f64 {
        if self.std_error == 0.0 {
            if self.mean == x {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - x).abs() / self.std_error
        }
    }
}

/// Runs `reps` replications of `f` on streams `(base_seed, 0..reps)` and
/// returns the per-replication results in stream order.
///
/// Replications run concurrently when the `parallel` feature is enabled; the
/// result order does not depend on scheduling.
pub fn replicate_map<T, F>(reps: usize, base_seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut RngStream) -> Result<T> + Sync + Send,
{
    if reps == 0 {
        return Err(Error::param("reps", "must be at least 1"));
    }
    let run = |i: usize| {
        let mut rng = RngStream::new(base_seed, i as u64);
        f(&mut rng).map_err(|e| Error::Replication {
            stream_index: i as u64,
            source: Box::new(e),
        })
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..reps).into_par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..reps).map(run).collect()
    }
}

/// Runs `reps` replications, each reduced to one number, and summarizes them.
pub fn replicate<F>(reps: usize, base_seed: u64, f: F) -> Result<EstimateSummary>
where
    F: Fn(&mut RngStream) -> Result<f64> + Sync + Send,
{
    let values = replicate_map(reps, base_seed, f)?;
    Ok(EstimateSummary::from_values(&values, base_seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::sample_exponential;

    #[test]
    fn constant_statistic_has_zero_width() {
        let s = replicate(100, 1, |_| Ok(1.0)).unwrap();
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.ci_half_width, 0.0);
        assert_eq!(s.std_error, 0.0);
        assert_eq!(s.replications, 100);
    }

    #[test]
    fn exponential_holding_time_mean() {
        let s = replicate(10_000, 77, |rng| sample_exponential(1.0, rng)).unwrap();
        assert!(s.z_score(1.0) < 3.0, "{s:?}");
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let f = |rng: &mut RngStream| sample_exponential(3.0, rng);
        let a = replicate(500, 9, f).unwrap();
        let b = replicate(500, 9, f).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.ci_half_width.to_bits(), b.ci_half_width.to_bits());
    }

    #[test]
    fn failing_replication_names_stream() {
        let err = replicate(10, 0, |rng| {
            if rng.stream_index() == 7 {
                Err(Error::Model("boom".into()))
            } else {
                Ok(0.0)
            }
        })
        .unwrap_err();
        assert!(matches!(err, Error::Replication { stream_index: 7, .. }));
    }

    #[test]
    fn single_replication_reports_no_interval() {
        let s = EstimateSummary::from_values(&[2.5], 0);
        assert_eq!(s.ci_half_width, 0.0);
        assert_eq!(s.replications, 1);
    }

    #[test]
    fn t_interval_for_known_sample() {
        // n = 4, mean 2.5, sample sd sqrt(5/3); t_{0.975,3} = 3.182446
        let s = EstimateSummary::from_values(&[1.0, 2.0, 3.0, 4.0], 0);
        let se = (5.0f64 / 3.0).sqrt() / 2.0;
        assert!((s.std_error - se).abs() < 1e-12);
        assert!((s.ci_half_width - 3.182446 * se).abs() < 1e-5);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
    }
}
