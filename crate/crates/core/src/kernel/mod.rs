//! Seeded exact simulation of continuous-time Markov chains, plus the
//! replication and aggregation machinery shared by every estimator.

mod ctmc;
mod replicate;
mod rng;
mod trajectory;

pub use ctmc::{
    exp1, run_ctmc, sample_exponential, simulate, FnGenerator, Generator, Jump, Observer, RunSummary,
    StoppingRule, TimeIntegral, MAX_DIM,
};
pub use replicate::{
    compensated_sum, replicate, replicate_map, Accumulator, EstimateSummary, DEFAULT_LEVEL,
};
pub use rng::{derive_seed, mix64, RngStream};
pub use trajectory::{StopReason, Trajectory};
