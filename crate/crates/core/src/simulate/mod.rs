//! Monte Carlo engines for the three equivalent descriptions of a cascade:
//! continuous Gamma branching, discrete negative-binomial branching, and
//! the first-passage random walk.
//!
//! Campaigns are split into fixed-size chunks; chunk `c` draws from
//! [`RngStream`]`(seed, c)`. Chunk tallies use exact summation, so a
//! campaign's [`SimSummary`] does not depend on how many workers ran it or
//! in which order the chunks finished.

mod campaign;
mod engines;
mod rng;
mod sampling;
mod summary;

pub use campaign::{
    run_campaign, run_campaign_with_samples, SimConfig, SimMode, CHUNK_TRIALS, DEFAULT_CAP,
    DEFAULT_EPSILON,
};
pub use engines::{
    run_continuous_trial, run_discrete_trial, run_walk_trial, step_cap, LatticeTrial, Trial,
};
pub use rng::RngStream;
pub use sampling::{gamma_sample, nb_sample};
pub use summary::{
    ExactSum, Histogram, SimSummary, Tally, HISTOGRAM_BINS, HISTOGRAM_LO, HISTOGRAM_WIDTH,
};
