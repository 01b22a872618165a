use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::engines::{run_continuous_trial, run_discrete_trial, run_walk_trial};
use super::summary::{SimSummary, Tally};
use super::RngStream;
use crate::discrete::DiscretizationParams;
use crate::{Error, Result};

pub const DEFAULT_CAP: f64 = 1e6;
pub const DEFAULT_EPSILON: f64 = 1e-9;
/// Trials per random stream; chunk `c` of a campaign uses stream `c`.
pub const CHUNK_TRIALS: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SimMode {
    Continuous,
    Discrete,
    Walk,
}

impl SimMode {
    pub fn is_lattice(self) -> bool {
        !matches!(self, SimMode::Continuous)
    }
}

impl fmt::Display for SimMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimMode::Continuous => "continuous",
            SimMode::Discrete => "discrete",
            SimMode::Walk => "walk",
        })
    }
}

impl FromStr for SimMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuous" => Ok(SimMode::Continuous),
            "discrete" => Ok(SimMode::Discrete),
            "walk" => Ok(SimMode::Walk),
            _ => Err(Error::Config(format!(
                "unknown mode `{s}` (continuous | discrete | walk)"
            ))),
        }
    }
}

/// Monte Carlo campaign settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub mode: SimMode,
    pub p: f64,
    /// Lattice resolution `m = 1/δ`; required by the lattice modes.
    pub m: Option<u64>,
    pub trials: u64,
    pub seed: u64,
    /// Total-size censoring threshold.
    pub cap: f64,
    /// Continuous-mode extinction threshold.
    pub epsilon: f64,
    pub workers: usize,
}

impl SimConfig {
    /// Single-worker configuration with the default cap and epsilon.
    pub fn new(mode: SimMode, p: f64, trials: u64, seed: u64) -> Self {
        Self {
            mode,
            p,
            m: None,
            trials,
            seed,
            cap: DEFAULT_CAP,
            epsilon: DEFAULT_EPSILON,
            workers: 1,
        }
    }

    pub fn with_m(mut self, m: u64) -> Self {
        self.m = Some(m);
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_cap(mut self, cap: f64) -> Self {
        self.cap = cap;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// Checks the settings and returns the lattice, if the mode needs one.
    pub fn validate(&self) -> Result<Option<DiscretizationParams<f64>>> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.p > 0.0 && self.p.is_finite()) {
            return bad(format!("p must be positive and finite (got {})", self.p));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.cap > 1.0) {
            return bad(format!("cap must exceed 1 (got {})", self.cap));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1e-3) {
            return bad(format!(
                "epsilon must lie in (0, 1e-3) (got {})",
                self.epsilon
            ));
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if !self.mode.is_lattice() {
            return Ok(None);
        }
        let Some(m) = self.m else {
            return bad(format!(
                "mode `{}` needs the lattice resolution m",
                self.mode
            ));
        };
        DiscretizationParams::new(self.p, m)
            .map(Some)
            .map_err(|e| Error::Config(e.to_string()))
    }
}

struct Plan {
    config: SimConfig,
    lattice: Option<DiscretizationParams<f64>>,
}

impl Plan {
    fn chunks(&self) -> u64 {
        self.config.trials.div_ceil(CHUNK_TRIALS)
    }

    fn run_chunk(&self, chunk: u64, samples: Option<&mut Vec<f64>>) -> Tally {
        let c = &self.config;
        let mut stream = RngStream::new(c.seed, chunk);
        let n = CHUNK_TRIALS.min(c.trials - chunk * CHUNK_TRIALS);
        let mut tally = Tally::new();
        let mut samples = samples;
        for _ in 0..n {
            let finite = match (c.mode, &self.lattice) {
                (SimMode::Continuous, _) => {
                    let t = run_continuous_trial(&mut stream, c.p, c.cap, c.epsilon);
                    (!t.censored).then(|| {
                        tally.record_finite(t.size);
                        t.size
                    })
                }
                (mode, Some(d)) => {
                    let t = if mode == SimMode::Walk {
                        run_walk_trial(&mut stream, d, c.cap)
                    } else {
                        run_discrete_trial(&mut stream, d, c.cap)
                    };
                    (!t.censored).then(|| {
                        tally.record_lattice(t.steps, d.m());
                        t.steps as f64 / d.m() as f64
                    })
                }
                (_, None) => unreachable!("lattice modes are validated to carry a lattice"),
            };
            match (finite, samples.as_deref_mut()) {
                (Some(z), Some(out)) => out.push(z),
                (None, _) => tally.record_censored(),
                _ => {}
            }
        }
        tally
    }

    fn run(&self, keep_samples: bool) -> Result<(Tally, Vec<f64>)> {
        let work = |chunk: u64| {
            let mut samples = Vec::new();
            let tally = self.run_chunk(chunk, keep_samples.then_some(&mut samples));
            (tally, samples)
        };
        let parts: Vec<(Tally, Vec<f64>)> = if self.config.workers == 1 {
            (0..self.chunks()).map(work).collect()
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(self.config.workers)
                .build()
                .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
            pool.install(|| (0..self.chunks()).into_par_iter().map(work).collect())
        };
        // merged in chunk order so the sample vector is deterministic too
        let mut total = Tally::new();
        let mut samples = Vec::new();
        for (tally, mut s) in parts {
            total.merge(&tally)?;
            samples.append(&mut s);
        }
        Ok((total, samples))
    }
}

/// Runs `config.trials` independent trials and summarises them.
///
/// The result is a function of the configuration alone: the worker count
/// only affects wall time.
pub fn run_campaign(config: &SimConfig) -> Result<SimSummary> {
    run_campaign_with_samples(config, false).map(|(s, _)| s)
}

/// As [`run_campaign`], optionally also returning every finite size in
/// trial order.
pub fn run_campaign_with_samples(
    config: &SimConfig,
    keep_samples: bool,
) -> Result<(SimSummary, Vec<f64>)> {
    let lattice = config.validate()?;
    let plan = Plan {
        config: config.clone(),
        lattice,
    };
    let (tally, samples) = plan.run(keep_samples)?;
    Ok((
        SimSummary {
            config: config.clone(),
            tally,
        },
        samples,
    ))
}
