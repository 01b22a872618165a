use serde::{Serialize, Serializer};

use super::campaign::SimConfig;
use crate::{Error, Result};

/// Lower edge of the first histogram bin.
pub const HISTOGRAM_LO: f64 = 1.0;
/// Bin width; bins cover `[1, 50)`, anything above lands in the overflow bin.
pub const HISTOGRAM_WIDTH: f64 = 0.05;
pub const HISTOGRAM_BINS: usize = 980;
const BINS_PER_UNIT: u64 = 20;

/// Floating-point sum kept as non-overlapping partials (Shewchuk), so the
/// result is exact until [`value`](Self::value) rounds it once.
///
/// Adding the same multiset of values in any order or grouping yields the
/// same `value()`; equality and serialization go through that value.
#[derive(Debug, Clone, Default)]
pub struct ExactSum {
    partials: Vec<f64>,
    // inf/nan inputs bypass the partials
    special: f64,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        if !x.is_finite() {
            self.special += x;
            return;
        }
        let mut x = x;
        let mut kept = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[kept] = lo;
                kept += 1;
            }
            x = hi;
        }
        self.partials.truncate(kept);
        self.partials.push(x);
    }

    pub fn merge(&mut self, other: &ExactSum) {
        for &x in &other.partials {
            self.add(x);
        }
        self.special += other.special;
    }

    /// The sum rounded once to nearest (ties to even).
    pub fn value(&self) -> f64 {
        if self.special != 0.0 || self.special.is_nan() {
            return self.special;
        }
        let p = &self.partials;
        let mut n = p.len();
        if n == 0 {
            return 0.0;
        }
        n -= 1;
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            let y = p[n - 1];
            n -= 1;
            hi = x + y;
            lo = y - (hi - x);
            if lo != 0.0 {
                break;
            }
        }
        // half-way case: the remaining partials decide the rounding direction
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
        hi
    }
}

impl PartialEq for ExactSum {
    fn eq(&self, other: &Self) -> bool {
        self.value().to_bits() == other.value().to_bits()
    }
}

impl Serialize for ExactSum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

/// Fixed-edge histogram of cascade sizes `z`, shared by all engines.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub width: f64,
    pub counts: Vec<u64>,
    /// Sizes at or above `lo + width · counts.len()`.
    pub overflow: u64,
}

impl Default for Histogram {
    fn default() -> Self {
        Self {
            lo: HISTOGRAM_LO,
            width: HISTOGRAM_WIDTH,
            counts: vec![0; HISTOGRAM_BINS],
            overflow: 0,
        }
    }
}

impl Histogram {
    pub fn new() -> Self {
        Self::default()
    }

    fn bump(&mut self, index: u64) {
        match self.counts.get_mut(index as usize) {
            Some(c) if index < HISTOGRAM_BINS as u64 => *c += 1,
            _ => self.overflow += 1,
        }
    }

    /// Records a continuous size.
    pub fn add(&mut self, z: f64) {
        let scaled = ((z - HISTOGRAM_LO) * BINS_PER_UNIT as f64).floor();
        // sizes are ≥ 1 by construction; anything below goes to bin 0
        let index = if scaled > 0.0 {
            scaled.min(u64::MAX as f64) as u64
        } else {
            0
        };
        self.bump(index);
    }

    /// Records a lattice size `steps/m` using integer bin arithmetic, so
    /// lattice points on a bin edge never round into the wrong bin.
    pub fn add_lattice(&mut self, steps: u64, m: u64) {
        let excess =
            u128::from(steps.saturating_sub(m)) * u128::from(BINS_PER_UNIT) / u128::from(m);
        self.bump(u64::try_from(excess).unwrap_or(u64::MAX));
    }

    /// Lower bin edges followed by the upper edge of the last bin.
    pub fn edges(&self) -> Vec<f64> {
        (0..=self.counts.len())
            .map(|i| self.lo + i as f64 * self.width)
            .collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.overflow
    }

    pub fn same_edges(&self, other: &Histogram) -> bool {
        self.lo.to_bits() == other.lo.to_bits()
            && self.width.to_bits() == other.width.to_bits()
            && self.counts.len() == other.counts.len()
    }

    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        if !self.same_edges(other) {
            return Err(Error::Config("histograms have different bin edges".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.overflow += other.overflow;
        Ok(())
    }
}

/// Counts and exact moment sums over a batch of trials.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Tally {
    pub n_finite: u64,
    pub n_censored: u64,
    pub sum: ExactSum,
    pub sum_sq: ExactSum,
    pub histogram: Histogram,
}

impl Tally {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_censored(&mut self) {
        self.n_censored += 1;
    }

    pub fn record_finite(&mut self, z: f64) {
        self.n_finite += 1;
        self.sum.add(z);
        self.sum_sq.add(z * z);
        self.histogram.add(z);
    }

    pub fn record_lattice(&mut self, steps: u64, m: u64) {
        let z = steps as f64 / m as f64;
        self.n_finite += 1;
        self.sum.add(z);
        self.sum_sq.add(z * z);
        self.histogram.add_lattice(steps, m);
    }

    pub fn trials(&self) -> u64 {
        self.n_finite + self.n_censored
    }

    pub fn merge(&mut self, other: &Tally) -> Result<()> {
        self.histogram.merge(&other.histogram)?;
        self.n_finite += other.n_finite;
        self.n_censored += other.n_censored;
        self.sum.merge(&other.sum);
        self.sum_sq.merge(&other.sum_sq);
        Ok(())
    }
}

/// Result of a campaign: the tally plus the configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSummary {
    pub config: SimConfig,
    #[serde(flatten)]
    pub tally: Tally,
}

impl SimSummary {
    /// Field-wise sum of two summaries of the same model.
    ///
    /// Configurations must agree in everything but `trials`, which add.
    pub fn merge(&self, other: &SimSummary) -> Result<SimSummary> {
        let mut a = self.config.clone();
        let mut b = other.config.clone();
        a.trials = 0;
        b.trials = 0;
        if a != b {
            return Err(Error::Config(
                "cannot merge summaries of different configurations".into(),
            ));
        }
        let mut tally = self.tally.clone();
        tally.merge(&other.tally)?;
        let mut config = self.config.clone();
        config.trials = self.config.trials + other.config.trials;
        Ok(SimSummary { config, tally })
    }

    pub fn n_finite(&self) -> u64 {
        self.tally.n_finite
    }

    pub fn n_censored(&self) -> u64 {
        self.tally.n_censored
    }

    pub fn histogram(&self) -> &Histogram {
        &self.tally.histogram
    }

    pub fn trials(&self) -> u64 {
        self.tally.trials()
    }

    pub fn finite_fraction(&self) -> f64 {
        self.tally.n_finite as f64 / self.trials() as f64
    }

    /// Binomial standard error of [`finite_fraction`](Self::finite_fraction).
    pub fn finite_fraction_se(&self) -> f64 {
        let f = self.finite_fraction();
        (f * (1.0 - f) / self.trials() as f64).sqrt()
    }

    /// Mean size over finite trials (NaN if there are none).
    pub fn mean(&self) -> f64 {
        self.tally.sum.value() / self.tally.n_finite as f64
    }

    /// Unbiased sample variance over finite trials.
    pub fn variance(&self) -> f64 {
        let n = self.tally.n_finite as f64;
        let mean = self.mean();
        let mut centred = self.tally.sum_sq.clone();
        centred.add(-mean * self.tally.sum.value());
        centred.value().max(0.0) / (n - 1.0)
    }

    pub fn mean_se(&self) -> f64 {
        (self.variance() / self.tally.n_finite as f64).sqrt()
    }
}
