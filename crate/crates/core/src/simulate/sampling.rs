use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use super::RngStream;
use crate::{Error, Result};

/// Exact `Γ(shape, scale)` variate.
///
/// Marsaglia–Tsang squeeze for `shape ≥ 1`; below that the
/// `Γ(shape + 1) · U^(1/shape)` boost, combined in log space. Results
/// below the normal `f64` range are flushed to `f64::MIN_POSITIVE`.
pub fn gamma_sample(stream: &mut RngStream, shape: f64, scale: f64) -> Result<f64> {
    if !(shape > 0.0 && shape.is_finite()) {
        return Err(Error::domain("gamma_sample", shape, "shape > 0"));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::domain("gamma_sample", scale, "scale > 0"));
    }
    Ok(gamma_unchecked(stream, shape, scale))
}

pub(crate) fn gamma_unchecked(stream: &mut RngStream, shape: f64, scale: f64) -> f64 {
    if shape >= 1.0 {
        return marsaglia_tsang(stream, shape) * scale;
    }
    let boosted = marsaglia_tsang(stream, shape + 1.0);
    let log_value = boosted.ln() + stream.open_unit().ln() / shape + scale.ln();
    log_value.exp().max(f64::MIN_POSITIVE)
}

fn marsaglia_tsang(stream: &mut RngStream, shape: f64) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = (9.0 * d).sqrt().recip();
    loop {
        let x: f64 = stream.sample(StandardNormal);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u = stream.open_unit();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Exact `NB(r, q)` count as a Gamma-mixed Poisson:
/// `Poisson(Γ(r, q/(1 − q)))`.
pub fn nb_sample(stream: &mut RngStream, r: f64, q: f64) -> Result<u64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain("nb_sample", r, "r > 0"));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain("nb_sample", q, "0 < q < 1"));
    }
    Ok(nb_unchecked(stream, r, q / (1.0 - q)))
}

/// `NB(r, q)` parameterised by the odds `q/(1 − q)`.
pub(crate) fn nb_unchecked(stream: &mut RngStream, r: f64, odds: f64) -> u64 {
    let lambda = gamma_unchecked(stream, r, odds);
    poisson(stream, lambda)
}

fn poisson(stream: &mut RngStream, lambda: f64) -> u64 {
    // the mixing draw is flushed to MIN_POSITIVE rather than 0
    if lambda < 1e-300 {
        return 0;
    }
    match Poisson::new(lambda) {
        Ok(dist) => {
            let k: f64 = dist.sample(stream);
            k as u64
        }
        // only for λ beyond ~1e19, far past any censoring threshold
        Err(_) => u64::MAX,
    }
}
