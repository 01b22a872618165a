//! Exact cascade density of the Gamma(2, p) branching process and the
//! quantities derived from it.
//!
//! With `X₀ = 1` and `Xₙ ~ Γ(2 Xₙ₋₁, p)`, the total size `Z = Σ Xₖ` has the
//! (possibly defective) density
//!
//! ```text
//! g(x) = (x − 1)^(2x − 1) · exp(−(1/p + 2 ln p) x + 1/p) / (x Γ(2x)),   x ≥ 1
//! ```
//!
//! whose total mass is `P{Z < ∞} = exp(χ(p))`.

use serde::Serialize;

use crate::numerics::{
    integrate_adaptive, lambert_w_m1, log_gamma_unchecked, solve_bracketed, Interval,
    DEFAULT_ROOT_TOL,
};
use crate::{Error, Real, Result};

/// Shape of the offspring Gamma law; fixed.
pub const GAMMA_SHAPE: u32 = 2;

/// Largest truncation point considered when integrating the density.
const MAX_TRUNCATION_DOUBLINGS: u32 = 26;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams<T> {
    p: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(p: T) -> Result<Self> {
        if !p.is_finite() || p <= T::zero() {
            return Err(Error::domain("ModelParams", p.as_f64(), "p > 0 and finite"));
        }
        Ok(Self { p })
    }

    /// Gamma scale θ = p.
    pub fn p(&self) -> T {
        self.p
    }

    pub fn shape(&self) -> u32 {
        GAMMA_SHAPE
    }

    /// Offspring mean `E(X₁ | X₀ = 1) = 2p`.
    pub fn offspring_mean(&self) -> T {
        T::lit(2.0) * self.p
    }

    pub fn is_subcritical(&self) -> bool {
        self.offspring_mean() < T::one()
    }

    /// `ln g(x)`, evaluated entirely in log space; `-∞` at `x = 1`.
    pub fn log_density(&self, x: T) -> Result<T> {
        if !x.is_finite() || x < T::one() {
            return Err(Error::domain(
                "log_density",
                x.as_f64(),
                "x >= 1 and finite",
            ));
        }
        if x == T::one() {
            return Ok(T::neg_infinity());
        }
        let p = self.p;
        let two = T::lit(2.0);
        let inv_p = p.recip();
        Ok(
            (two * x - T::one()) * (x - T::one()).ln() - (inv_p + two * p.ln()) * x + inv_p
                - x.ln()
                - log_gamma_unchecked(two * x),
        )
    }

    pub fn density(&self, x: T) -> Result<T> {
        self.log_density(x).map(T::exp)
    }

    /// Exponential decay rate `(1 − 2p)/p + 2 ln 2p` of the large-`x` tail.
    /// Non-negative for all `p`, zero only at `p = 1/2`.
    pub fn tail_decay_rate(&self) -> T {
        let p = self.p;
        let two = T::lit(2.0);
        let rate = (T::one() - two * p) / p + two * (two * p).ln();
        rate.max(T::zero())
    }

    /// `ln` of the prefactor `e^(1/p − 2 + ln 2) / (2√π)`.
    pub fn tail_log_prefactor(&self) -> T {
        let two = T::lit(2.0);
        self.p.recip() - two + two.ln() - (two * T::PI().sqrt()).ln()
    }

    /// Log of the large-`x` asymptote `C e^(−a x) x^(−3/2)`.
    pub fn asymptotic_log_density(&self, x: T) -> Result<T> {
        if !x.is_finite() || x < T::one() {
            return Err(Error::domain(
                "asymptotic_log_density",
                x.as_f64(),
                "x >= 1 and finite",
            ));
        }
        Ok(self.tail_log_prefactor() - self.tail_decay_rate() * x - T::lit(1.5) * x.ln())
    }

    /// Closed-form mean and variance of `Z`; only defined for `p < 1/2`.
    pub fn moments(&self) -> Result<Moments<T>> {
        if !self.is_subcritical() {
            return Err(Error::NotSubcritical { p: self.p.as_f64() });
        }
        let gap = T::one() - T::lit(2.0) * self.p;
        Ok(Moments {
            mean: gap.recip(),
            variance: T::lit(2.0) * self.p * self.p / (gap * gap * gap),
        })
    }

    /// Extinction exponent `x(p)` through Lambert `W₋₁`, and the resulting
    /// finite-cascade probability.
    pub fn extinction(&self) -> ExtinctionReport<T> {
        let p = self.p;
        let half = T::lit(0.5);
        if p <= half {
            return ExtinctionReport::certain(p);
        }
        let two = T::lit(2.0);
        let arg = -(-(two * p).recip()).exp() / (two * p);
        let w = lambert_w_m1(arg).expect("argument lies in [-1/e, 0) for p > 1/2");
        let x_of_p = (-two * w - p.recip()).max(T::zero());
        ExtinctionReport::from_exponent(p, x_of_p)
    }

    /// Positive root of `x = 2 ln(1 + p x)`, found by bracketing; zero for
    /// `p ≤ 1/2`. Independent of [`ModelParams::extinction`].
    pub fn extinction_exponent_by_root(&self) -> Result<T> {
        let p = self.p;
        if p <= T::lit(0.5) {
            return Ok(T::zero());
        }
        let two = T::lit(2.0);
        let f = |x: T| two * (p * x).ln_1p() - x;
        // small-x expansion puts the root beyond (2p − 1)/p²
        let mut lo = T::lit(0.5) * (two * p - T::one()) / (p * p);
        let mut tries = 0;
        while f(lo) <= T::zero() {
            lo = lo * T::lit(0.5);
            tries += 1;
            if tries > 200 {
                return Err(Error::NoSignChange {
                    lo: lo.as_f64(),
                    hi: lo.as_f64(),
                    f_lo: f(lo).as_f64(),
                    f_hi: f(lo).as_f64(),
                });
            }
        }
        let mut hi = lo * two;
        while f(hi) >= T::zero() {
            hi = hi * two;
            if !hi.is_finite() {
                return Err(Error::NoSignChange {
                    lo: lo.as_f64(),
                    hi: hi.as_f64(),
                    f_lo: f(lo).as_f64(),
                    f_hi: f(hi).as_f64(),
                });
            }
        }
        solve_bracketed(f, Interval::new(lo, hi)?, T::lit(DEFAULT_ROOT_TOL))
    }

    /// `∫₁^∞ xᵏ g(x) dx` as adaptive quadrature over doubling panels
    /// `[1, 2], [2, 4], …, [X/2, X]` plus an asymptotic tail estimate
    /// beyond the truncation point `X`.
    pub fn weighted_integral(&self, power: u32, abs_tol: T) -> Result<TailIntegral<T>> {
        if !(abs_tol > T::zero()) {
            return Err(Error::domain(
                "weighted_integral",
                abs_tol.as_f64(),
                "abs_tol > 0",
            ));
        }
        let two = T::lit(2.0);
        let ln_c = self.tail_log_prefactor();
        let rate = self.tail_decay_rate();
        let exponent = T::from_u32(power).unwrap() - T::lit(1.5);
        let tail_budget = abs_tol / T::lit(10.0);

        let (x_max, tail) = if rate > T::zero() {
            let tail_at = |x: T| (ln_c + exponent * x.ln() - rate * x).exp() / rate;
            let mut x_max = two;
            let mut doublings = 1;
            // require rate·X past a few e-folds so the first-order term dominates
            while (tail_at(x_max) > tail_budget || rate * x_max < T::lit(10.0) + exponent)
                && doublings < MAX_TRUNCATION_DOUBLINGS
            {
                x_max = x_max * two;
                doublings += 1;
            }
            let mut tail = tail_at(x_max);
            if power == 0 {
                // x^(-3/2) without damping bounds the tail from above
                tail = tail.min(two * ln_c.exp() / x_max.sqrt());
            }
            (x_max, tail)
        } else {
            if power > 0 {
                return Err(Error::NotSubcritical { p: self.p.as_f64() });
            }
            // pure power tail C x^(-3/2); the neglected O(1/x) correction
            // integrates to O(C X^(-3/2))
            let c = ln_c.exp();
            let mut x_max = two;
            let mut doublings = 1;
            while c * x_max.powf(T::lit(-1.5)) > tail_budget && doublings < MAX_TRUNCATION_DOUBLINGS
            {
                x_max = x_max * two;
                doublings += 1;
            }
            (x_max, two * c / x_max.sqrt())
        };

        let panels = x_max.log2().round().to_u32().unwrap_or(1).max(1);
        let panel_tol = (abs_tol - tail_budget) / T::from_u32(panels).unwrap();
        let mut value = T::zero();
        let mut quadrature_error = T::zero();
        let mut evaluations = 0;
        let mut lo = T::one();
        for _ in 0..panels {
            let hi = lo * two;
            let r = integrate_adaptive(
                |x: T| {
                    let ld = self.log_density(x).unwrap_or(T::neg_infinity());
                    (ld + T::from_u32(power).unwrap() * x.ln()).exp()
                },
                Interval::new(lo, hi)?,
                panel_tol,
            )?;
            value = value + r.value;
            quadrature_error = quadrature_error + r.abs_error_estimate;
            evaluations += r.evaluations;
            lo = hi;
        }
        Ok(TailIntegral {
            value: value + tail,
            quadrature_error,
            tail,
            x_max,
            evaluations,
        })
    }

    /// Integrates the density and compares the total mass with the
    /// finite-cascade probability from [`ModelParams::extinction`].
    pub fn verify_normalization(&self, abs_tol: T) -> Result<NormalizationCheck<T>> {
        let integral = self.weighted_integral(0, abs_tol)?;
        let target = self.extinction().prob_finite;
        Ok(NormalizationCheck {
            integral: integral.value,
            target,
            residual: (integral.value - target).abs(),
            quadrature_error: integral.quadrature_error,
            tail: integral.tail,
            x_max: integral.x_max,
        })
    }

    /// Mean and variance of `Z` from quadrature of `x g(x)` and `x² g(x)`.
    pub fn quadrature_moments(&self, abs_tol: T) -> Result<Moments<T>> {
        if !self.is_subcritical() {
            return Err(Error::NotSubcritical { p: self.p.as_f64() });
        }
        let first = self.weighted_integral(1, abs_tol)?.value;
        let second = self.weighted_integral(2, abs_tol)?.value;
        Ok(Moments {
            mean: first,
            variance: second - first * first,
        })
    }

    /// `P{Z ≤ x}` restricted to finite cascades, by quadrature of `g`.
    pub fn cdf(&self, x: T, abs_tol: T) -> Result<T> {
        if x <= T::one() {
            return Ok(T::zero());
        }
        let r = integrate_adaptive(
            |t: T| self.density(t).unwrap_or(T::zero()),
            Interval::new(T::one(), x)?,
            abs_tol,
        )?;
        Ok(r.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments<T> {
    pub mean: T,
    pub variance: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtinctionReport<T> {
    pub p: T,
    pub x_of_p: T,
    pub chi: T,
    pub prob_finite: T,
}

impl<T: Real> ExtinctionReport<T> {
    fn certain(p: T) -> Self {
        Self {
            p,
            x_of_p: T::zero(),
            chi: T::zero(),
            prob_finite: T::one(),
        }
    }

    pub(crate) fn from_exponent(p: T, x_of_p: T) -> Self {
        let chi = -x_of_p;
        Self {
            p,
            x_of_p,
            chi,
            prob_finite: chi.exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailIntegral<T> {
    /// Panel quadrature plus `tail`.
    pub value: T,
    pub quadrature_error: T,
    pub tail: T,
    pub x_max: T,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizationCheck<T> {
    pub integral: T,
    pub target: T,
    pub residual: T,
    pub quadrature_error: T,
    pub tail: T,
    pub x_max: T,
}

/// Density tabulated on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityTable<T> {
    pub params: ModelParams<T>,
    pub points: Vec<(T, T)>,
}

impl<T: Real> DensityTable<T> {
    /// `steps` equally spaced points on `[x_min, x_max]`, endpoints included.
    pub fn tabulate(params: ModelParams<T>, x_min: T, x_max: T, steps: usize) -> Result<Self> {
        if steps < 2 {
            return Err(Error::Config(format!(
                "steps must be at least 2 (got {steps})"
            )));
        }
        if !(x_min >= T::one()) {
            return Err(Error::domain("DensityTable", x_min.as_f64(), "x_min >= 1"));
        }
        let span = Interval::new(x_min, x_max)?;
        let last = T::from_usize(steps - 1).unwrap();
        let points = (0..steps)
            .map(|i| {
                let x = if i == steps - 1 {
                    span.hi()
                } else {
                    span.lo() + span.width() * T::from_usize(i).unwrap() / last
                };
                params.density(x).map(|g| (x, g))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { params, points })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(p: f64) -> ModelParams<f64> {
        ModelParams::new(p).unwrap()
    }

    #[test]
    fn rejects_bad_p() {
        assert!(ModelParams::new(0.0).is_err());
        assert!(ModelParams::new(-0.3).is_err());
        assert!(ModelParams::new(f64::NAN).is_err());
        assert_eq!(model(0.3).shape(), 2);
    }

    #[test]
    fn density_vanishes_at_one() {
        let m = model(0.4);
        assert_eq!(m.log_density(1.0).unwrap(), f64::NEG_INFINITY);
        assert_eq!(m.density(1.0).unwrap(), 0.0);
        assert!(m.log_density(0.999).is_err());
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn density_at_two_matches_extended_precision() {
        // ln g(2; p = 0.4), 50-digit evaluation of the closed form
        let expected = -1.319_743_722_291_380_049_495_600_632_766_8;
        let got = model(0.4).log_density(2.0).unwrap();
        assert!((got - expected).abs() < 1e-13, "{got}");
    }

    #[test]
    fn subcritical_tail_decays_monotonically() {
        let m = model(0.25);
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let x = 5.0 + i as f64;
            let g = m.density(x).unwrap();
            assert!(g < prev);
            prev = g;
        }
        assert!(m.density(5e3).unwrap() < 1e-200);
    }

    #[test]
    fn critical_decay_rate_is_zero() {
        assert_eq!(model(0.5).tail_decay_rate(), 0.0);
        assert!(model(0.3).tail_decay_rate() > 0.0);
        assert!(model(0.7).tail_decay_rate() > 0.0);
    }

    #[test]
    fn asymptote_at_criticality_literal() {
        // ln(e^(ln 2)/(2√π)) − 1.5 ln 100
        let expected =
            (2.0_f64.ln().exp() / (2.0 * std::f64::consts::PI.sqrt())).ln() - 1.5 * 100f64.ln();
        let got = model(0.5).asymptotic_log_density(100.0).unwrap();
        assert!((got - expected).abs() < 1e-13);
        assert!(model(0.5).asymptotic_log_density(0.5).is_err());
    }

    #[test]
    fn closed_form_moments() {
        let m = model(0.25).moments().unwrap();
        assert!((m.mean - 2.0).abs() < 1e-15);
        assert!((m.variance - 1.0).abs() < 1e-15);
        let m = model(0.4).moments().unwrap();
        assert!((m.mean - 5.0).abs() < 1e-13);
        assert!((m.variance - 40.0).abs() < 1e-11);
        let m = model(1e-9).moments().unwrap();
        assert!((m.mean - 1.0).abs() < 1e-8 && m.variance < 1e-16);
        assert!(matches!(
            model(0.5).moments(),
            Err(Error::NotSubcritical { .. })
        ));
        assert!(model(0.7).moments().is_err());
    }

    #[test]
    fn extinction_critical_and_subcritical() {
        for p in [0.1, 0.3, 0.5] {
            let r = model(p).extinction();
            assert_eq!(r.prob_finite, 1.0);
            assert_eq!(r.x_of_p, 0.0);
            assert_eq!(r.chi, 0.0);
        }
        assert_eq!(model(0.5).extinction_exponent_by_root().unwrap(), 0.0);
    }

    #[test]
    fn extinction_supercritical_invariants() {
        let r = model(0.6).extinction();
        assert!(r.chi <= 0.0);
        assert_eq!(r.chi, -r.x_of_p);
        assert_eq!(r.prob_finite, r.chi.exp());
    }

    #[test]
    fn tabulate_grid() {
        let t = DensityTable::tabulate(model(0.4), 1.0, 10.0, 10).unwrap();
        assert_eq!(t.points.len(), 10);
        assert_eq!(t.points[0], (1.0, 0.0));
        assert_eq!(t.points[9].0, 10.0);
        assert!((t.points[1].0 - 2.0).abs() < 1e-15);
        assert!(DensityTable::tabulate(model(0.4), 1.0, 10.0, 1).is_err());
        assert!(DensityTable::tabulate(model(0.4), 0.5, 10.0, 5).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let m = ModelParams::new(0.4_f32).unwrap();
        let g = m.density(2.0).unwrap();
        assert!((g - 0.267_203_77).abs() < 1e-5);
    }
}
