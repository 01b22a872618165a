//! Negative-binomial lattice approximation of the Gamma branching process.
//!
//! The line is cut into cells of width `δ = 1/m`. One unit of mass is `m`
//! individuals, each of which has `NB(r*, q*)` children with
//!
//! ```text
//! r* = 2δp / (p − δ),    q* = (p − δ) / p,
//! ```
//!
//! so that `m` individuals together reproduce the first two moments of
//! `Γ(2, p)`. The total progeny of `m` individuals has an explicit mass
//! function obtained by Lagrange inversion of `H(s) = s F(H(s))`.

use serde::Serialize;

use crate::continuum::{ExtinctionReport, ModelParams, Moments};
use crate::numerics::{log_gamma_unchecked, solve_bracketed, Interval};
use crate::{Error, Real, Result};

/// Default cumulative tail mass left out of automatically sized tables.
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;
/// Default hard cap on the number of rows in automatically sized tables.
pub const DEFAULT_HARD_CAP: u64 = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscretizationParams<T> {
    p: T,
    m: u64,
    delta: T,
    r_star: T,
    q_star: T,
    /// `1 − q* = δ/p`, kept separately to avoid cancellation.
    q_complement: T,
}

impl<T: Real> DiscretizationParams<T> {
    /// Lattice with `m` cells per unit mass; requires `δ = 1/m < p`.
    pub fn new(p: T, m: u64) -> Result<Self> {
        let model = ModelParams::new(p)?;
        Self::from_model(&model, m)
    }

    pub fn from_model(model: &ModelParams<T>, m: u64) -> Result<Self> {
        let p = model.p();
        let m_real = T::from_u64(m).unwrap_or_else(T::zero);
        if m == 0 || !(m_real * p > T::one()) {
            return Err(Error::domain(
                "DiscretizationParams",
                m as f64,
                "integer m > 1/p (lattice spacing below p)",
            ));
        }
        let delta = m_real.recip();
        // the atomic law is the m-th convolution root of the matched NB
        let (r, q_star) = matched_nb_params(T::lit(2.0), p, delta);
        let r_star = r * delta;
        if !(q_star > T::zero() && q_star < T::one() && r_star > T::zero()) {
            return Err(Error::domain(
                "DiscretizationParams",
                m as f64,
                "0 < q* < 1",
            ));
        }
        Ok(Self {
            p,
            m,
            delta,
            r_star,
            q_star,
            q_complement: delta / p,
        })
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn r_star(&self) -> T {
        self.r_star
    }

    pub fn q_star(&self) -> T {
        self.q_star
    }

    pub fn model(&self) -> ModelParams<T> {
        ModelParams::new(self.p).expect("validated at construction")
    }

    pub fn atomic(&self) -> AtomicDistribution<T> {
        AtomicDistribution {
            r_star: self.r_star,
            q_star: self.q_star,
            q_complement: self.q_complement,
        }
    }
}

/// Moment-matched `(r, q)` for a lattice of spacing `delta` approximating
/// `Γ(k, θ)`: `r = kθ/(θ − δ)`, `q = (θ − δ)/θ`.
pub fn matched_nb_params<T: Real>(shape: T, theta: T, delta: T) -> (T, T) {
    let gap = theta - delta;
    (shape * theta / gap, gap / theta)
}

/// Offspring law of a single lattice individual: `NB(r*, q*)` counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomicDistribution<T> {
    pub r_star: T,
    pub q_star: T,
    pub q_complement: T,
}

impl<T: Real> AtomicDistribution<T> {
    /// Mean offspring count `r* q*/(1 − q*)`; equals `2p`.
    pub fn mean(&self) -> T {
        self.r_star * self.q_star / self.q_complement
    }

    pub fn variance(&self) -> T {
        let c = self.q_complement;
        self.r_star * self.q_star / (c * c)
    }

    pub fn log_pmf(&self, n: u64) -> T {
        nb_log_pmf_split(n, self.r_star, self.q_star, self.q_complement.ln())
    }
}

/// `ln b(n, r, q)` with `b(n, r, q) = Γ(n + r)/(n! Γ(r)) (1 − q)^r qⁿ`.
pub fn nb_log_pmf<T: Real>(n: u64, r: T, q: T) -> Result<T> {
    if !r.is_finite() || r <= T::zero() {
        return Err(Error::domain("nb_log_pmf", r.as_f64(), "r > 0"));
    }
    if !(q > T::zero() && q < T::one()) {
        return Err(Error::domain("nb_log_pmf", q.as_f64(), "0 < q < 1"));
    }
    Ok(nb_log_pmf_split(n, r, q, (-q).ln_1p()))
}

fn nb_log_pmf_split<T: Real>(n: u64, r: T, q: T, ln_q_complement: T) -> T {
    let nr = T::from_u64(n).unwrap();
    let base = r * ln_q_complement;
    if n == 0 {
        return base;
    }
    log_gamma_unchecked(nr + r) - log_gamma_unchecked(nr + T::one()) - log_gamma_unchecked(r)
        + base
        + nr * q.ln()
}

/// Pair `(δ⁻¹ b(⌊x/δ⌋, r, q), Γ(2, θ) density at x)` for the moment-matched
/// lattice of spacing `delta`.
pub fn gamma_density_limit_check<T: Real>(theta: T, delta: T, x: T) -> Result<(T, T)> {
    if !(theta > T::zero() && theta.is_finite()) {
        return Err(Error::domain(
            "gamma_density_limit_check",
            theta.as_f64(),
            "theta > 0",
        ));
    }
    if !(delta > T::zero() && delta < theta) {
        return Err(Error::domain(
            "gamma_density_limit_check",
            delta.as_f64(),
            "0 < delta < theta",
        ));
    }
    if !(x > T::zero() && x.is_finite()) {
        return Err(Error::domain(
            "gamma_density_limit_check",
            x.as_f64(),
            "x > 0",
        ));
    }
    let (r, q) = matched_nb_params(T::lit(2.0), theta, delta);
    let n = lattice_index(x / delta);
    let discrete = nb_log_pmf(n, r, q)?.exp() / delta;
    let continuum = x * (-x / theta).exp() / (theta * theta);
    Ok((discrete, continuum))
}

/// `⌊v⌋` that absorbs the rounding of `x/δ` when `x` sits on a lattice point.
fn lattice_index<T: Real>(v: T) -> u64 {
    let nudged = v * (T::one() + T::lit(16.0) * T::epsilon());
    nudged.floor().to_u64().unwrap_or(u64::MAX)
}

/// `ln P{Z_δ(m) = n}` for the total progeny of `m_start` individuals:
///
/// ```text
/// (m/n) Γ(n(1 + r*) − m) / (Γ(n r*) Γ(n − m + 1)) (1 − q*)^(r* n) (q*)^(n − m)
/// ```
///
/// and `-∞` for `n < m_start`.
pub fn cascade_log_pmf<T: Real>(
    params: &DiscretizationParams<T>,
    m_start: u64,
    n: u64,
) -> Result<T> {
    if m_start == 0 {
        return Err(Error::domain("cascade_log_pmf", 0.0, "m_start >= 1"));
    }
    if n < m_start {
        return Ok(T::neg_infinity());
    }
    let r = params.r_star;
    let q = params.q_star;
    let nr = T::from_u64(n).unwrap();
    let mr = T::from_u64(m_start).unwrap();
    let excess = T::from_u64(n - m_start).unwrap();
    let n_r = nr * r;
    // n(1 + r*) − m written as (n − m) + n r* so the n = m case cancels exactly
    let gamma_terms = if n == m_start {
        T::zero()
    } else {
        log_gamma_unchecked(excess + n_r)
            - log_gamma_unchecked(n_r)
            - log_gamma_unchecked(excess + T::one())
    };
    let mut lp = gamma_terms + n_r * params.q_complement.ln();
    if n > m_start {
        lp = lp + (mr / nr).ln() + excess * q.ln();
    }
    Ok(lp)
}

/// How far to extend a cascade mass-function table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TableLimit {
    /// Fixed last row `n_max`.
    UpTo(u64),
    /// Extend until the geometric tail estimate drops below `tail_tol`, or
    /// `hard_cap` rows, whichever comes first.
    Auto { tail_tol: f64, hard_cap: u64 },
}

impl Default for TableLimit {
    fn default() -> Self {
        TableLimit::Auto {
            tail_tol: DEFAULT_TAIL_TOL,
            hard_cap: DEFAULT_HARD_CAP,
        }
    }
}

/// Tabulated `P{Z_δ(m_start) = n}` for `n = m_start ..= n_max`, stored in
/// log space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CascadePmf<T> {
    pub params: DiscretizationParams<T>,
    pub m_start: u64,
    log_probabilities: Vec<T>,
    /// Set when an automatic table hit its hard cap before the tail target.
    pub truncated: bool,
}

impl<T: Real> CascadePmf<T> {
    pub fn n_max(&self) -> u64 {
        self.m_start + self.log_probabilities.len() as u64 - 1
    }

    pub fn len(&self) -> usize {
        self.log_probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_probabilities.is_empty()
    }

    pub fn log_probability(&self, n: u64) -> T {
        if n < self.m_start {
            return T::neg_infinity();
        }
        self.log_probabilities
            .get((n - self.m_start) as usize)
            .copied()
            .unwrap_or(T::neg_infinity())
    }

    pub fn probability(&self, n: u64) -> T {
        self.log_probability(n).exp()
    }

    /// `(n, P{Z_δ(m) = n})` rows in increasing `n`.
    pub fn iter(&self) -> impl Iterator<Item = (u64, T)> + '_ {
        self.log_probabilities
            .iter()
            .enumerate()
            .map(move |(i, lp)| (self.m_start + i as u64, lp.exp()))
    }

    /// Total tabulated mass, accumulated as `exp` offsets from the running
    /// maximum.
    pub fn total_mass(&self) -> T {
        let mut max = T::neg_infinity();
        let mut scaled = T::zero();
        for &lp in &self.log_probabilities {
            if lp == T::neg_infinity() {
                continue;
            }
            if lp > max {
                scaled = scaled * (max - lp).exp() + T::one();
                max = lp;
            } else {
                scaled = scaled + (lp - max).exp();
            }
        }
        if max == T::neg_infinity() {
            T::zero()
        } else {
            max.exp() * scaled
        }
    }

    /// Running cumulative mass alongside each row.
    pub fn cumulative(&self) -> Vec<T> {
        let mut acc = T::zero();
        let mut comp = T::zero();
        self.iter()
            .map(|(_, pr)| {
                // Kahan
                let y = pr - comp;
                let t = acc + y;
                comp = (t - acc) - y;
                acc = t;
                acc
            })
            .collect()
    }
}

/// Tabulates the cascade mass function of `m_start` individuals.
pub fn cascade_pmf_table<T: Real>(
    params: &DiscretizationParams<T>,
    m_start: u64,
    limit: TableLimit,
) -> Result<CascadePmf<T>> {
    if m_start == 0 {
        return Err(Error::domain("cascade_pmf_table", 0.0, "m_start >= 1"));
    }
    let mut log_probabilities = Vec::new();
    let mut truncated = false;
    match limit {
        TableLimit::UpTo(n_max) => {
            if n_max < m_start {
                return Err(Error::Config(format!(
                    "n_max ({n_max}) must be at least m_start ({m_start})"
                )));
            }
            log_probabilities.reserve((n_max - m_start + 1) as usize);
            for n in m_start..=n_max {
                log_probabilities.push(cascade_log_pmf(params, m_start, n)?);
            }
        }
        TableLimit::Auto { tail_tol, hard_cap } => {
            let tail_tol = T::lit(tail_tol);
            let limiting = limiting_log_ratio(params).exp();
            let mut prev = T::neg_infinity();
            let mut n = m_start;
            loop {
                let lp = cascade_log_pmf(params, m_start, n)?;
                log_probabilities.push(lp);
                let ratio = (lp - prev).exp();
                let rho = ratio.max(limiting);
                if lp < prev && rho < T::one() {
                    let tail = lp.exp() * rho / (T::one() - rho);
                    if tail < tail_tol {
                        break;
                    }
                }
                if log_probabilities.len() as u64 >= hard_cap {
                    truncated = true;
                    break;
                }
                prev = lp;
                n += 1;
            }
        }
    }
    Ok(CascadePmf {
        params: *params,
        m_start,
        log_probabilities,
        truncated,
    })
}

/// `lim ln(P(n+1)/P(n))` as `n → ∞`: `(1+r)ln(1+r) − r ln r + r ln(1−q) + ln q`.
fn limiting_log_ratio<T: Real>(params: &DiscretizationParams<T>) -> T {
    let r = params.r_star;
    let q = params.q_star;
    (T::one() + r) * r.ln_1p() - r * r.ln() + r * params.q_complement.ln() + q.ln()
}

/// Cascade moments on the mass scale `z = δ · count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscreteMoments<T> {
    /// `Z_δ(1)`: one lattice individual.
    pub per_individual: Moments<T>,
    /// `Z_δ(m)`: `m = 1/δ` independent individuals, i.e. unit initial mass.
    pub aggregate: Moments<T>,
}

/// Moments from the generating function identity `H(s) = s F(H(s))`:
/// `H'(1) = 1/(1 − F'(1))` and `Var = σ²/(1 − F'(1))³` for offspring mean
/// `F'(1)` and variance `σ²`.
pub fn discrete_moments<T: Real>(params: &DiscretizationParams<T>) -> Result<DiscreteMoments<T>> {
    let atomic = params.atomic();
    let mu = atomic.mean();
    if !(mu < T::one()) {
        return Err(Error::NotSubcritical {
            p: params.p.as_f64(),
        });
    }
    let gap = T::one() - mu;
    let h1 = gap.recip();
    let count_variance = atomic.variance() / (gap * gap * gap);
    let delta = params.delta;
    let per_individual = Moments {
        mean: delta * h1,
        variance: delta * delta * count_variance,
    };
    let m = T::from_u64(params.m).unwrap();
    Ok(DiscreteMoments {
        per_individual,
        aggregate: Moments {
            mean: m * per_individual.mean,
            variance: m * per_individual.variance,
        },
    })
}

/// Gap `ε = 1 − α₂` of the nontrivial root of `E(α^Q) = 1`, `Q = V − 1`.
///
/// Solved in `ε` as `−r* ln(1 + q*ε/(1 − q*)) − ln(1 − ε) = 0` on
/// `[δ·1e-6, 1 − δ·1e-6]`, which keeps full relative precision as the root
/// approaches 1.
pub fn martingale_gap<T: Real>(params: &DiscretizationParams<T>) -> Result<T> {
    let r = params.r_star;
    let q = params.q_star;
    let odds = q / params.q_complement;
    let h = |eps: T| -r * (odds * eps).ln_1p() - (-eps).ln_1p();
    let margin = params.delta * T::lit(1e-6);
    let bracket = Interval::new(margin, T::one() - margin)?;
    let tol = params.delta * T::lit(1e-12);
    solve_bracketed(h, bracket, tol).map_err(|e| match e {
        Error::NoSignChange { .. } => Error::NoNontrivialRoot {
            p: params.p.as_f64(),
            delta: params.delta.as_f64(),
        },
        other => other,
    })
}

/// Nontrivial root `α₂ ∈ (0, 1)` of the martingale equation.
pub fn martingale_alpha<T: Real>(params: &DiscretizationParams<T>) -> Result<T> {
    martingale_gap(params).map(|eps| T::one() - eps)
}

/// Lattice analogue of [`ModelParams::extinction`]: `P{Z_δ < ∞} = α₂^m`,
/// reported with `x_of_p = (1 − α₂)/δ` (which tends to `x(p)` as `δ → 0`).
pub fn discrete_extinction<T: Real>(
    params: &DiscretizationParams<T>,
) -> Result<ExtinctionReport<T>> {
    if params.p <= T::lit(0.5) {
        return Ok(params.model().extinction());
    }
    let eps = martingale_gap(params)?;
    let m = T::from_u64(params.m).unwrap();
    let chi = m * (-eps).ln_1p();
    Ok(ExtinctionReport {
        p: params.p,
        x_of_p: eps / params.delta,
        chi,
        prob_finite: chi.exp(),
    })
}
