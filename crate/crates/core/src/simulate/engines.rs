use serde::Serialize;

use super::sampling::{gamma_unchecked, nb_unchecked};
use super::RngStream;
use crate::discrete::DiscretizationParams;

/// Outcome of one continuous-state trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Trial {
    /// Accumulated cascade size (at the point of censoring if censored).
    pub size: f64,
    pub censored: bool,
}

/// Outcome of one lattice trial: total individual count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LatticeTrial {
    pub steps: u64,
    pub censored: bool,
}

/// Largest step count that is still reported as finite for a size cap.
pub fn step_cap(params: &DiscretizationParams<f64>, cap: f64) -> u64 {
    (cap * params.m() as f64).floor() as u64
}

/// Continuous Gamma branching: `X₀ = 1`, `Xₙ ~ Γ(2 Xₙ₋₁, p)`.
///
/// Finite once a generation drops to `epsilon` or below; for `p < 1/2`
/// the expected remainder `Xₙ · 2p/(1 − 2p)` is added. Censored as soon as
/// the running total exceeds `cap`.
pub fn run_continuous_trial(stream: &mut RngStream, p: f64, cap: f64, epsilon: f64) -> Trial {
    let mut generation = 1.0_f64;
    let mut total = 1.0_f64;
    let tail_factor = if 2.0 * p < 1.0 {
        2.0 * p / (1.0 - 2.0 * p)
    } else {
        0.0
    };
    loop {
        generation = gamma_unchecked(stream, 2.0 * generation, p);
        total += generation;
        if total > cap {
            return Trial {
                size: total,
                censored: true,
            };
        }
        if generation <= epsilon {
            return Trial {
                size: total + generation * tail_factor,
                censored: false,
            };
        }
    }
}

/// Lattice branching, generation by generation: `k` individuals have
/// `NB(k r*, q*)` children in total. Starts from `m = 1/δ` individuals.
pub fn run_discrete_trial(
    stream: &mut RngStream,
    params: &DiscretizationParams<f64>,
    cap: f64,
) -> LatticeTrial {
    let limit = step_cap(params, cap);
    let r = params.r_star();
    let odds = params.q_star() / (params.delta() / params.p());
    let mut alive = params.m();
    let mut total = alive;
    while alive > 0 {
        let children = nb_unchecked(stream, alive as f64 * r, odds);
        total = total.saturating_add(children);
        if total > limit {
            return LatticeTrial {
                steps: total,
                censored: true,
            };
        }
        alive = children;
    }
    LatticeTrial {
        steps: total,
        censored: false,
    }
}

/// First passage to the origin of the walk `S₀ = m`, `Sₙ₊₁ = Sₙ + V − 1`
/// with `V ~ NB(r*, q*)`, one step per draw.
///
/// Since the walk moves down at most one unit per step, the passage time
/// is at least `n + Sₙ`; the trial is censored as soon as that exceeds the
/// step cap, which agrees with the branching engine's censoring.
pub fn run_walk_trial(
    stream: &mut RngStream,
    params: &DiscretizationParams<f64>,
    cap: f64,
) -> LatticeTrial {
    let limit = step_cap(params, cap);
    let r = params.r_star();
    let odds = params.q_star() / (params.delta() / params.p());
    let mut position = params.m();
    let mut steps = 0u64;
    loop {
        let v = nb_unchecked(stream, r, odds);
        position = position.saturating_add(v) - 1;
        steps += 1;
        if position == 0 {
            return LatticeTrial {
                steps,
                censored: false,
            };
        }
        if steps.saturating_add(position) > limit {
            return LatticeTrial {
                steps: steps.saturating_add(position),
                censored: true,
            };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuous_trial_is_at_least_one() {
        let mut s = RngStream::new(5, 0);
        for _ in 0..1000 {
            let t = run_continuous_trial(&mut s, 0.3, 1e6, 1e-9);
            assert!(!t.censored);
            assert!(t.size >= 1.0);
        }
    }

    #[test]
    fn tiny_p_cascade_is_close_to_initial_mass() {
        // mean δ·steps = 1/(1 − 2p) = 1.0204… at p = 0.01
        let d = DiscretizationParams::new(0.01, 1000).unwrap();
        let mut s = RngStream::new(9, 0);
        let n = 2000;
        let mean = (0..n)
            .map(|_| run_discrete_trial(&mut s, &d, 1e6).steps as f64 / 1000.0)
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0 / 0.98).abs() < 2e-3, "{mean}");
    }

    #[test]
    fn walk_trial_counts_all_steps() {
        let d = DiscretizationParams::new(0.3, 10).unwrap();
        let mut s = RngStream::new(2, 0);
        for _ in 0..1000 {
            let t = run_walk_trial(&mut s, &d, 1e6);
            assert!(!t.censored);
            assert!(t.steps >= 10);
        }
    }

    #[test]
    fn supercritical_trials_get_censored() {
        let d = DiscretizationParams::new(0.9, 10).unwrap();
        let mut s = RngStream::new(4, 0);
        let censored = (0..200)
            .filter(|_| run_walk_trial(&mut s, &d, 50.0).censored)
            .count();
        assert!(censored > 100);
        let censored = (0..200)
            .filter(|_| run_discrete_trial(&mut s, &d, 50.0).censored)
            .count();
        assert!(censored > 100);
        let censored = (0..200)
            .filter(|_| run_continuous_trial(&mut s, 0.9, 50.0, 1e-9).censored)
            .count();
        assert!(censored > 100);
    }
}
