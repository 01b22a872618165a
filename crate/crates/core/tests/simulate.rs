use cascade_core::continuum::ModelParams;
use cascade_core::discrete::{nb_log_pmf, DiscretizationParams};
use cascade_core::simulate::{
    gamma_sample, nb_sample, run_campaign, run_campaign_with_samples, run_continuous_trial,
    RngStream, SimConfig, SimMode,
};

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

fn gamma_draws(shape: f64, scale: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut s = RngStream::new(seed, 0);
    (0..n)
        .map(|_| gamma_sample(&mut s, shape, scale).unwrap())
        .collect()
}

/// Upper 99.9% point of χ²(k), Wilson–Hilferty.
fn chi_square_999(k: f64) -> f64 {
    let z = 3.090_232_306_167_813;
    let a = 2.0 / (9.0 * k);
    k * (1.0 - a + z * a.sqrt()).powi(3)
}

#[test]
fn exponential_mean() {
    let (mean, _) = mean_var(&gamma_draws(1.0, 1.0, 1_000_000, 1));
    assert!((mean - 1.0).abs() < 5e-3, "{mean}");
}

#[test]
fn gamma_two_mean_and_variance() {
    let xs = gamma_draws(2.0, 0.4, 1_000_000, 2);
    let n = xs.len() as f64;
    let (mean, var) = mean_var(&xs);
    // Var of the sample variance needs the 4th central moment: (3k² + 6k)θ⁴ for Γ(k, θ)
    let mu4 = (3.0 * 4.0 + 12.0) * 0.4_f64.powi(4);
    assert!((mean - 0.8).abs() < 4.0 * (0.32 / n).sqrt(), "{mean}");
    assert!(
        (var - 0.32).abs() < 4.0 * ((mu4 - 0.32 * 0.32) / n).sqrt(),
        "{var}"
    );
}

#[test]
fn small_shape_mean() {
    let xs = gamma_draws(0.01, 1.0, 1_000_000, 3);
    let (mean, var) = mean_var(&xs);
    assert!(
        (mean - 0.01).abs() < 4.0 * (var / xs.len() as f64).sqrt(),
        "{mean}"
    );
}

#[test]
fn geometric_counts() {
    let mut s = RngStream::new(4, 0);
    let n = 1_000_000;
    let zeros = (0..n)
        .filter(|_| nb_sample(&mut s, 1.0, 0.5).unwrap() == 0)
        .count();
    let f = zeros as f64 / n as f64;
    assert!((f - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt(), "{f}");
}

#[test]
fn atomic_offspring_mean_and_pmf() {
    let d = DiscretizationParams::new(0.3, 100).unwrap();
    let (r, q) = (d.r_star(), d.q_star());
    let mut s = RngStream::new(5, 0);
    let n = 1_000_000usize;
    let draws: Vec<u64> = (0..n).map(|_| nb_sample(&mut s, r, q).unwrap()).collect();

    let xs: Vec<f64> = draws.iter().map(|&k| k as f64).collect();
    let (mean, var) = mean_var(&xs);
    assert!((mean - 0.6).abs() < 4.0 * (var / n as f64).sqrt(), "{mean}");

    // χ² over n ≤ 30, pooling sparse cells and the tail
    let mut observed = vec![0u64; 32];
    for &k in &draws {
        observed[(k as usize).min(31)] += 1;
    }
    let probs: Vec<f64> = (0..31)
        .map(|k| nb_log_pmf(k, r, q).unwrap().exp())
        .collect();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for k in 0..31 {
        o_acc += observed[k] as f64;
        e_acc += probs[k] * n as f64;
        if e_acc >= 5.0 {
            cells.push((o_acc, e_acc));
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    let tail_e = (1.0 - probs.iter().sum::<f64>()) * n as f64 + e_acc;
    let tail_o = observed[31] as f64 + o_acc;
    match cells.last_mut() {
        Some(last) if tail_e < 5.0 => {
            last.0 += tail_o;
            last.1 += tail_e;
        }
        _ => cells.push((tail_o, tail_e)),
    }
    let stat: f64 = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = (cells.len() - 1) as f64;
    assert!(cells.len() > 5);
    assert!(stat < chi_square_999(dof), "chi2 = {stat}, dof = {dof}");
}

#[test]
fn continuous_subcritical_moments() {
    let c = SimConfig::new(SimMode::Continuous, 0.3, 100_000, 6);
    let s = run_campaign(&c).unwrap();
    assert_eq!(s.n_censored(), 0);
    let exact = ModelParams::new(0.3).unwrap().moments().unwrap();
    assert!(
        (s.mean() - exact.mean).abs() < 4.0 * s.mean_se(),
        "{}",
        s.mean()
    );
    // SE of the sample variance from the fourth moment is not tracked; 5% is ~4σ here
    assert!(
        (s.variance() - exact.variance).abs() < 0.05 * exact.variance,
        "{}",
        s.variance()
    );
}

#[test]
fn discrete_subcritical_mean() {
    let c = SimConfig::new(SimMode::Discrete, 0.25, 100_000, 7).with_m(20);
    let s = run_campaign(&c).unwrap();
    assert_eq!(s.n_censored(), 0);
    assert!((s.mean() - 2.0).abs() < 3.0 * s.mean_se(), "{}", s.mean());
}

#[test]
fn continuous_extinction_fractions() {
    for (i, p) in [0.55, 0.6, 0.75].into_iter().enumerate() {
        let c = SimConfig::new(SimMode::Continuous, p, 100_000, 100 + i as u64);
        let s = run_campaign(&c).unwrap();
        let target = ModelParams::new(p).unwrap().extinction().prob_finite;
        let gap = (s.finite_fraction() - target).abs();
        assert!(
            gap < 4.0 * s.finite_fraction_se(),
            "p = {p}: {} vs {target}",
            s.finite_fraction()
        );
    }
}

#[test]
fn huge_epsilon_stops_after_one_generation() {
    let mut s = RngStream::new(8, 0);
    let t = run_continuous_trial(&mut s, 0.3, 1e6, 1e300);
    assert!(!t.censored);
}

#[test]
fn worker_count_does_not_change_the_result() {
    for mode in [SimMode::Continuous, SimMode::Discrete, SimMode::Walk] {
        let base = SimConfig::new(mode, 0.4, 20_000, 9).with_m(10);
        let one = run_campaign(&base).unwrap();
        let eight = run_campaign(&base.clone().with_workers(8)).unwrap();
        assert_eq!(one.tally, eight.tally);
        let a = serde_json::to_string(&one.tally).unwrap();
        let b = serde_json::to_string(&eight.tally).unwrap();
        assert_eq!(a, b);
    }
    let c = SimConfig::new(SimMode::Continuous, 0.3, 10_000, 1);
    let (_, s1) = run_campaign_with_samples(&c, true).unwrap();
    let (_, s4) = run_campaign_with_samples(&c.clone().with_workers(4), true).unwrap();
    assert_eq!(s1, s4);
}

#[test]
fn merge_is_commutative_and_associative() {
    let summaries: Vec<_> = [3_000u64, 5_000, 7_001]
        .into_iter()
        .map(|n| run_campaign(&SimConfig::new(SimMode::Continuous, 0.3, n, 11)).unwrap())
        .collect();
    let (a, b, c) = (&summaries[0], &summaries[1], &summaries[2]);
    assert_eq!(a.merge(b).unwrap(), b.merge(a).unwrap());
    let left = a.merge(b).unwrap().merge(c).unwrap();
    let right = a.merge(&b.merge(c).unwrap()).unwrap();
    assert_eq!(left, right);
    assert_eq!(
        serde_json::to_string(&left).unwrap(),
        serde_json::to_string(&right).unwrap()
    );
    assert_eq!(left.trials(), 15_001);
    assert_eq!(left.config.trials, 15_001);

    let other = run_campaign(&SimConfig::new(SimMode::Continuous, 0.35, 100, 11)).unwrap();
    assert!(a.merge(&other).is_err());
}
