//! Statistical correctness of the length-biased sampler: distributional
//! (Kolmogorov-Smirnov against the known law) and moment checks.

use lbent::models::{LbSampler, QuantileModel};
use lbent::simulation::replicate_rng;

/// Two-sided KS distance of a sorted sample against a CDF.
fn ks_against<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(((i + 1) as f64 / n - f).abs()).max((i as f64 / n - f).abs());
    }
    d
}

#[test]
fn uniform_base_sampler_passes_ks_against_square_law() {
    // Length-biased Uniform(0,1) has CDF G(y) = y^2 on [0,1]. At the 1%
    // asymptotic level (1.63 / sqrt(n)) at least 95 of 100 seeded runs must
    // pass.
    let sampler = LbSampler::new(QuantileModel::uniform(0.0, 1.0).unwrap()).unwrap();
    let n = 10_000;
    let threshold = 1.63 / (n as f64).sqrt();
    let mut passes = 0;
    for seed in 0..100 {
        let mut rng = replicate_rng(2024, 0, n, seed);
        let s = sampler.sample(n, &mut rng).unwrap();
        if ks_against(s.values(), |y| (y * y).clamp(0.0, 1.0)) < threshold {
            passes += 1;
        }
    }
    assert!(passes >= 95, "only {passes}/100 runs under the KS threshold");
}

#[test]
fn uniform_base_sampler_moments() {
    // E(Y) = int 2y^2 = 2/3 and E(1/Y) = 1/mu = 2 under the square law.
    let sampler = LbSampler::new(QuantileModel::uniform(0.0, 1.0).unwrap()).unwrap();
    let n = 100_000;
    let mut rng = replicate_rng(99, 0, n, 0);
    let s = sampler.sample(n, &mut rng).unwrap();
    let mean = s.values().iter().sum::<f64>() / n as f64;
    let inv_mean = s.inv_sum() / n as f64;
    assert!((mean - 2.0 / 3.0).abs() < 0.01, "mean = {mean}");
    assert!((inv_mean - 2.0).abs() < 0.05, "inverse mean = {inv_mean}");
}

#[test]
fn inverse_moment_recovers_reciprocal_mean_for_paper_models() {
    // (1/n) sum 1/Y_i estimates 1/mu; relative error under 2% at n = 1e5.
    let models = [
        QuantileModel::govindarajulu(0.0, 1.0, 0.25).unwrap(),
        QuantileModel::gld(2.0, 1.0, 3.0, 5.0).unwrap(),
        QuantileModel::power_pareto(1.5827, 0.6368, 0.1016).unwrap(),
    ];
    let n = 100_000;
    for (k, model) in models.iter().enumerate() {
        let sampler = LbSampler::new(*model).unwrap();
        let mut rng = replicate_rng(55, k, n, 0);
        let s = sampler.sample(n, &mut rng).unwrap();
        let inv_mean = s.inv_sum() / n as f64;
        let want = 1.0 / sampler.mean();
        assert!(
            (inv_mean - want).abs() / want < 0.02,
            "{model}: E(1/Y) estimate {inv_mean} vs {want}"
        );
    }
}

#[test]
fn govindarajulu_sampler_matches_length_biased_cdf() {
    // G(Q(v)) = Phi(v): check the empirical CDF against the Phi table at
    // the model's own quantile points.
    let model = QuantileModel::govindarajulu(0.0, 1.0, 1.0).unwrap();
    let sampler = LbSampler::new(model).unwrap();
    let n = 20_000;
    let mut rng = replicate_rng(77, 0, n, 1);
    let s = sampler.sample(n, &mut rng).unwrap();
    let d = ks_against(s.values(), |y| sampler.phi(model.cdf(y)));
    assert!(d < 1.63 / (n as f64).sqrt(), "KS distance {d}");
}
