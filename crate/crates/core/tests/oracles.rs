//! Cross-checks of closed forms against independent numerical routes:
//! finite differences for the quantile densities, quadrature for the
//! Govindarajulu entropy, and statistical consistency of the estimators on
//! synthetic length-biased data.

use lbent::entropy::{h_integral, xi1, xi2, HVariant};
use lbent::estimators::{q2n, rot_bandwidth, EstimatorConfig, LBSample};
use lbent::kernels::KernelSpec;
use lbent::models::{LbSampler, QuantileModel};
use lbent::numeric::adaptive_gl;
use lbent::simulation::replicate_rng;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn paper_models() -> Vec<QuantileModel> {
    vec![
        QuantileModel::govindarajulu(0.0, 1.0, 0.25).unwrap(),
        QuantileModel::govindarajulu(0.0, 0.75, 0.25).unwrap(),
        QuantileModel::govindarajulu(0.0, 1.0, 1.0).unwrap(),
        QuantileModel::gld(2.0, 1.0, 2.0, 6.0).unwrap(),
        QuantileModel::gld(2.0, 1.0, 3.0, 5.0).unwrap(),
        QuantileModel::gld(3.0, 2.0, 1.0, 5.0).unwrap(),
        QuantileModel::power_pareto(1.5827, 0.6368, 0.1016).unwrap(),
        QuantileModel::uniform(0.0, 1.0).unwrap(),
    ]
}

#[test]
fn quantile_density_matches_finite_differences() {
    let eps = 1e-6;
    for model in paper_models() {
        for i in 1..=9 {
            let u = i as f64 / 10.0;
            let numeric = (model.quantile(u + eps).unwrap() - model.quantile(u - eps).unwrap())
                / (2.0 * eps);
            let exact = model.quantile_density(u).unwrap();
            assert!(
                (numeric - exact).abs() <= 1e-6 * exact.abs().max(1e-12),
                "{model} at u = {u}: fd {numeric} vs q {exact}"
            );
        }
    }
}

#[test]
fn govindarajulu_entropy_closed_form_vs_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..50 {
        let sigma = 0.25 + rng.gen::<f64>() * 3.0;
        let beta = 0.1 + rng.gen::<f64>() * 3.0;
        let model = QuantileModel::govindarajulu(0.0, sigma, beta).unwrap();
        let closed = model.true_entropy().unwrap();
        let quad = adaptive_gl(
            |u| model.quantile_density(u).unwrap().ln(),
            0.0,
            1.0,
            1e-12,
        )
        .unwrap();
        assert!(
            (closed - quad).abs() < 1e-8,
            "sigma={sigma} beta={beta}: {closed} vs {quad}"
        );
    }
}

#[test]
fn q2n_pointwise_error_shrinks_with_n() {
    let model = QuantileModel::govindarajulu(0.0, 1.0, 1.0).unwrap();
    let sampler = LbSampler::new(model).unwrap();
    let truth = model.quantile_density(0.5).unwrap();
    let mean_abs_err = |n: usize| -> f64 {
        let mut total = 0.0;
        for seed in 0..100 {
            let mut rng = replicate_rng(92, 0, n, seed);
            let s = sampler.sample(n, &mut rng).unwrap();
            let h = rot_bandwidth(&s, KernelSpec::Epanechnikov).unwrap();
            total += (q2n(&s, h, KernelSpec::Epanechnikov, 0.5).unwrap() - truth).abs();
        }
        total / 100.0
    };
    let small = mean_abs_err(50);
    let large = mean_abs_err(400);
    assert!(
        large < small,
        "mean |q2n - q| did not shrink: n=50 gives {small}, n=400 gives {large}"
    );
}

#[test]
fn xi2_concentrates_on_true_entropy() {
    let model = QuantileModel::govindarajulu(0.0, 1.0, 1.0).unwrap();
    let sampler = LbSampler::new(model).unwrap();
    let cfg = EstimatorConfig::default();
    let mut sum = 0.0;
    for seed in 0..100 {
        let mut rng = replicate_rng(7, 0, 400, seed);
        let s = sampler.sample(400, &mut rng).unwrap();
        sum += xi2(&s, &cfg).unwrap().value;
    }
    let mean = sum / 100.0;
    let truth = 2f64.ln() - 1.0;
    assert!((mean - truth).abs() < 0.05, "mean xi2 = {mean} vs {truth}");
}

#[test]
fn uniform_base_entropies_near_zero() {
    // The underlying law is Uniform(0,1): differential entropy zero.
    let sampler = LbSampler::new(QuantileModel::uniform(0.0, 1.0).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let s = sampler.sample(5000, &mut rng).unwrap();
    let cfg = EstimatorConfig::default();
    let e1 = xi1(&s, &cfg).unwrap().value;
    assert!(e1.abs() < 0.1, "xi1 = {e1}");
    let h1 = h_integral(&s, &cfg, HVariant::H1).unwrap().value;
    let h2 = h_integral(&s, &cfg, HVariant::H2).unwrap().value;
    assert!(h1.abs() < 0.1, "h1 = {h1}");
    assert!(h2.abs() < 0.1, "h2 = {h2}");
}

#[test]
fn trim_sensitivity_is_bounded_and_reported() {
    let sampler = LbSampler::new(QuantileModel::govindarajulu(0.0, 1.0, 0.25).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s = sampler.sample(200, &mut rng).unwrap();
    let at = |trim: f64| {
        let cfg = EstimatorConfig {
            trim,
            ..Default::default()
        };
        (xi1(&s, &cfg).unwrap().value, xi2(&s, &cfg).unwrap().value)
    };
    let (a1, a2) = at(0.005);
    let (b1, b2) = at(0.02);
    assert!((a1 - b1).abs() < 1.0, "xi1 trim swing {a1} vs {b1}");
    assert!((a2 - b2).abs() < 1.0, "xi2 trim swing {a2} vs {b2}");
}

#[test]
fn lbsample_prefix_sums_strictly_increase() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let n = 2 + rng.gen_range(0..100);
        let s = LBSample::new((0..n).map(|_| 0.05 + rng.gen::<f64>() * 4.0).collect()).unwrap();
        assert!(s.inv_prefix().windows(2).all(|w| w[1] > w[0]));
        assert!((s.inv_prefix().last().unwrap() - s.inv_sum()).abs() == 0.0);
    }
}
