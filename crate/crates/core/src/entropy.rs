//! Plug-in estimators of the quantile-based Shannon entropy from
//! length-biased samples, plus the two integral comparison estimators.
//!
//! Both quantile-space estimators integrate `log q_hat(u)` over the trimmed
//! range `[delta, 1 - delta]` by composite trapezoid. The integrand is
//! floored before taking logs because the spacing-based estimator can be
//! exactly zero between jump points when the bandwidth is small; the
//! fraction of floored nodes is reported so a too-small bandwidth is visible
//! rather than silently absorbed.

use serde::Serialize;

use crate::error::Result;
use crate::estimators::{
    bhatta_density, eq14_density, jones_density, q1n, q2n, EstimatorConfig, LBSample,
};
use crate::numeric::trapezoid_uniform;

/// An entropy estimate in nats, with the telemetry needed to judge it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyEstimate {
    pub value: f64,
    /// Fraction of grid nodes where the integrand hit the log floor.
    pub floored_fraction: f64,
    /// Trim of the integration range (zero for the x-space integrals).
    pub trim: f64,
    /// Nodes of the integration grid.
    pub grid_points: usize,
    /// Bandwidth actually used.
    pub bandwidth: f64,
}

impl EntropyEstimate {
    /// More than 5% floored nodes means the bandwidth is too small for the
    /// sample size and the estimate is degraded.
    pub fn bandwidth_warning(&self) -> bool {
        self.floored_fraction > 0.05
    }
}

/// Composite trapezoid of `log(max(v_j, floor))` for values on a uniform
/// grid spanning `[delta, 1 - delta]`. Returns the integral and the fraction
/// of nodes that were floored.
pub fn log_integral(values: &[f64], delta: f64, floor: f64) -> (f64, f64) {
    let m = values.len();
    debug_assert!(m >= 2 && floor > 0.0);
    let mut logs = Vec::with_capacity(m);
    let mut floored = 0usize;
    for &v in values {
        if v < floor {
            floored += 1;
            logs.push(floor.ln());
        } else {
            logs.push(v.ln());
        }
    }
    let dx = (1.0 - 2.0 * delta) / (m - 1) as f64;
    (trapezoid_uniform(&logs, dx), floored as f64 / m as f64)
}

fn trimmed_grid(cfg: &EstimatorConfig) -> impl Iterator<Item = f64> + '_ {
    let m = cfg.grid_points;
    let span = 1.0 - 2.0 * cfg.trim;
    (0..m).map(move |j| cfg.trim + span * j as f64 / (m - 1) as f64)
}

/// First plug-in estimator: integral of `log(1 / f_n(Q_n(u)))` over the
/// trimmed grid.
pub fn xi1(sample: &LBSample, cfg: &EstimatorConfig) -> Result<EntropyEstimate> {
    cfg.validate()?;
    let h = cfg.resolve_bandwidth(sample)?;
    let values: Vec<f64> = trimmed_grid(cfg)
        .map(|u| q1n(sample, h, cfg.kernel, u))
        .collect::<Result<_>>()?;
    let (value, floored_fraction) = log_integral(&values, cfg.trim, cfg.log_floor);
    Ok(EntropyEstimate {
        value,
        floored_fraction,
        trim: cfg.trim,
        grid_points: cfg.grid_points,
        bandwidth: h,
    })
}

/// Second plug-in estimator: integral of `log q_2n(u)` over the trimmed
/// grid, with the floor guard active wherever the spacing sum vanishes.
pub fn xi2(sample: &LBSample, cfg: &EstimatorConfig) -> Result<EntropyEstimate> {
    cfg.validate()?;
    let h = cfg.resolve_bandwidth(sample)?;
    let values: Vec<f64> = trimmed_grid(cfg)
        .map(|u| q2n(sample, h, cfg.kernel, u))
        .collect::<Result<_>>()?;
    let (value, floored_fraction) = log_integral(&values, cfg.trim, cfg.log_floor);
    Ok(EntropyEstimate {
        value,
        floored_fraction,
        trim: cfg.trim,
        grid_points: cfg.grid_points,
        bandwidth: h,
    })
}

/// Which density feeds the x-space integral estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HVariant {
    /// Ratio-form density (plain kernel sum over `x sum 1/Y_i`).
    H1,
    /// Weighted density (integrates to exactly one).
    H2,
}

/// Integral entropy estimator `-int f_hat(x) log f_hat(x) dx` on a uniform
/// x-grid. Nodes where the density is at or below the floor contribute zero
/// (the `t log t -> 0` limit).
///
/// Both densities target a law supported on positive reals. The weighted
/// variant integrates over the kernel support clamped at the support edge,
/// `[max(Y_(1) - h, 0), Y_(n) + h]`. The ratio-form variant starts at the
/// smallest observation: below it the `1/x` weight turns kernel leakage into
/// a divergent artifact whenever the bandwidth exceeds `Y_(1)`.
pub fn h_integral(
    sample: &LBSample,
    cfg: &EstimatorConfig,
    variant: HVariant,
) -> Result<EntropyEstimate> {
    cfg.validate()?;
    let h = cfg.resolve_bandwidth(sample)?;
    let lo = match variant {
        HVariant::H1 => sample.min(),
        HVariant::H2 => (sample.min() - h).max(0.0),
    };
    let hi = sample.max() + h;
    let m = cfg.x_grid_points;
    let dx = (hi - lo) / (m - 1) as f64;
    let mut integrand = Vec::with_capacity(m);
    let mut floored = 0usize;
    for j in 0..m {
        let x = lo + dx * j as f64;
        let f = match variant {
            HVariant::H1 => bhatta_density(sample, h, cfg.kernel, x.max(f64::MIN_POSITIVE))?,
            HVariant::H2 => {
                if cfg.eq14_literal {
                    eq14_density(sample, h, cfg.kernel, x)
                } else {
                    jones_density(sample, h, cfg.kernel, x)
                }
            }
        };
        if f <= cfg.log_floor {
            floored += 1;
            integrand.push(0.0);
        } else {
            integrand.push(-f * f.ln());
        }
    }
    Ok(EntropyEstimate {
        value: trapezoid_uniform(&integrand, dx),
        floored_fraction: floored as f64 / m as f64,
        trim: 0.0,
        grid_points: m,
        bandwidth: h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::Bandwidth;
    use crate::kernels::KernelSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn log_integral_reference_values() {
        let ones = vec![1.0; 101];
        let (v, frac) = log_integral(&ones, 0.0, 1e-12);
        assert_eq!(v, 0.0);
        assert_eq!(frac, 0.0);

        let es = vec![std::f64::consts::E; 101];
        let (v, frac) = log_integral(&es, 0.1, 1e-12);
        assert!((v - 0.8).abs() < 1e-12);
        assert_eq!(frac, 0.0);

        let mut vals = vec![std::f64::consts::E; 100];
        vals[0] = 0.0;
        let (v, frac) = log_integral(&vals, 0.0, 1e-12);
        assert!(v.is_finite());
        assert!((frac - 0.01).abs() < 1e-15);
    }

    fn random_sample(n: usize, seed: u64) -> LBSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        LBSample::new((0..n).map(|_| 0.2 + rng.gen::<f64>() * 3.0).collect()).unwrap()
    }

    #[test]
    fn xi1_scale_shift_identity() {
        let cfg = EstimatorConfig {
            bandwidth: Bandwidth::Explicit(0.4),
            ..Default::default()
        };
        let s = random_sample(150, 5);
        let base = xi1(&s, &cfg).unwrap().value;
        for c in [2.0, 0.5, 3.0] {
            let scaled =
                LBSample::new(s.values().iter().map(|v| c * v).collect()).unwrap();
            let cfg_scaled = EstimatorConfig {
                bandwidth: Bandwidth::Explicit(c * 0.4),
                ..cfg
            };
            let got = xi1(&scaled, &cfg_scaled).unwrap().value;
            let want = base + (1.0 - 2.0 * cfg.trim) * c.ln();
            assert!((got - want).abs() < 1e-10, "c = {c}: {got} vs {want}");
        }
    }

    #[test]
    fn xi2_scale_shift_identity() {
        let cfg = EstimatorConfig {
            bandwidth: Bandwidth::Explicit(0.15),
            ..Default::default()
        };
        let s = random_sample(150, 6);
        let base = xi2(&s, &cfg).unwrap();
        assert_eq!(base.floored_fraction, 0.0, "floor must not engage");
        for c in [2.0, 0.5, 3.0] {
            let scaled =
                LBSample::new(s.values().iter().map(|v| c * v).collect()).unwrap();
            let got = xi2(&scaled, &cfg).unwrap();
            assert_eq!(got.floored_fraction, 0.0);
            let want = base.value + (1.0 - 2.0 * cfg.trim) * c.ln();
            assert!((got.value - want).abs() < 1e-10, "c = {c}");
        }
    }

    #[test]
    fn xi_estimators_ignore_input_order() {
        let cfg = EstimatorConfig::default();
        let s = random_sample(80, 9);
        let mut shuffled: Vec<f64> = s.values().to_vec();
        shuffled.reverse();
        shuffled.swap(3, 40);
        let t = LBSample::new(shuffled).unwrap();
        assert_eq!(xi1(&s, &cfg).unwrap(), xi1(&t, &cfg).unwrap());
        assert_eq!(xi2(&s, &cfg).unwrap(), xi2(&t, &cfg).unwrap());
    }

    #[test]
    fn xi2_floor_telemetry() {
        // Tiny bandwidth leaves most grid nodes without a jump in range.
        let cfg = EstimatorConfig {
            bandwidth: Bandwidth::Explicit(1e-4),
            ..Default::default()
        };
        let s = random_sample(20, 12);
        let e = xi2(&s, &cfg).unwrap();
        assert!(e.floored_fraction > 0.5);
        assert!(e.bandwidth_warning());
        assert!(e.value.is_finite());
    }

    #[test]
    fn grid_refinement_is_stable() {
        let s = random_sample(200, 21);
        for (a, b) in [(501usize, 1001usize), (251, 501)] {
            let ca = EstimatorConfig {
                grid_points: a,
                ..Default::default()
            };
            let cb = EstimatorConfig {
                grid_points: b,
                ..Default::default()
            };
            assert!((xi1(&s, &ca).unwrap().value - xi1(&s, &cb).unwrap().value).abs() < 1e-3);
            assert!((xi2(&s, &ca).unwrap().value - xi2(&s, &cb).unwrap().value).abs() < 1e-3);
        }
    }

    #[test]
    fn h_integral_is_finite_and_reports_bandwidth() {
        let s = random_sample(100, 33);
        let cfg = EstimatorConfig::default();
        for v in [HVariant::H1, HVariant::H2] {
            let e = h_integral(&s, &cfg, v).unwrap();
            assert!(e.value.is_finite());
            assert!(e.bandwidth > 0.0);
            assert_eq!(e.grid_points, cfg.x_grid_points);
        }
    }

    #[test]
    fn h2_literal_variant_differs() {
        let s = random_sample(100, 34);
        let cfg = EstimatorConfig::default();
        let weighted = h_integral(&s, &cfg, HVariant::H2).unwrap().value;
        let literal = h_integral(
            &s,
            &EstimatorConfig {
                eq14_literal: true,
                ..cfg
            },
            HVariant::H2,
        )
        .unwrap()
        .value;
        assert!((weighted - literal).abs() > 1e-6);
    }

    #[test]
    fn jones_density_unit_mass() {
        // int f_n = mu_hat * mean(1/Y_i) * int K = 1 exactly; the trapezoid
        // over the kernel support recovers it to quadrature accuracy.
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for trial in 0..20 {
            let n = 10 + (trial % 5) * 17;
            let s = LBSample::new(
                (0..n).map(|_| 0.3 + rng.gen::<f64>() * 2.0).collect(),
            )
            .unwrap();
            let h = 0.2 + rng.gen::<f64>() * 0.3;
            let lo = s.min() - h;
            let hi = s.max() + h;
            let m = 20001;
            let dx = (hi - lo) / (m - 1) as f64;
            let vals: Vec<f64> = (0..m)
                .map(|j| jones_density(&s, h, KernelSpec::Epanechnikov, lo + dx * j as f64))
                .collect();
            let mass = trapezoid_uniform(&vals, dx);
            assert!((mass - 1.0).abs() < 1e-6, "mass = {mass}");
        }
    }
}
