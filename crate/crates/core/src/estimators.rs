//! Nonparametric building blocks on length-biased samples.
//!
//! Observations under length bias over-represent large values; every
//! estimator here re-weights by `1/Y_i` to recover quantities of the
//! underlying (unbiased) distribution. The sample type caches the prefix
//! sums of those inverse values because all the estimators are driven by
//! them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;

/// A validated length-biased sample: sorted, strictly positive values with
/// cached prefix sums `S_k = sum_{i<=k} 1/Y_(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LBSample {
    values: Vec<f64>,
    inv_prefix: Vec<f64>,
}

impl LBSample {
    /// Validate and index a raw sample; the input order is irrelevant.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Validation(format!(
                "sample needs at least 2 observations, got {}",
                values.len()
            )));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Validation(format!(
                    "observation {} is not finite: {v}",
                    i + 1
                )));
            }
            if *v <= 0.0 {
                return Err(Error::Validation(format!(
                    "observation {} is not strictly positive: {v}",
                    i + 1
                )));
            }
        }
        values.sort_unstable_by(f64::total_cmp);
        let mut inv_prefix = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        for v in &values {
            acc += 1.0 / v;
            inv_prefix.push(acc);
        }
        Ok(LBSample { values, inv_prefix })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Order statistics `Y_(1) <= ... <= Y_(n)`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Prefix sums `S_k` of the inverse order statistics.
    pub fn inv_prefix(&self) -> &[f64] {
        &self.inv_prefix
    }

    /// `S_n = sum 1/Y_i`.
    pub fn inv_sum(&self) -> f64 {
        *self.inv_prefix.last().unwrap()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

/// Bandwidth choice for the kernel estimators.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    /// Plug-in rule of thumb adapted to length-biased weights.
    #[default]
    RuleOfThumb,
    /// A fixed bandwidth, must be positive.
    Explicit(f64),
}

/// Configuration shared by the entropy estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    pub kernel: KernelSpec,
    pub bandwidth: Bandwidth,
    /// Number of nodes of the quantile-space integration grid.
    pub grid_points: usize,
    /// Trim `delta`: integrals run over `[delta, 1 - delta]`.
    pub trim: f64,
    /// Floor applied inside logarithms.
    pub log_floor: f64,
    /// Number of nodes of the x-space grid used by the integral estimators.
    pub x_grid_points: usize,
    /// Use the unweighted kernel sum for the second integral estimator's
    /// density (comparison only; the weighted form integrates to one).
    pub eq14_literal: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            kernel: KernelSpec::Epanechnikov,
            bandwidth: Bandwidth::RuleOfThumb,
            grid_points: 501,
            trim: 0.01,
            log_floor: 1e-12,
            x_grid_points: 1001,
            eq14_literal: false,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.trim > 0.0 && self.trim < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "trim must lie in (0, 0.5), got {}",
                self.trim
            )));
        }
        if self.grid_points < 11 || self.x_grid_points < 11 {
            return Err(Error::InvalidParameter(
                "integration grids need at least 11 nodes".into(),
            ));
        }
        if !(self.log_floor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "log floor must be positive, got {}",
                self.log_floor
            )));
        }
        if let Bandwidth::Explicit(h) = self.bandwidth {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "explicit bandwidth must be positive, got {h}"
                )));
            }
        }
        Ok(())
    }

    /// The bandwidth actually used for a given sample.
    pub fn resolve_bandwidth(&self, sample: &LBSample) -> Result<f64> {
        match self.bandwidth {
            Bandwidth::Explicit(h) => Ok(h),
            Bandwidth::RuleOfThumb => rot_bandwidth(sample, self.kernel),
        }
    }
}

/// Cox's harmonic-mean estimator `mu_hat = n / sum(1/Y_i)`, consistent for
/// the underlying mean under length bias.
pub fn cox_mean(sample: &LBSample) -> f64 {
    sample.n() as f64 / sample.inv_sum()
}

/// Indices whose observations lie within `[x - h, x + h]`.
fn window(values: &[f64], x: f64, h: f64) -> std::ops::Range<usize> {
    let lo = values.partition_point(|&y| y < x - h);
    let hi = values.partition_point(|&y| y <= x + h);
    lo..hi
}

/// Kernel density estimate of the underlying density from length-biased
/// data, weighting each observation by `1/Y_i`:
/// `f_n(x) = mu_hat / (n h) * sum 1/Y_i K((x - Y_i) / h)`.
pub fn jones_density(sample: &LBSample, h: f64, kernel: KernelSpec, x: f64) -> f64 {
    debug_assert!(h > 0.0);
    let values = sample.values();
    let mut sum = 0.0;
    for i in window(values, x, h) {
        sum += kernel.eval((x - values[i]) / h) / values[i];
    }
    cox_mean(sample) / (sample.n() as f64 * h) * sum
}

/// Ratio-form density estimate: a plain kernel sum divided by `x sum(1/Y_i)`.
pub fn bhatta_density(sample: &LBSample, h: f64, kernel: KernelSpec, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!(
            "ratio-form density needs x > 0, got {x}"
        )));
    }
    let values = sample.values();
    let mut sum = 0.0;
    for i in window(values, x, h) {
        sum += kernel.eval((x - values[i]) / h);
    }
    Ok(sum / (h * x * sample.inv_sum()))
}

/// The literal unweighted variant of the second comparison density,
/// `[1/h sum K((x - Y_i)/h)] / sum(1/Y_i)`. It does not integrate to one and
/// is kept only for side-by-side comparison.
pub fn eq14_density(sample: &LBSample, h: f64, kernel: KernelSpec, x: f64) -> f64 {
    let values = sample.values();
    let mut sum = 0.0;
    for i in window(values, x, h) {
        sum += kernel.eval((x - values[i]) / h);
    }
    sum / (h * sample.inv_sum())
}

/// Empirical quantile under length bias: `Q_n(u) = Y_(k)` where `k` is the
/// largest index with `S_k <= u S_n`, and 1 when no such index exists.
pub fn sen_quantile(sample: &LBSample, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Domain(format!(
            "quantile level {u} outside [0, 1]"
        )));
    }
    let target = u * sample.inv_sum();
    let k = sample.inv_prefix().partition_point(|&s| s <= target);
    Ok(sample.values()[k.saturating_sub(1)])
}

/// Jump locations `T_i = S_i / S_n`, `i = 1..n-1`, of the empirical quantile
/// step function. Strictly increasing, all inside `(0, 1)`.
pub fn jump_points(sample: &LBSample) -> Vec<f64> {
    let sn = sample.inv_sum();
    sample.inv_prefix()[..sample.n() - 1]
        .iter()
        .map(|s| s / sn)
        .collect()
}

/// First quantile-density estimator: `q_1n(u) = 1 / f_n(Q_n(u))`.
///
/// Always finite: the summand of `f_n` at `Q_n(u)`'s own location contributes
/// at least `mu_hat K(0) / (n h Y_(n))`.
pub fn q1n(sample: &LBSample, h: f64, kernel: KernelSpec, u: f64) -> Result<f64> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::Domain(format!("level {u} outside (0, 1]")));
    }
    let qn = sen_quantile(sample, u)?;
    Ok(1.0 / jones_density(sample, h, kernel, qn))
}

/// Second quantile-density estimator: kernel-weighted sum of sample spacings
/// at the jump locations. Can be exactly zero when no jump lies within `h`
/// of `u`.
pub fn q2n(sample: &LBSample, h: f64, kernel: KernelSpec, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("level {u} outside (0, 1)")));
    }
    let sn = sample.inv_sum();
    let prefix = &sample.inv_prefix()[..sample.n() - 1];
    let values = sample.values();
    // T_i within [u - h, u + h] <=> S_i within [(u - h) S_n, (u + h) S_n].
    let lo = prefix.partition_point(|&s| s < (u - h) * sn);
    let hi = prefix.partition_point(|&s| s <= (u + h) * sn);
    let mut sum = 0.0;
    for i in lo..hi {
        let t = prefix[i] / sn;
        sum += kernel.eval((t - u) / h) * (values[i + 1] - values[i]);
    }
    Ok(sum / h)
}

/// Rule-of-thumb bandwidth: the AMISE-optimal rate for the weighted kernel
/// density estimator with a normal reference for the unknown roughness of
/// `f''`. Moments of the underlying distribution are estimated with the
/// length-bias identity `E_f(X^k) = mu_hat * mean(Y_i^(k-1))`.
pub fn rot_bandwidth(sample: &LBSample, kernel: KernelSpec) -> Result<f64> {
    let n = sample.n() as f64;
    let mu = cox_mean(sample);
    let mean_inv_sq = sample.values().iter().map(|y| 1.0 / (y * y)).sum::<f64>() / n;
    let mean_y = sample.values().iter().sum::<f64>() / n;
    let m_neg1 = mu * mean_inv_sq;
    let var = mu * mean_y - mu * mu;
    if !(var > 0.0) {
        return Err(Error::Numerical(format!(
            "degenerate sample: estimated variance {var} is not positive"
        )));
    }
    let sigma = var.sqrt();
    let (rk, mu2) = kernel.constants();
    let roughness = 3.0 / (8.0 * std::f64::consts::PI.sqrt() * sigma.powi(5));
    let h = (rk * mu * m_neg1 / (mu2 * mu2 * roughness)).powf(0.2) * n.powf(-0.2);
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Numerical(format!("bandwidth rule produced {h}")));
    }
    Ok(h)
}
