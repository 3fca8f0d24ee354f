//! Quantile-defined distributions and a length-biased sampler.
//!
//! Every model is specified through its quantile function `Q(u)`; densities
//! in x-space are never needed. Supports are nonnegative so that
//! length-biased observation (density proportional to `x f(x)`) is well
//! defined.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::LBSample;
use crate::numeric::{adaptive_gl, bisect_increasing, Pchip};

/// Number of panels in the tabulated length-biased CDF.
const PHI_PANELS: usize = 4096;
/// Quantile arguments are clamped this far inside (0, 1) when sampling.
const U_EPS: f64 = 1e-12;

/// A distribution defined by its quantile function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuantileModel {
    /// `Q(u) = theta + sigma ((beta+1) u^beta - beta u^(beta+1))`,
    /// a lifetime model with bathtub-shaped hazard, support `[theta, theta+sigma]`.
    Govindarajulu { theta: f64, sigma: f64, beta: f64 },
    /// Generalized lambda: `Q(u) = lambda1 + (u^lambda3 - (1-u)^lambda4) / lambda2`.
    Gld {
        lambda1: f64,
        lambda2: f64,
        lambda3: f64,
        lambda4: f64,
    },
    /// Power-Pareto: `Q(u) = scale * u^shape1 * (1-u)^(-shape2)`.
    PowerPareto { scale: f64, shape1: f64, shape2: f64 },
    /// `Q(u) = lower + (upper - lower) u`.
    Uniform { lower: f64, upper: f64 },
}

impl QuantileModel {
    pub fn govindarajulu(theta: f64, sigma: f64, beta: f64) -> Result<Self> {
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "govindarajulu theta must be >= 0, got {theta}"
            )));
        }
        if !(sigma > 0.0 && sigma.is_finite()) || !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "govindarajulu needs sigma > 0 and beta > 0, got ({sigma}, {beta})"
            )));
        }
        let m = QuantileModel::Govindarajulu { theta, sigma, beta };
        m.validate_shape()?;
        Ok(m)
    }

    pub fn gld(lambda1: f64, lambda2: f64, lambda3: f64, lambda4: f64) -> Result<Self> {
        for (name, v) in [("lambda2", lambda2), ("lambda3", lambda3), ("lambda4", lambda4)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "gld {name} must be > 0, got {v}"
                )));
            }
        }
        if !lambda1.is_finite() {
            return Err(Error::InvalidParameter("gld lambda1 must be finite".into()));
        }
        let m = QuantileModel::Gld {
            lambda1,
            lambda2,
            lambda3,
            lambda4,
        };
        m.validate_shape()?;
        Ok(m)
    }

    pub fn power_pareto(scale: f64, shape1: f64, shape2: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "power_pareto scale must be > 0, got {scale}"
            )));
        }
        if !(shape1 >= 0.0 && shape1.is_finite()) || !(shape2 >= 0.0 && shape2.is_finite()) {
            return Err(Error::InvalidParameter(
                "power_pareto shapes must be nonnegative".into(),
            ));
        }
        if shape1 == 0.0 && shape2 == 0.0 {
            return Err(Error::InvalidParameter(
                "power_pareto shapes must not both be zero".into(),
            ));
        }
        let m = QuantileModel::PowerPareto {
            scale,
            shape1,
            shape2,
        };
        m.validate_shape()?;
        Ok(m)
    }

    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        if !(lower >= 0.0 && lower.is_finite() && upper.is_finite() && upper > lower) {
            return Err(Error::InvalidParameter(format!(
                "uniform needs 0 <= lower < upper, got ({lower}, {upper})"
            )));
        }
        Ok(QuantileModel::Uniform { lower, upper })
    }

    /// Reject parameters for which Q is non-monotone or dips below zero on a
    /// validation grid.
    fn validate_shape(&self) -> Result<()> {
        let m = 1001;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..m {
            let u = 1e-9 + (1.0 - 2e-9) * i as f64 / (m - 1) as f64;
            let q = self.quantile_unchecked(u);
            if !q.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "quantile function is not finite at u = {u}"
                )));
            }
            if q < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "support must be nonnegative; Q({u}) = {q}"
                )));
            }
            if q <= prev {
                return Err(Error::InvalidParameter(format!(
                    "quantile function is not strictly increasing near u = {u}"
                )));
            }
            prev = q;
        }
        Ok(())
    }

    fn quantile_unchecked(&self, u: f64) -> f64 {
        match *self {
            QuantileModel::Govindarajulu { theta, sigma, beta } => {
                theta + sigma * ((beta + 1.0) * u.powf(beta) - beta * u.powf(beta + 1.0))
            }
            QuantileModel::Gld {
                lambda1,
                lambda2,
                lambda3,
                lambda4,
            } => lambda1 + (u.powf(lambda3) - (1.0 - u).powf(lambda4)) / lambda2,
            QuantileModel::PowerPareto {
                scale,
                shape1,
                shape2,
            } => scale * u.powf(shape1) * (1.0 - u).powf(-shape2),
            QuantileModel::Uniform { lower, upper } => lower + (upper - lower) * u,
        }
    }

    /// Quantile function `Q(u)` for `u` in `[0, 1]`. The Power-Pareto upper
    /// endpoint returns `+inf` when its tail shape is positive.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Domain(format!("quantile argument {u} not in [0, 1]")));
        }
        Ok(self.quantile_unchecked(u))
    }

    /// Quantile density `q(u) = Q'(u)` for `u` strictly inside `(0, 1)`.
    pub fn quantile_density(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!(
                "quantile density argument {u} not in (0, 1)"
            )));
        }
        Ok(match *self {
            QuantileModel::Govindarajulu { sigma, beta, .. } => {
                sigma * beta * (beta + 1.0) * u.powf(beta - 1.0) * (1.0 - u)
            }
            QuantileModel::Gld {
                lambda2,
                lambda3,
                lambda4,
                ..
            } => {
                (lambda3 * u.powf(lambda3 - 1.0) + lambda4 * (1.0 - u).powf(lambda4 - 1.0))
                    / lambda2
            }
            QuantileModel::PowerPareto {
                scale,
                shape1,
                shape2,
            } => {
                scale
                    * u.powf(shape1 - 1.0)
                    * (1.0 - u).powf(-shape2 - 1.0)
                    * (shape1 * (1.0 - u) + shape2 * u)
            }
            QuantileModel::Uniform { lower, upper } => upper - lower,
        })
    }

    /// Quantile-based Shannon entropy `int_0^1 log q(u) du` in nats.
    ///
    /// Closed form for the Govindarajulu and Uniform families, adaptive
    /// quadrature of `log q` otherwise.
    pub fn true_entropy(&self) -> Result<f64> {
        match *self {
            QuantileModel::Govindarajulu { sigma, beta, .. } => {
                Ok((sigma * beta * (beta + 1.0)).ln() - beta)
            }
            QuantileModel::Uniform { lower, upper } => Ok((upper - lower).ln()),
            _ => self.entropy_quadrature(0.0),
        }
    }

    /// Entropy integral restricted to `[delta, 1 - delta]`, the same trimmed
    /// range the nonparametric estimators integrate over. This is the value
    /// to compare estimates against.
    pub fn trimmed_entropy(&self, delta: f64) -> Result<f64> {
        if !(0.0..0.5).contains(&delta) {
            return Err(Error::Domain(format!("trim {delta} not in [0, 0.5)")));
        }
        if delta == 0.0 {
            return self.true_entropy();
        }
        self.entropy_quadrature(delta)
    }

    fn entropy_quadrature(&self, delta: f64) -> Result<f64> {
        // Quadrature nodes can round onto the endpoints where q diverges;
        // clamp one ulp inside (0, 1).
        let hi = 1.0 - f64::EPSILON / 2.0;
        adaptive_gl(
            |u| {
                self.quantile_density(u.clamp(f64::MIN_POSITIVE, hi))
                    .map(f64::ln)
                    .unwrap_or(f64::NAN)
            },
            delta,
            1.0 - delta,
            1e-10,
        )
        .map_err(|e| Error::Numerical(format!("entropy quadrature diverged: {e}")))
    }

    /// Support endpoints `(Q(0), Q(1))`; the upper end may be infinite.
    pub fn support(&self) -> (f64, f64) {
        (self.quantile_unchecked(0.0), self.quantile_unchecked(1.0))
    }

    /// Distribution function obtained by inverting `Q` with monotone
    /// bisection; exact for the uniform family. Clamps to 0 and 1 at or
    /// beyond the support endpoints.
    pub fn cdf(&self, x: f64) -> f64 {
        if let QuantileModel::Uniform { lower, upper } = *self {
            return ((x - lower) / (upper - lower)).clamp(0.0, 1.0);
        }
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        bisect_increasing(
            |u| self.quantile_unchecked(u),
            0.0,
            1.0,
            x,
            1e-10 * x.abs().max(1.0),
        )
    }

    /// Integral of `Q` over `[a, b]`. The Power-Pareto right endpoint has a
    /// power singularity, removed by substituting `u = 1 - s^8` before
    /// integrating.
    pub(crate) fn integrate_quantile(&self, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
        match *self {
            QuantileModel::PowerPareto {
                scale,
                shape1,
                shape2,
            } if shape2 > 0.0 => {
                if shape2 >= 1.0 {
                    return Err(Error::Numerical(format!(
                        "mean is not finite for power_pareto shape2 = {shape2} >= 1"
                    )));
                }
                let sa = (1.0 - b).max(0.0).powf(0.125);
                let sb = (1.0 - a).powf(0.125);
                // Q(1 - s^8) du = 8 C s^(7 - 8 shape2) (1 - s^8)^shape1 ds;
                // folding s^(-8 shape2) into the Jacobian keeps the
                // integrand finite where s^8 underflows.
                adaptive_gl(
                    |s| {
                        8.0 * scale
                            * s.powf(7.0 - 8.0 * shape2)
                            * (1.0 - s.powi(8)).powf(shape1)
                    },
                    sa,
                    sb,
                    rel_tol,
                )
            }
            _ => adaptive_gl(|u| self.quantile_unchecked(u), a, b, rel_tol),
        }
    }

    /// Mean of the base distribution, `mu = int_0^1 Q(u) du`.
    pub fn mean(&self) -> Result<f64> {
        let mu = self.integrate_quantile(0.0, 1.0, 1e-10)?;
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::Numerical(format!("mean {mu} is not finite positive")));
        }
        Ok(mu)
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            QuantileModel::Govindarajulu { .. } => "govindarajulu",
            QuantileModel::Gld { .. } => "gld",
            QuantileModel::PowerPareto { .. } => "power_pareto",
            QuantileModel::Uniform { .. } => "uniform",
        }
    }

    /// Parameters in the documented order for each family.
    pub fn params(&self) -> Vec<f64> {
        match *self {
            QuantileModel::Govindarajulu { theta, sigma, beta } => vec![theta, sigma, beta],
            QuantileModel::Gld {
                lambda1,
                lambda2,
                lambda3,
                lambda4,
            } => vec![lambda1, lambda2, lambda3, lambda4],
            QuantileModel::PowerPareto {
                scale,
                shape1,
                shape2,
            } => vec![scale, shape1, shape2],
            QuantileModel::Uniform { lower, upper } => vec![lower, upper],
        }
    }
}

impl std::fmt::Display for QuantileModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let params: Vec<String> = self.params().iter().map(|p| format!("{p}")).collect();
        write!(f, "{}({})", self.family_name(), params.join(","))
    }
}

/// Wire form of a model: `{"family": "...", "params": [...]}` with parameters
/// in the order (theta, sigma, beta), (l1, l2, l3, l4), (C, l1, l2), (a, b).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModelSpec {
    pub family: String,
    pub params: Vec<f64>,
}

impl ModelSpec {
    pub fn to_model(&self) -> Result<QuantileModel> {
        let p = &self.params;
        let need = |n: usize| -> Result<()> {
            if p.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "family {:?} needs {} params, got {}",
                    self.family,
                    n,
                    p.len()
                )))
            }
        };
        match self.family.as_str() {
            "govindarajulu" => {
                need(3)?;
                QuantileModel::govindarajulu(p[0], p[1], p[2])
            }
            "gld" => {
                need(4)?;
                QuantileModel::gld(p[0], p[1], p[2], p[3])
            }
            "power_pareto" => {
                need(3)?;
                QuantileModel::power_pareto(p[0], p[1], p[2])
            }
            "uniform" => {
                need(2)?;
                QuantileModel::uniform(p[0], p[1])
            }
            other => Err(Error::InvalidParameter(format!(
                "unknown family {other:?}; expected govindarajulu, gld, power_pareto or uniform"
            ))),
        }
    }

    pub fn from_model(m: &QuantileModel) -> Self {
        ModelSpec {
            family: m.family_name().to_string(),
            params: m.params(),
        }
    }
}

/// Inverse-transform sampler for the length-biased law of a model.
///
/// The length-biased CDF in quantile space is
/// `Phi(v) = int_0^v Q(p) dp / int_0^1 Q(p) dp`; draws are `Y = Q(Phi^{-1}(U))`.
/// `Phi` is tabulated on a uniform 4096-panel grid and interpolated with a
/// monotone cubic, inverted by bisection per draw.
#[derive(Debug, Clone)]
pub struct LbSampler {
    model: QuantileModel,
    mu: f64,
    phi: Pchip,
}

impl LbSampler {
    pub fn new(model: QuantileModel) -> Result<Self> {
        let mu = model.mean()?;
        let mut vs = Vec::with_capacity(PHI_PANELS + 1);
        let mut cum = Vec::with_capacity(PHI_PANELS + 1);
        vs.push(0.0);
        cum.push(0.0);
        let mut total = 0.0;
        for j in 0..PHI_PANELS {
            let a = j as f64 / PHI_PANELS as f64;
            let b = (j + 1) as f64 / PHI_PANELS as f64;
            let panel = model.integrate_quantile(a, b, 1e-12)?;
            if !(panel > 0.0) {
                return Err(Error::Numerical(format!(
                    "length-biased CDF is not strictly increasing on [{a}, {b}]"
                )));
            }
            total += panel;
            vs.push(b);
            cum.push(total);
        }
        // Normalize by the panel total so the table ends exactly at 1.
        for c in cum.iter_mut() {
            *c /= total;
        }
        *cum.last_mut().unwrap() = 1.0;
        let phi = Pchip::new(vs, cum)?;
        Ok(LbSampler { model, mu, phi })
    }

    pub fn model(&self) -> &QuantileModel {
        &self.model
    }

    /// Mean `mu` of the base distribution.
    pub fn mean(&self) -> f64 {
        self.mu
    }

    /// Tabulated length-biased CDF in quantile space.
    pub fn phi(&self, v: f64) -> f64 {
        self.phi.eval(v)
    }

    /// Draw `n` independent length-biased observations.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<LBSample> {
        if n < 2 {
            return Err(Error::Validation(format!(
                "length-biased sample needs n >= 2, got {n}"
            )));
        }
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            let u: f64 = rng.gen();
            let v = self.phi.invert_increasing(u).clamp(U_EPS, 1.0 - U_EPS);
            let y = self.model.quantile_unchecked(v);
            if !(y.is_finite() && y > 0.0) {
                return Err(Error::Numerical(format!(
                    "sampler produced a non-positive draw {y} at v = {v}"
                )));
            }
            values.push(y);
        }
        LBSample::new(values)
    }
}
