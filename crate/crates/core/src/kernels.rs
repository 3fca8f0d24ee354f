//! Kernel functions for the density and quantile-density estimators.
//!
//! Only nonnegative kernels supported on `[-1, 1]` are admitted: compact
//! support keeps the kernel sums finite windows over sorted samples, and
//! nonnegativity guarantees the estimated quantile density is nonnegative so
//! its logarithm is well defined after flooring. The Gaussian kernel is
//! deliberately absent because it does not vanish outside `(-1, 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A symmetric probability kernel on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelSpec {
    /// `K(x) = 3/4 (1 - x^2)`; the default used throughout the studies.
    #[default]
    Epanechnikov,
    /// `K(x) = 1 - |x|`.
    Triangular,
    /// `K(x) = 1/2`.
    Uniform,
}

impl KernelSpec {
    /// Evaluate the kernel at `x`. Zero outside `[-1, 1]`.
    pub fn eval(self, x: f64) -> f64 {
        let a = x.abs();
        if a > 1.0 {
            return 0.0;
        }
        match self {
            KernelSpec::Epanechnikov => 0.75 * (1.0 - a * a),
            KernelSpec::Triangular => 1.0 - a,
            KernelSpec::Uniform => 0.5,
        }
    }

    /// Moment constants `(R(K), mu2(K)) = (int K^2, int x^2 K)` used by the
    /// rule-of-thumb bandwidth.
    pub fn constants(self) -> (f64, f64) {
        match self {
            KernelSpec::Epanechnikov => (0.6, 0.2),
            KernelSpec::Triangular => (2.0 / 3.0, 1.0 / 6.0),
            KernelSpec::Uniform => (0.5, 1.0 / 3.0),
        }
    }

    /// Value at the origin, the kernel's maximum.
    pub fn at_zero(self) -> f64 {
        self.eval(0.0)
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelSpec::Epanechnikov => "epanechnikov",
            KernelSpec::Triangular => "triangular",
            KernelSpec::Uniform => "uniform",
        }
    }

    pub const ALL: [KernelSpec; 3] = [
        KernelSpec::Epanechnikov,
        KernelSpec::Triangular,
        KernelSpec::Uniform,
    ];
}

impl std::str::FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "epanechnikov" => Ok(KernelSpec::Epanechnikov),
            "triangular" => Ok(KernelSpec::Triangular),
            "uniform" => Ok(KernelSpec::Uniform),
            other => Err(Error::InvalidParameter(format!(
                "unknown kernel {other:?}; expected epanechnikov, triangular or uniform"
            ))),
        }
    }
}

impl std::fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
