//! Shared numerical routines: adaptive Gauss-Legendre quadrature, monotone
//! piecewise-cubic interpolation and monotone bisection.

use crate::error::{Error, Result};

/// 15-point Gauss-Legendre nodes on `[0, 1]` would lose symmetry; keep the
/// canonical `[-1, 1]` abscissae (positive half) and weights.
const GL15_NODES: [f64; 7] = [
    0.2011940939974345,
    0.3941513470775634,
    0.5709721726085388,
    0.7244177313601700,
    0.8482065834104272,
    0.9372733924007059,
    0.9879925180204854,
];
const GL15_WEIGHTS: [f64; 7] = [
    0.1984314853271116,
    0.1861610000155622,
    0.1662692058169939,
    0.1395706779261543,
    0.1071592204671719,
    0.0703660474881081,
    0.0307532419961173,
];
const GL15_CENTER_WEIGHT: f64 = 0.2025782419255613;

/// Single 15-point Gauss-Legendre panel over `[a, b]`.
pub fn gl15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = GL15_CENTER_WEIGHT * f(mid);
    for i in 0..7 {
        let dx = half * GL15_NODES[i];
        sum += GL15_WEIGHTS[i] * (f(mid - dx) + f(mid + dx));
    }
    sum * half
}

struct AdaptiveState<'a, F> {
    f: &'a F,
    /// Machine-resolution floor: once a panel's subdivision changes the
    /// estimate by less than this, further splitting only chases rounding.
    floor_tol: f64,
    evals_left: i64,
}

fn adaptive_rec<F: Fn(f64) -> f64>(
    st: &mut AdaptiveState<'_, F>,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let mid = 0.5 * (a + b);
    let left = gl15(st.f, a, mid);
    let right = gl15(st.f, mid, b);
    st.evals_left -= 30;
    let refined = left + right;
    if !refined.is_finite() {
        return Err(Error::Numerical(format!(
            "quadrature produced a non-finite value on [{a}, {b}]"
        )));
    }
    // At the depth cap the panel is ~2^-52 of the range; for integrable
    // singularities the remaining error there is below 1e-8, so the panel is
    // accepted rather than rejected.
    if (refined - whole).abs() <= tol.max(st.floor_tol) || depth >= 52 {
        return Ok(refined);
    }
    if st.evals_left <= 0 {
        return Err(Error::Numerical(
            "quadrature evaluation budget exhausted".into(),
        ));
    }
    let half_tol = 0.5 * tol;
    Ok(adaptive_rec(st, a, mid, left, half_tol, depth + 1)?
        + adaptive_rec(st, mid, b, right, half_tol, depth + 1)?)
}

/// Adaptive Gauss-Legendre integration of `f` over `[a, b]` to a relative
/// tolerance of `rel_tol` (floored at an absolute scale of 1). Endpoint
/// singularities that are integrable (logarithmic, or powers above -1 away
/// from 1) are handled by dyadic refinement; the nodes never touch `a` or `b`.
pub fn adaptive_gl<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::Domain(format!("bad integration range [{a}, {b}]")));
    }
    let rough = gl15(&f, a, b);
    if !rough.is_finite() {
        return Err(Error::Numerical(
            "quadrature produced a non-finite value on the initial panel".into(),
        ));
    }
    let abs_tol = rel_tol * rough.abs().max(1.0);
    let mut st = AdaptiveState {
        f: &f,
        floor_tol: 64.0 * f64::EPSILON * rough.abs().max(1.0),
        evals_left: 4_000_000,
    };
    adaptive_rec(&mut st, a, b, rough, abs_tol, 0)
}

/// Composite trapezoid of samples on a uniform grid with spacing `dx`.
/// Summation runs in index order so results do not depend on scheduling.
pub fn trapezoid_uniform(values: &[f64], dx: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mut sum = 0.5 * (values[0] + values[n - 1]);
    for v in &values[1..n - 1] {
        sum += v;
    }
    sum * dx
}

/// Bisection for a nondecreasing `f` on `[lo, hi]`: returns `x` with
/// `f(x)` closest to `target` after the bracket collapses to floating-point
/// resolution or `|f(x) - target| <= tol`.
pub fn bisect_increasing<F: Fn(f64) -> f64>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    target: f64,
    tol: f64,
) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if (v - target).abs() <= tol {
            return mid;
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
#[derive(Debug, Clone)]
pub struct Pchip {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl Pchip {
    /// Build from strictly increasing `xs` and monotone `ys`.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(Error::InvalidParameter(
                "interpolation table needs at least two matching points".into(),
            ));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "interpolation abscissae must be strictly increasing".into(),
            ));
        }
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut slopes = vec![0.0; n];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                slopes[i] = 0.0;
            } else {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                slopes[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        slopes[0] = edge_slope(h[0], h.get(1).copied().unwrap_or(h[0]), delta[0], *delta.get(1).unwrap_or(&delta[0]));
        slopes[n - 1] = edge_slope(
            h[n - 2],
            if n >= 3 { h[n - 3] } else { h[n - 2] },
            delta[n - 2],
            if n >= 3 { delta[n - 3] } else { delta[n - 2] },
        );
        Ok(Pchip { xs, ys, slopes })
    }

    fn segment(&self, x: f64) -> usize {
        match self
            .xs
            .binary_search_by(|v| v.partial_cmp(&x).expect("finite abscissa"))
        {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        }
    }

    /// Evaluate the interpolant; clamps outside the table range.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= *self.xs.last().unwrap() {
            return *self.ys.last().unwrap();
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h * h10 * self.slopes[i] + h01 * self.ys[i + 1] + h * h11 * self.slopes[i + 1]
    }

    /// Invert an increasing interpolant: find `x` with `eval(x) = y` by
    /// table bracket plus bisection on the cubic segment.
    pub fn invert_increasing(&self, y: f64) -> f64 {
        let n = self.ys.len();
        if y <= self.ys[0] {
            return self.xs[0];
        }
        if y >= self.ys[n - 1] {
            return self.xs[n - 1];
        }
        let i = match self
            .ys
            .binary_search_by(|v| v.partial_cmp(&y).expect("finite ordinate"))
        {
            Ok(i) => return self.xs[i],
            Err(i) => i - 1,
        };
        bisect_increasing(
            |x| self.eval(x),
            self.xs[i],
            self.xs[i + 1],
            y,
            1e-15 * y.abs().max(1.0),
        )
    }
}

fn edge_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        0.0
    } else if d0 * d1 < 0.0 && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_exact_for_polynomials() {
        let v = adaptive_gl(|x| x * x, 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-14);
        let v = adaptive_gl(|x| x.powi(7) - 2.0 * x + 1.0, -1.0, 2.0, 1e-12).unwrap();
        // int x^7 = (2^8 - 1)/8, int -2x + 1 over [-1,2] = -3 + 3
        assert!((v - 255.0 / 8.0).abs() < 1e-10);
    }

    #[test]
    fn gl_handles_log_singularity() {
        // int_0^1 ln u du = -1
        let v = adaptive_gl(|u| u.ln(), 0.0, 1.0, 1e-11).unwrap();
        assert!((v + 1.0).abs() < 1e-9, "got {v}");
    }

    #[test]
    fn gl_handles_power_singularity() {
        // int_0^1 u^{-1/2} du = 2
        let v = adaptive_gl(|u| 1.0 / u.sqrt(), 0.0, 1.0, 1e-10).unwrap();
        assert!((v - 2.0).abs() < 1e-8, "got {v}");
    }

    #[test]
    fn gl_rejects_bad_range() {
        assert!(adaptive_gl(|x| x, 1.0, 0.0, 1e-10).is_err());
        assert!(adaptive_gl(|x| x, 0.0, f64::INFINITY, 1e-10).is_err());
    }

    #[test]
    fn trapezoid_linear_exact() {
        let xs: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let v = trapezoid_uniform(&xs, 0.1);
        assert!((v - 0.5).abs() < 1e-15);
        assert_eq!(trapezoid_uniform(&[1.0], 0.1), 0.0);
    }

    #[test]
    fn bisect_finds_root() {
        let x = bisect_increasing(|x| x * x * x, 0.0, 2.0, 0.125, 0.0);
        assert!((x - 0.5).abs() < 1e-14);
    }

    #[test]
    fn pchip_preserves_monotonicity() {
        // Data with a sharp knee; plain cubic splines would overshoot.
        let xs = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = vec![0.0, 0.01, 0.02, 1.0, 2.0];
        let p = Pchip::new(xs, ys).unwrap();
        let mut prev = p.eval(0.0);
        let mut x = 0.01;
        while x <= 4.0 {
            let v = p.eval(x);
            assert!(v >= prev - 1e-12, "not monotone at {x}: {v} < {prev}");
            prev = v;
            x += 0.01;
        }
    }

    #[test]
    fn pchip_interpolates_nodes_and_inverts() {
        let xs: Vec<f64> = (0..=64).map(|i| i as f64 / 64.0).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| x * x).collect();
        let p = Pchip::new(xs.clone(), ys.clone()).unwrap();
        for (x, y) in xs.iter().zip(ys.iter()) {
            assert!((p.eval(*x) - y).abs() < 1e-14);
        }
        // Interpolation error for a smooth function on this grid is tiny.
        assert!((p.eval(0.5017) - 0.5017f64.powi(2)).abs() < 1e-6);
        let x = p.invert_increasing(0.25);
        assert!((x - 0.5).abs() < 1e-7, "got {x}");
    }

    #[test]
    fn pchip_rejects_unsorted() {
        assert!(Pchip::new(vec![0.0, 0.0, 1.0], vec![0.0, 0.5, 1.0]).is_err());
        assert!(Pchip::new(vec![0.0], vec![0.0]).is_err());
    }
}
