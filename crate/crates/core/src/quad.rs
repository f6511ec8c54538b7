//! Quadrature, interpolation and finite-difference helpers shared by the solvers.
//!
//! Everything here works on arbitrary increasing abscissae; the grids used by
//! the solvers are uniform except for the two nodes snapped onto turning points.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order as f64;
        for i in 0..order.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(order, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Integrates `f` over [a, b] split into `panels` equal panels.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, panels: usize) -> f64 {
        let panels = panels.max(1);
        let width = (b - a) / panels as f64;
        let mut total = 0.0;
        for k in 0..panels {
            let lo = a + k as f64 * width;
            let mid = lo + 0.5 * width;
            let half = 0.5 * width;
            let mut s = 0.0;
            for (t, w) in self.nodes.iter().zip(&self.weights) {
                s += w * f(mid + half * t);
            }
            total += s * half;
        }
        total
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Simpson rule on an odd number of increasing, possibly
/// non-uniform abscissae (each pair of intervals uses the exact
/// three-point quadratic rule).
pub fn simpson(x: &[f64], f: &[f64]) -> f64 {
    assert_eq!(x.len(), f.len());
    assert!(x.len() >= 3 && x.len() % 2 == 1, "simpson needs an odd count >= 3");
    let mut total = 0.0;
    for i in (0..x.len() - 2).step_by(2) {
        let h0 = x[i + 1] - x[i];
        let h1 = x[i + 2] - x[i + 1];
        let hs = h0 + h1;
        total += hs / 6.0
            * ((2.0 - h1 / h0) * f[i] + hs * hs / (h0 * h1) * f[i + 1] + (2.0 - h0 / h1) * f[i + 2]);
    }
    total
}

/// Value of the Lagrange interpolant through `(xs, fs)` at `x`.
pub fn lagrange_eval(xs: &[f64], fs: &[f64], x: f64) -> f64 {
    let mut total = 0.0;
    for j in 0..xs.len() {
        let mut l = 1.0;
        for k in 0..xs.len() {
            if k != j {
                l *= (x - xs[k]) / (xs[j] - xs[k]);
            }
        }
        total += l * fs[j];
    }
    total
}

/// Derivative of the Lagrange interpolant through `(xs, fs)` at `x`.
pub fn lagrange_derivative(xs: &[f64], fs: &[f64], x: f64) -> f64 {
    let p = xs.len();
    let mut total = 0.0;
    for j in 0..p {
        let mut dl = 0.0;
        for m in 0..p {
            if m == j {
                continue;
            }
            let mut term = 1.0 / (xs[j] - xs[m]);
            for k in 0..p {
                if k != j && k != m {
                    term *= (x - xs[k]) / (xs[j] - xs[k]);
                }
            }
            dl += term;
        }
        total += dl * fs[j];
    }
    total
}

/// Index window of `width` consecutive samples centred on `i` where possible.
pub fn stencil(i: usize, len: usize, width: usize) -> std::ops::Range<usize> {
    let width = width.min(len);
    let start = i.saturating_sub(width / 2).min(len - width);
    start..start + width
}

/// Five-point derivative at every sample (one-sided near the ends).
pub fn derivative(x: &[f64], f: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let r = stencil(i, x.len(), 5);
            lagrange_derivative(&x[r.clone()], &f[r], x[i])
        })
        .collect()
}

/// Running integral `F(x_i) = ∫_{x_0}^{x_i} f` using the local quintic
/// interpolant on each interval (sixth order on smooth data).
pub fn cumulative(x: &[f64], f: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), f.len());
    let n = x.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    // three-point Gauss rule, exact through degree five
    let g = (0.6f64).sqrt();
    let (w_end, w_mid) = (5.0 / 9.0, 8.0 / 9.0);
    for i in 0..n - 1 {
        let lo = i.saturating_sub(2).min(n.saturating_sub(6));
        let hi = (lo + 6).min(n);
        let (xs, fs) = (&x[lo..hi], &f[lo..hi]);
        let mid = 0.5 * (x[i] + x[i + 1]);
        let half = 0.5 * (x[i + 1] - x[i]);
        let piece = half
            * (w_end * lagrange_eval(xs, fs, mid - half * g)
                + w_mid * lagrange_eval(xs, fs, mid)
                + w_end * lagrange_eval(xs, fs, mid + half * g));
        out[i + 1] = out[i] + piece;
    }
    out
}

/// Cubic interpolation of sampled data at `x` (clamped to the sample range).
pub fn interpolate(xs: &[f64], fs: &[f64], x: f64) -> f64 {
    let n = xs.len();
    let i = match xs.partition_point(|&v| v <= x) {
        0 => 0,
        k => (k - 1).min(n - 2),
    };
    let lo = i.saturating_sub(1).min(n.saturating_sub(4));
    let hi = (lo + 4).min(n);
    lagrange_eval(&xs[lo..hi], &fs[lo..hi], x)
}
