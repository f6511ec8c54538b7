//! Fixed-step classical Runge-Kutta integration along a node list.
//!
//! Each interval between consecutive nodes is split into `substeps` equal RK4
//! steps. [`integrate_checked`] repeats the sweep with twice the substeps and
//! doubles until the two agree, giving up after [`MAX_DOUBLINGS`].

use crate::error::{Error, Result};

/// Outcome of a Richardson-checked sweep.
#[derive(Debug, Clone)]
pub struct Sweep<const N: usize> {
    pub states: Vec<[f64; N]>,
    pub substeps: usize,
    /// Largest relative difference between the last two resolutions.
    pub richardson_gap: f64,
}

pub const RICHARDSON_TOL: f64 = 1e-8;
pub const MAX_DOUBLINGS: usize = 6;

fn axpy<const N: usize>(y: &[f64; N], h: f64, k: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += h * k[i];
    }
    out
}

/// One RK4 step of `y' = f(x, y)`.
pub fn rk4_step<const N: usize, F>(f: &F, x: f64, y: &[f64; N], h: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k1 = f(x, y);
    let k2 = f(x + 0.5 * h, &axpy(y, 0.5 * h, &k1));
    let k3 = f(x + 0.5 * h, &axpy(y, 0.5 * h, &k2));
    let k4 = f(x + h, &axpy(y, h, &k3));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Integrates through `nodes` (any monotone order) starting from `y0` at
/// `nodes[0]`. `guard` sees every node state and may abort the sweep.
pub fn integrate<const N: usize, F, G>(
    f: &F,
    nodes: &[f64],
    y0: [f64; N],
    substeps: usize,
    guard: &G,
) -> Result<Vec<[f64; N]>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    G: Fn(f64, &[f64; N]) -> Result<()>,
{
    let mut out = Vec::with_capacity(nodes.len());
    let mut y = y0;
    guard(nodes[0], &y)?;
    out.push(y);
    for w in nodes.windows(2) {
        let h = (w[1] - w[0]) / substeps as f64;
        for k in 0..substeps {
            y = rk4_step(f, w[0] + k as f64 * h, &y, h);
        }
        guard(w[1], &y)?;
        out.push(y);
    }
    Ok(out)
}

/// [`integrate`] with step doubling until successive resolutions agree to
/// [`RICHARDSON_TOL`] relative. Fails with [`Error::Unresolved`] otherwise.
pub fn integrate_checked<const N: usize, F, G>(
    f: &F,
    nodes: &[f64],
    y0: [f64; N],
    guard: &G,
) -> Result<Sweep<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    G: Fn(f64, &[f64; N]) -> Result<()>,
{
    let mut substeps = 1;
    let mut coarse = integrate(f, nodes, y0, substeps, guard)?;
    let mut gap = f64::INFINITY;
    for _ in 0..=MAX_DOUBLINGS {
        let fine = integrate(f, nodes, y0, 2 * substeps, guard)?;
        gap = max_relative_gap(&coarse, &fine);
        substeps *= 2;
        coarse = fine;
        if gap <= RICHARDSON_TOL {
            break;
        }
    }
    if !(gap <= RICHARDSON_TOL) {
        return Err(Error::Unresolved { gap, substeps });
    }
    Ok(Sweep { states: coarse, substeps, richardson_gap: gap })
}

fn max_relative_gap<const N: usize>(a: &[[f64; N]], b: &[[f64; N]]) -> f64 {
    let mut scale = [0.0f64; N];
    for s in b {
        for i in 0..N {
            scale[i] = scale[i].max(s[i].abs());
        }
    }
    let mut gap: f64 = 0.0;
    for (p, q) in a.iter().zip(b) {
        for i in 0..N {
            gap = gap.max((p[i] - q[i]).abs() / scale[i].max(1e-300));
        }
    }
    gap
}

pub(crate) fn no_guard<const N: usize>(_: f64, _: &[f64; N]) -> Result<()> {
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rk4_is_fourth_order() {
        let f = |_x: f64, y: &[f64; 2]| [y[1], -y[0]];
        let err = |n: usize| {
            let nodes: Vec<f64> = (0..=n).map(|i| i as f64 * 2.0 / n as f64).collect();
            let s = integrate(&f, &nodes, [0.0, 1.0], 1, &no_guard).unwrap();
            (s[n][0] - 2f64.sin()).abs()
        };
        let slope = (err(20) / err(40)).log2();
        assert!((3.8..4.2).contains(&slope), "slope {slope}");
    }

    #[test]
    fn checked_sweep_converges_and_reports_substeps() {
        let f = |x: f64, y: &[f64; 1]| [x.cos() * y[0]];
        let nodes: Vec<f64> = (0..=200).map(|i| i as f64 * 0.02).collect();
        let s = integrate_checked(&f, &nodes, [1.0], &no_guard).unwrap();
        assert!(s.richardson_gap <= RICHARDSON_TOL);
        let exact = 4f64.sin().exp();
        assert!((s.states[200][0] - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn unresolved_sweep_is_an_error() {
        let f = |x: f64, y: &[f64; 2]| [y[1], -1e6 * (1.0 + x) * y[0]];
        let nodes: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
        let r = integrate_checked(&f, &nodes, [1.0, 0.0], &no_guard);
        assert!(matches!(r, Err(Error::Unresolved { .. })), "{r:?}");
    }

    #[test]
    fn integration_runs_backwards() {
        let f = |_x: f64, y: &[f64; 1]| [y[0]];
        let nodes: Vec<f64> = (0..=100).map(|i| 1.0 - i as f64 * 0.01).collect();
        let s = integrate(&f, &nodes, [1.0], 2, &no_guard).unwrap();
        assert!((s[100][0] - (-1f64).exp()).abs() < 1e-10);
    }
}
