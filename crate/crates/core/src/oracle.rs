//! Independent ground truth: two-sided Numerov integration of the
//! Schrödinger equation `ψ'' = 2m(V−E)/ħ² ψ` on a uniform grid.

use crate::error::{Error, Result};
use crate::potentials::System;
use crate::quad;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub grid: Vec<f64>,
    pub psi: Vec<f64>,
    pub energy: f64,
    /// Jump of `ψ'/ψ` between the two sweeps at the match point.
    pub tail_mismatch: f64,
    /// Signed version of the jump (left minus right).
    pub signed_mismatch: f64,
    pub match_index: usize,
}

const RESCALE: f64 = 1e100;

/// Numerov sweep over `idx` (forward or reversed index order).
fn sweep(grid: &[f64], g: &[f64], idx: &[usize], h: f64) -> Vec<f64> {
    let mut y = vec![0.0; grid.len()];
    let (i0, i1) = (idx[0], idx[1]);
    if g[i0] > 0.0 && g[i1] > 0.0 {
        // WKB tail: ψ grows like exp(∫κ) moving inward.
        y[i0] = 1e-30;
        y[i1] = y[i0] * (0.5 * h * (g[i0].sqrt() + g[i1].sqrt())).exp();
    } else {
        // domain edge inside the well: hard wall
        y[i0] = 0.0;
        y[i1] = 1e-30;
    }
    let c = h * h / 12.0;
    for w in idx.windows(3) {
        let (a, b, n) = (w[0], w[1], w[2]);
        y[n] = (2.0 * (1.0 + 5.0 * c * g[b]) * y[b] - (1.0 - c * g[a]) * y[a]) / (1.0 - c * g[n]);
        if y[n].abs() > RESCALE {
            for &k in idx.iter().take_while(|&&k| k != n) {
                y[k] /= RESCALE;
            }
            y[n] /= RESCALE;
        }
    }
    y
}

/// Solves at energy `energy` by sweeping inward from both grid ends and
/// gluing the sweeps in the middle of the allowed region.
pub fn numerov_solve(system: &System, energy: f64, grid: &[f64]) -> Result<OracleSolution> {
    let n = grid.len();
    if n < 7 {
        return Err(Error::Argument("Numerov needs at least 7 grid points".into()));
    }
    let h = (grid[n - 1] - grid[0]) / (n - 1) as f64;
    if grid.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
        return Err(Error::Argument("Numerov requires a uniform grid".into()));
    }
    let tp = system.turning_points(energy)?;
    let g: Vec<f64> = grid.iter().map(|&x| system.kappa_squared(energy, x)).collect();

    let index_of = |x: f64| (((x - grid[0]) / h).round().max(0.0) as usize).min(n - 1);
    let il = index_of(tp.x_left).max(1);
    let ir = index_of(tp.x_right).min(n - 2);
    let forward: Vec<usize> = (0..=(ir + 1).min(n - 1)).collect();
    let backward: Vec<usize> = (il.saturating_sub(1)..n).rev().collect();
    let left = sweep(grid, &g, &forward, h);
    let right = sweep(grid, &g, &backward, h);

    let m = match_index(&left, &right, il, ir, index_of(0.5 * (tp.x_left + tp.x_right)));
    let log_derivative = |y: &[f64]| (y[m + 1] - y[m - 1]) / (2.0 * h * y[m]);
    let signed = log_derivative(&left) - log_derivative(&right);

    let scale = left[m] / right[m];
    let mut psi: Vec<f64> =
        (0..n).map(|i| if i <= m { left[i] } else { scale * right[i] }).collect();
    let norm2: Vec<f64> = psi.iter().map(|v| v * v).collect();
    let total = if n % 2 == 1 { quad::simpson(grid, &norm2) } else { quad::cumulative(grid, &norm2)[n - 1] };
    let sign = if scale < 0.0 { -1.0 } else { 1.0 };
    let factor = sign / total.sqrt();
    psi.iter_mut().for_each(|v| *v *= factor);

    Ok(OracleSolution {
        grid: grid.to_vec(),
        psi,
        energy,
        tail_mismatch: signed.abs(),
        signed_mismatch: signed,
        match_index: m,
    })
}

/// Index near the middle of the allowed region where both sweeps are
/// well away from a node.
fn match_index(left: &[f64], right: &[f64], il: usize, ir: usize, mid: usize) -> usize {
    let q = (ir - il) / 4;
    let (lo, hi) = ((il + q).max(1), (ir - q).min(left.len() - 2));
    let peak = |y: &[f64]| (lo..=hi).map(|i| y[i].abs()).fold(0.0, f64::max);
    let (pl, pr) = (peak(left), peak(right));
    let quality = |i: usize| (left[i].abs() / pl).min(right[i].abs() / pr);
    let mut candidates: Vec<usize> = (lo..=hi).collect();
    candidates.sort_by_key(|&i| i.abs_diff(mid));
    candidates
        .iter()
        .copied()
        .find(|&i| quality(i) >= 0.5)
        .unwrap_or_else(|| {
            (lo..=hi).max_by(|&a, &b| quality(a).total_cmp(&quality(b))).unwrap_or(mid)
        })
}

/// Bisects the signed log-derivative jump for an eigenvalue in `[lo, hi]`.
///
/// Intended for cross-checking analytic spectra in tests; the bracket must
/// contain exactly one sign change of the jump with a fixed match point.
pub fn bisect_eigenvalue(system: &System, grid: &[f64], mut lo: f64, mut hi: f64) -> Result<f64> {
    let f = |e: f64| numerov_solve(system, e, grid).map(|s| s.signed_mismatch);
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo.signum() == fhi.signum() {
        return Err(Error::Argument(format!("no sign change of the mismatch in [{lo}, {hi}]")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < 1e-13 * mid.abs().max(1.0) {
            break;
        }
        let fm = f(mid)?;
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
