//! The quantum momentum function `p = (ħ/i) ψ'/ψ` and its poles.
//!
//! For a real bound state `p` is purely imaginary and has a simple pole with
//! residue `ħ/i` at every node of `ψ`. The integrator here never divides by
//! `ψ`: it carries the linear pair `(u, v) = (ψ, ψ')` through each step with
//! a fourth-order Magnus transfer matrix and reads `p = (ħ/i) v/u` off the
//! homogeneous coordinates, so a pole is just a sign change of `u`.

use num_complex::Complex64;

use crate::classical::classical_momentum;
use crate::error::{Error, Result};
use crate::potentials::{System, UnitsConfig};
use crate::quad;

/// Relative `|ψ|` below which a sample counts as pole-adjacent.
pub const NODE_EPSILON: f64 = 1e-10;
/// Radius, in cells, of the exclusion disk bridged by the local model.
pub const EXCLUSION_RADIUS: f64 = 1.0;
/// Largest allowed distance, in cells, between a node estimate and a
/// detected sign change.
pub const MAX_ESTIMATE_CELLS: f64 = 3.0;
const RESCALE: f64 = 1e100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleEstimate {
    pub x0: f64,
    pub residue: Complex64,
    /// Whether root refinement converged inside the bracketing cell.
    pub refined: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QmfTrace {
    pub grid: Vec<f64>,
    pub p_l: Vec<Complex64>,
    /// `W_L = (ħ/i) ln(ψ/ψ(x_0))` continued through the nodes; the real part
    /// steps by `πħ` at each pole.
    pub w_l: Vec<Complex64>,
    /// `false` at pole-adjacent samples.
    pub regular: Vec<bool>,
    /// Sign of the underlying real solution.
    pub sign: Vec<i8>,
    pub poles: Vec<PoleEstimate>,
    pub hbar: f64,
}

impl QmfTrace {
    /// Poles with `a < x0 < b`.
    pub fn poles_in(&self, a: f64, b: f64) -> Vec<PoleEstimate> {
        self.poles.iter().copied().filter(|p| p.x0 > a && p.x0 < b).collect()
    }
}

/// `f(x0 + δ) + f(x0 − δ)`. For `f` with a simple pole at `x0` the odd
/// singular parts cancel and the sum tends to twice the regular part.
pub fn mirror_pair_sum<F: Fn(f64) -> Complex64>(f: F, x0: f64, delta: f64) -> Complex64 {
    f(x0 + delta) + f(x0 - delta)
}

/// Root of `f` in `[a, b]` (opposite signs at the ends) by the Illinois
/// variant of regula falsi. Returns the root and whether it converged.
fn bracket_root<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, bool) {
    let (mut fa, mut fb) = (f(a), f(b));
    let tol = 4.0 * f64::EPSILON * a.abs().max(b.abs()).max((b - a).abs());
    let mut side = 0;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = f(c);
        if fc == 0.0 || (b - a).abs() < tol {
            return (c, true);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() < tol {
            return (0.5 * (a + b), true);
        }
    }
    (0.5 * (a + b), false)
}

/// Residue of `p = (ħ/i) v/u` at `x0`, averaging `(x − x0) p` over the
/// mirror offsets `±δ`.
fn residue_at<F: Fn(f64) -> (f64, f64)>(local: F, x0: f64, delta: f64, hbar: f64) -> Complex64 {
    let g = |x: f64| {
        let (u, v) = local(x);
        Complex64::new(0.0, -hbar) * ((x - x0) * v / u)
    };
    0.5 * mirror_pair_sum(g, x0, delta)
}

fn sign_of(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// `W_L` from sampled `ln|u|` and the sign history.
fn accumulate_action(log_abs: &[f64], sign: &[i8], hbar: f64) -> Vec<Complex64> {
    let mut crossings = 0;
    let mut out = Vec::with_capacity(log_abs.len());
    for i in 0..log_abs.len() {
        if i > 0 && sign[i] != 0 && sign[i - 1] != 0 && sign[i] != sign[i - 1] {
            crossings += 1;
        }
        out.push(Complex64::new(std::f64::consts::PI * hbar * crossings as f64, -hbar * (log_abs[i] - log_abs[0])));
    }
    out
}

/// Quantum momentum function of a sampled real wave function.
pub fn qmf_from_wavefunction(
    psi: &[f64],
    dpsi: &[f64],
    units: &UnitsConfig,
    grid: &[f64],
) -> Result<QmfTrace> {
    let n = grid.len();
    if psi.len() != n || dpsi.len() != n {
        return Err(Error::Argument(format!(
            "sample lengths {} / {} do not match grid length {n}",
            psi.len(),
            dpsi.len()
        )));
    }
    if n < 6 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Argument("grid must be increasing with at least 6 points".into()));
    }
    let hbar = units.hbar;
    let peak = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let regular: Vec<bool> = psi.iter().map(|v| v.abs() > NODE_EPSILON * peak).collect();
    let p_l = psi
        .iter()
        .zip(dpsi)
        .map(|(&u, &v)| Complex64::new(0.0, -hbar * v / u))
        .collect();
    let sign: Vec<i8> = psi.iter().map(|&v| sign_of(v)).collect();
    let log_abs: Vec<f64> = psi.iter().map(|v| v.abs().ln()).collect();
    let w_l = accumulate_action(&log_abs, &sign, hbar);

    let mut poles = Vec::new();
    for i in 0..n - 1 {
        let exact = psi[i] == 0.0 && (i == 0 || psi[i - 1] * psi[i + 1] < 0.0);
        if !(psi[i] * psi[i + 1] < 0.0 || exact) {
            continue;
        }
        let r = quad::stencil(i, n, 6);
        let (xs, us, vs) = (&grid[r.clone()], &psi[r.clone()], &dpsi[r]);
        let local = |x: f64| (quad::lagrange_eval(xs, us, x), quad::lagrange_eval(xs, vs, x));
        let (x0, refined) = if exact {
            (grid[i], true)
        } else {
            bracket_root(|x| local(x).0, grid[i], grid[i + 1])
        };
        let delta = 1e-3 * (grid[i + 1] - grid[i]);
        poles.push(PoleEstimate { x0, residue: residue_at(local, x0, delta, hbar), refined });
    }
    Ok(QmfTrace { grid: grid.to_vec(), p_l, w_l, regular, sign, poles, hbar })
}

/// Fourth-order Magnus transfer matrix of `(ψ, ψ')' = [[0, 1], [g, 0]] (ψ, ψ')`
/// over `[x, x + h]`, `g = 2m(V − E)/ħ²`.
fn magnus_step(system: &System, energy: f64, x: f64, h: f64) -> [[f64; 2]; 2] {
    let c = 3f64.sqrt() / 6.0;
    let g1 = system.kappa_squared(energy, x + (0.5 - c) * h);
    let g2 = system.kappa_squared(energy, x + (0.5 + c) * h);
    // Ω = h (A1 + A2)/2 + (√3/12) h² [A2, A1]
    let a = 3f64.sqrt() / 12.0 * h * h * (g1 - g2);
    let b = h;
    let cc = 0.5 * h * (g1 + g2);
    let q2 = a * a + b * cc;
    let (ch, sh) = if q2.abs() < 1e-8 {
        (1.0 + q2 / 2.0 + q2 * q2 / 24.0, 1.0 + q2 / 6.0 + q2 * q2 / 120.0)
    } else if q2 > 0.0 {
        let q = q2.sqrt();
        (q.cosh(), q.sinh() / q)
    } else {
        let q = (-q2).sqrt();
        (q.cos(), q.sin() / q)
    };
    [[ch + sh * a, sh * b], [sh * cc, ch - sh * a]]
}

fn apply(m: &[[f64; 2]; 2], (u, v): (f64, f64)) -> (f64, f64) {
    (m[0][0] * u + m[0][1] * v, m[1][0] * u + m[1][1] * v)
}

/// Integrates the quantum Hamilton-Jacobi equation for `p_L` across `grid`
/// from the grid node `x_start` (both directions when it is interior).
///
/// `p_start` defaults to the classical momentum `i√(2m(V − E))`, which is
/// not the physical logarithmic derivative of the tail.
pub fn moebius_integrate_qmf(
    system: &System,
    energy: f64,
    x_start: f64,
    p_start: Option<Complex64>,
    grid: &[f64],
) -> Result<QmfTrace> {
    let n = grid.len();
    if n < 6 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Argument("grid must be increasing with at least 6 points".into()));
    }
    let k = grid.partition_point(|&x| x < x_start).min(n - 1);
    let k = if k > 0 && (x_start - grid[k - 1]).abs() < (grid[k] - x_start).abs() { k - 1 } else { k };
    let cell = if k + 1 < n { grid[k + 1] - grid[k] } else { grid[k] - grid[k - 1] };
    if (grid[k] - x_start).abs() > 1e-9 * cell {
        return Err(Error::Argument(format!("x_start = {x_start} is not a grid node")));
    }
    if system.kappa_squared(energy, x_start) <= 0.0 {
        return Err(Error::Domain(format!("x_start = {x_start} is not classically forbidden")));
    }
    let hbar = system.units.hbar;
    let p0 = p_start.unwrap_or_else(|| classical_momentum(system, energy, x_start));
    // v/u = (i/ħ) p; only the real part survives for a real solution
    let s0 = (Complex64::i() * p0 / hbar).re;

    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut log_scale = vec![0.0; n];
    let mut poles = Vec::new();
    u[k] = 1.0;
    v[k] = s0;
    let order: Vec<Vec<usize>> = vec![(k..n).collect(), (0..=k).rev().collect()];
    for path in order {
        for w in path.windows(2) {
            let (i, j) = (w[0], w[1]);
            let (x, h) = (grid[i], grid[j] - grid[i]);
            let start = (u[i], v[i]);
            let mid = apply(&magnus_step(system, energy, x, 0.5 * h), start);
            let end = apply(&magnus_step(system, energy, x, h), start);
            let (s0, s1, s2) = (sign_of(start.0), sign_of(mid.0), sign_of(end.0));
            if s0 != 0 && s1 != 0 && s2 != 0 && s0 != s1 && s1 != s2 {
                return Err(Error::Refinement { x: x + 0.5 * h });
            }
            if s0 != 0 && s2 != 0 && s0 != s2 || (s2 == 0 && s0 != 0) {
                let local = |t: f64| apply(&magnus_step(system, energy, x, t - x), start);
                let (x0, refined) = bracket_root(|t| local(t).0, x.min(x + h), x.max(x + h));
                let residue = residue_at(local, x0, 1e-3 * h.abs(), hbar);
                poles.push(PoleEstimate { x0, residue, refined });
            }
            let scale = end.0.abs().max(end.1.abs() * h.abs());
            let factor = if !(RESCALE.recip()..=RESCALE).contains(&scale) { scale } else { 1.0 };
            u[j] = end.0 / factor;
            v[j] = end.1 / factor;
            log_scale[j] = log_scale[i] + factor.ln();
            if !u[j].is_finite() || !v[j].is_finite() {
                return Err(Error::Stiffness { x: grid[j], value: f64::INFINITY });
            }
        }
    }
    poles.sort_by(|a, b| a.x0.total_cmp(&b.x0));

    let p_l = u.iter().zip(&v).map(|(&a, &b)| Complex64::new(0.0, -hbar * b / a)).collect();
    let regular = (0..n)
        .map(|i| {
            let h = if i + 1 < n { grid[i + 1] - grid[i] } else { grid[i] - grid[i - 1] };
            u[i].abs() > NODE_EPSILON * (u[i].abs() + h * v[i].abs())
        })
        .collect();
    let sign: Vec<i8> = u.iter().map(|&a| sign_of(a)).collect();
    let log_abs: Vec<f64> = (0..n).map(|i| u[i].abs().ln() + log_scale[i]).collect();
    let mut w_l = accumulate_action(&log_abs, &sign, hbar);
    let shift = w_l[k];
    w_l.iter_mut().for_each(|w| *w -= shift);
    Ok(QmfTrace { grid: grid.to_vec(), p_l, w_l, regular, sign, poles, hbar })
}

/// Two traces started at the grid edges with the classical momentum and
/// run inward, glued at the node-free sample nearest `x_match`.
///
/// At the right edge `p_C` selects the decaying tail; at the left edge it
/// selects the wrong branch, which dies out moving inward but typically
/// leaves one spurious pole in the left forbidden region.
pub fn moebius_two_sided(system: &System, energy: f64, grid: &[f64], x_match: f64) -> Result<QmfTrace> {
    let n = grid.len();
    let left = moebius_integrate_qmf(system, energy, grid[0], None, grid)?;
    let right = moebius_integrate_qmf(system, energy, grid[n - 1], None, grid)?;
    let near_pole = |i: usize| {
        let h = grid[(i + 1).min(n - 1)] - grid[i.saturating_sub(1)];
        left.poles.iter().chain(&right.poles).any(|p| (p.x0 - grid[i]).abs() < 2.5 * h)
    };
    let mut order: Vec<usize> = (1..n - 1).collect();
    order.sort_by(|&a, &b| (grid[a] - x_match).abs().total_cmp(&(grid[b] - x_match).abs()));
    let m = order
        .into_iter()
        .find(|&i| !near_pole(i) && left.sign[i] != 0 && right.sign[i] != 0)
        .ok_or(Error::Refinement { x: x_match })?;

    let flip: i8 = if left.sign[m] == right.sign[m] { 1 } else { -1 };
    let shift = left.w_l[m] - right.w_l[m];
    let mut trace = left.clone();
    for i in m + 1..n {
        trace.p_l[i] = right.p_l[i];
        trace.regular[i] = right.regular[i];
        trace.sign[i] = flip * right.sign[i];
        trace.w_l[i] = right.w_l[i] + shift;
    }
    trace.poles = left
        .poles
        .iter()
        .filter(|p| p.x0 <= grid[m])
        .chain(right.poles.iter().filter(|p| p.x0 > grid[m]))
        .copied()
        .collect();
    Ok(trace)
}

/// `p²/2m + (ħ/2mi) p' − (E − V)` at every sample, with `p'` from a
/// five-point stencil applied after the poles' singular parts `−iħ/(x − x0)`
/// have been removed (and added back analytically).
pub fn riccati_residual(trace: &QmfTrace, system: &System, energy: f64) -> Vec<Complex64> {
    let hbar = trace.hbar;
    let mass = system.units.mass;
    let x = &trace.grid;
    let singular = |xi: f64| -> (Complex64, Complex64) {
        let mut value = Complex64::new(0.0, 0.0);
        let mut slope = Complex64::new(0.0, 0.0);
        for pole in &trace.poles {
            let d = xi - pole.x0;
            value += Complex64::new(0.0, -hbar) / d;
            slope += Complex64::new(0.0, hbar) / (d * d);
        }
        (value, slope)
    };
    let smooth: Vec<Complex64> = x.iter().zip(&trace.p_l).map(|(&xi, &p)| p - singular(xi).0).collect();
    let re: Vec<f64> = smooth.iter().map(|p| p.re).collect();
    let im: Vec<f64> = smooth.iter().map(|p| p.im).collect();
    let (dre, dim) = (quad::derivative(x, &re), quad::derivative(x, &im));
    (0..x.len())
        .map(|i| {
            let p = trace.p_l[i];
            let dp = Complex64::new(dre[i], dim[i]) + singular(x[i]).1;
            p * p / (2.0 * mass) + Complex64::new(0.0, -hbar / (2.0 * mass)) * dp
                - (energy - system.potential(x[i]))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub grid: Vec<f64>,
    /// Normalized, positive in the right tail.
    pub psi: Vec<f64>,
    /// Refined node positions used.
    pub nodes: Vec<f64>,
}

/// Rebuilds `ψ = exp((i/ħ) ∫ p_L dx)` across the poles.
///
/// The pole `1/(x − x0)` of `ψ'/ψ` at each node is subtracted and integrated
/// as a principal value, so the contributions of mirror points on either
/// side cancel; only the smooth remainder goes through quadrature. Samples
/// within [`EXCLUSION_RADIUS`] cells of a node are bridged by the pole model
/// plus a cubic continuation of the regular part.
pub fn reconstruct_psi_antithetic(
    trace: &QmfTrace,
    units: &UnitsConfig,
    node_estimates: &[f64],
) -> Result<Reconstruction> {
    let x = &trace.grid;
    let n = x.len();
    let hbar = units.hbar;
    let changes: Vec<usize> = (0..n - 1)
        .filter(|&i| trace.sign[i] != 0 && trace.sign[i + 1] != 0 && trace.sign[i] != trace.sign[i + 1]
            || trace.sign[i] == 0 && i > 0)
        .collect();

    let mut nodes: Vec<(f64, usize)> = Vec::new();
    for &e in node_estimates {
        if !(e >= x[0] && e <= x[n - 1]) {
            return Err(Error::Range { x: e, min: x[0], max: x[n - 1] });
        }
        let cells_to = |c: usize| (e - 0.5 * (x[c] + x[c + 1])).abs() / (x[c + 1] - x[c]);
        let nearest = changes.iter().copied().min_by(|&a, &b| cells_to(a).total_cmp(&cells_to(b)));
        let Some(cell) = nearest.filter(|&c| cells_to(c) <= MAX_ESTIMATE_CELLS) else {
            let cells = nearest.map(cells_to).unwrap_or(f64::INFINITY);
            return Err(Error::BadNodeEstimate { estimate: e, cells });
        };
        let x0 = trace
            .poles
            .iter()
            .map(|p| p.x0)
            .find(|&p| p >= x[cell] && p <= x[cell + 1])
            .unwrap_or_else(|| {
                let (u0, u1) = (trace.sign[cell] as f64, trace.sign[cell + 1] as f64);
                if u0 == 0.0 { x[cell] } else if u1 == 0.0 { x[cell + 1] } else { 0.5 * (x[cell] + x[cell + 1]) }
            });
        if !nodes.iter().any(|&(p, _)| p == x0) {
            nodes.push((x0, cell));
        }
    }
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));

    // ψ'/ψ, real for a real wave function
    let s: Vec<f64> = trace.p_l.iter().map(|p| -p.im / hbar).collect();
    // subtract every pole over the whole grid so the regular part stays smooth
    let mut r = s.clone();
    let mut in_disk = vec![false; n];
    for &(x0, cell) in &nodes {
        let h = x[cell + 1] - x[cell];
        for i in 0..n {
            if (x[i] - x0).abs() < EXCLUSION_RADIUS * h {
                in_disk[i] = true;
            } else {
                r[i] -= 1.0 / (x[i] - x0);
            }
        }
    }
    if let Some(i) = (0..n).find(|&i| !in_disk[i] && !r[i].is_finite()) {
        return Err(Error::Domain(format!("non-finite ψ'/ψ at x = {} away from any node", x[i])));
    }
    for i in 0..n {
        if !in_disk[i] {
            continue;
        }
        let left = (0..i).rev().filter(|&j| !in_disk[j]).take(2);
        let right = (i + 1..n).filter(|&j| !in_disk[j]).take(2);
        let idx: Vec<usize> = left.collect::<Vec<_>>().into_iter().rev().chain(right).collect();
        let xs: Vec<f64> = idx.iter().map(|&j| x[j]).collect();
        let fs: Vec<f64> = idx.iter().map(|&j| r[j]).collect();
        r[i] = quad::lagrange_eval(&xs, &fs, x[i]);
    }

    // principal value of the pole terms: mirror points about x0 cancel
    let mut log_abs = quad::cumulative(x, &r);
    for &(x0, _) in &nodes {
        let base = (x[0] - x0).abs().ln();
        for i in 0..n {
            log_abs[i] += (x[i] - x0).abs().ln() - base;
        }
    }
    let top = log_abs.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    let mut psi: Vec<f64> = (0..n)
        .map(|i| {
            let flips = nodes.iter().filter(|&&(x0, _)| x0 < x[i]).count();
            let sign = if flips % 2 == 0 { 1.0 } else { -1.0 };
            sign * (log_abs[i] - top).exp()
        })
        .collect();
    let sq: Vec<f64> = psi.iter().map(|v| v * v).collect();
    let norm = if n % 2 == 1 { quad::simpson(x, &sq) } else { quad::cumulative(x, &sq)[n - 1] };
    let scale = psi[n - 1].signum() / norm.sqrt();
    let scale = if scale.is_finite() && scale != 0.0 { scale } else { 1.0 / norm.sqrt() };
    psi.iter_mut().for_each(|v| *v *= scale);
    Ok(Reconstruction { grid: x.clone(), psi, nodes: nodes.into_iter().map(|n| n.0).collect() })
}
