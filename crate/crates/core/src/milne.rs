//! Phase-amplitude construction of the smooth complex action `W = X + iY`.
//!
//! In the classically allowed region a family member is an amplitude `w > 0`
//! obeying the Milne equation
//!
//! ```text
//! w'' + k(x)² w = 1 / w³,     k² = 2m(E − V)/ħ²
//! X' = ħ / w²,                Y = −ħ ln w + const
//! ψ  = A / √X' · sin(X/ħ + φ0)
//! ```
//!
//! `X` and `w` are smooth through the turning points and carry no poles.
//! In the forbidden regions `ψ = B e^{−Y_i/ħ}`, where `s = ψ'/ψ` solves the
//! real Riccati equation `s' = −s² + 2m(V − E)/ħ²`, integrated inward from
//! deep in the tail.
//!
//! Members are two-parameter solutions `w² = α u1² + 2β u1 u2 + γ u2²`
//! (`αγ − β² = 1`) in the fundamental pair `u1(x_l) = 1, u1'(x_l) = σ_L`,
//! `u2(x_l) = 0, u2'(x_l) = 1`. Matching `ψ` at the left turning point fixes
//! the phase offset through `cot φ0 = −β`; the `π/4` convention means `β = −1`.

use std::f64::consts::PI;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::classical::classical_momentum;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, SnappedGrid};
use crate::ode;
use crate::potentials::{System, UnitsConfig};
use crate::quad;

pub const DEFAULT_WKB_DEPTH: f64 = 25.0;
/// Relative derivative jump at a turning point above which the energy is
/// rejected as a non-eigenvalue.
pub const DERIVATIVE_MISMATCH_TOL: f64 = 1e-4;
const STIFF_LIMIT: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn label(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }

    /// `+1` where the physical tail grows toward the well moving right.
    fn growth_sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }
}

/// Where the inward Riccati integration of a forbidden branch starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DepthCriterion {
    /// First node at which `∫|p_C| dx / ħ`, measured from the turning point,
    /// reaches the given value (clipped to the last node).
    WkbAction(f64),
    /// The outermost node.
    GridEdge,
}

impl Default for DepthCriterion {
    fn default() -> Self {
        Self::WkbAction(DEFAULT_WKB_DEPTH)
    }
}

/// Which member of the one-parameter family to build.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum FamilyMember {
    /// `π/4` phase at both turning points; `w(x_l)` solved from the right
    /// forbidden branch.
    #[default]
    Anchored,
    /// `π/4` phase at `x_l` with the given `w(x_l)`.
    Amplitude(f64),
    /// Least-oscillating amplitude, the member that tends to the classical
    /// action as ħ → 0. Its phase offset is not `π/4`.
    Smooth,
}

/// Tail solution `ψ = B e^{−Y/ħ}` on one forbidden side.
#[derive(Debug, Clone, PartialEq)]
pub struct ForbiddenBranch {
    pub side: Side,
    /// Nodes from the turning point outward.
    pub grid: Vec<f64>,
    /// `Y_i`, zero at the turning point and growing outward.
    pub y: Vec<f64>,
    /// Logarithmic derivative `ψ'/ψ`.
    pub s: Vec<f64>,
    /// Node where the inward integration started.
    pub start_index: usize,
}

impl ForbiddenBranch {
    /// `ψ'/ψ` at the turning point.
    pub fn sigma(&self) -> f64 {
        self.s[0]
    }
}

/// WKB logarithmic derivative of the decaying tail, including the
/// `−κ'/(2κ)` amplitude correction.
fn wkb_log_derivative(system: &System, energy: f64, side: Side, x: f64) -> f64 {
    let UnitsConfig { hbar, mass } = system.units;
    let kappa = system.kappa_squared(energy, x).max(0.0).sqrt();
    let dkappa = mass * system.potential_derivative(x) / (hbar * hbar * kappa);
    side.growth_sign() * kappa - 0.5 * dkappa / kappa
}

/// Integrates the forbidden-region Riccati equation on `nodes`, ordered
/// from the turning point outward.
pub fn solve_forbidden(
    system: &System,
    energy: f64,
    side: Side,
    nodes: &[f64],
    depth: DepthCriterion,
) -> Result<ForbiddenBranch> {
    if nodes.len() < 2 {
        return Err(Error::Argument("forbidden branch needs at least two nodes".into()));
    }
    let outward = match side {
        Side::Left => nodes.windows(2).all(|w| w[1] < w[0]),
        Side::Right => nodes.windows(2).all(|w| w[1] > w[0]),
    };
    if !outward {
        return Err(Error::Argument(format!("{} branch nodes must run outward", side.label())));
    }
    let kappa: Vec<f64> =
        nodes.iter().map(|&x| system.kappa_squared(energy, x).max(0.0).sqrt()).collect();
    let action = quad::cumulative(nodes, &kappa);
    let last = nodes.len() - 1;
    let start_index = match depth {
        DepthCriterion::WkbAction(d) => action.iter().position(|a| a.abs() >= d).unwrap_or(last),
        DepthCriterion::GridEdge => last,
    };
    let x_start = nodes[start_index];
    if start_index == 0 || system.kappa_squared(energy, x_start) <= 0.0 {
        return Err(Error::Domain(format!(
            "{} branch start x = {x_start} is not classically forbidden",
            side.label()
        )));
    }

    let inward: Vec<f64> = nodes[..=start_index].iter().rev().copied().collect();
    let rhs = |x: f64, s: &[f64; 1]| [-s[0] * s[0] + system.kappa_squared(energy, x)];
    let guard = |x: f64, s: &[f64; 1]| {
        if !s[0].is_finite() || s[0].abs() > STIFF_LIMIT {
            Err(Error::Stiffness { x, value: s[0].abs() })
        } else {
            Ok(())
        }
    };
    let s0 = wkb_log_derivative(system, energy, side, x_start);
    let sweep = ode::integrate_checked(&rhs, &inward, [s0], &guard)?;

    let mut s = vec![0.0; nodes.len()];
    for (k, state) in sweep.states.iter().enumerate() {
        s[start_index - k] = state[0];
    }
    for i in start_index + 1..nodes.len() {
        s[i] = wkb_log_derivative(system, energy, side, nodes[i]);
    }
    let hbar = system.units.hbar;
    let y = quad::cumulative(nodes, &s).into_iter().map(|v| -hbar * v).collect();
    Ok(ForbiddenBranch { side, grid: nodes.to_vec(), y, s, start_index })
}

/// Sampled smooth action on `[x_left, x_right]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionField {
    pub grid: Vec<f64>,
    /// `X`, zero at `x_left`.
    pub real_action: Vec<f64>,
    /// `X' = ħ/w²`.
    pub real_momentum: Vec<f64>,
    /// `Y = (ħ/2) ln(X'/X'(x_left))`.
    pub imag_action: Vec<f64>,
    /// `Y' = −ħ w'/w`.
    pub imag_momentum: Vec<f64>,
    /// `p = X' + iY'`.
    pub momentum: Vec<Complex64>,
    pub amplitude: Vec<f64>,
    pub amplitude_slope: Vec<f64>,
    /// `φ0` in `ψ ∝ w sin(X/ħ + φ0)`; `π/4` except for the smooth member.
    pub phase_offset: f64,
    pub member: FamilyMember,
    pub energy: f64,
    pub hbar: f64,
}

impl ActionField {
    pub fn total_action(&self) -> f64 {
        self.real_action[self.real_action.len() - 1]
    }

    /// Unnormalized `w sin(X/ħ + φ0)` at node `i`.
    fn raw_psi(&self, i: usize) -> f64 {
        self.amplitude[i] * (self.real_action[i] / self.hbar + self.phase_offset).sin()
    }

    /// `ψ'/ψ` implied by the representation at node `i`.
    fn log_derivative(&self, i: usize) -> f64 {
        let w = self.amplitude[i];
        let phase = self.real_action[i] / self.hbar + self.phase_offset;
        self.amplitude_slope[i] / w + phase.cos() / (phase.sin() * w * w)
    }
}

/// Fundamental pair `[u1, u1', u2, u2']` on the allowed nodes.
fn fundamental_pair(system: &System, energy: f64, nodes: &[f64], sigma: f64) -> Result<Vec<[f64; 4]>> {
    let rhs = |x: f64, u: &[f64; 4]| {
        let g = system.kappa_squared(energy, x);
        [u[1], g * u[0], u[3], g * u[2]]
    };
    Ok(ode::integrate_checked(&rhs, nodes, [1.0, sigma, 0.0, 1.0], &ode::no_guard)?.states)
}

/// `(α, β)` of the anchored member: the right turning point must satisfy
/// `w'/w − 1/w² = σ_R`, a quadratic in `α = w(x_l)²` when `β = −1`.
fn anchored_alpha(end: &[f64; 4], sigma_right: f64) -> Result<f64> {
    let [u1, d1, u2, d2] = *end;
    let a = u1 * (d1 - sigma_right * u1);
    let b = -(d1 * u2 + u1 * d2) + 2.0 * sigma_right * u1 * u2 - 1.0;
    let c = 2.0 * u2 * (d2 - sigma_right * u2);
    let linear = -c / b;
    let roots: Vec<f64> = if a.abs() <= 1e-14 * (b.abs() + c.abs()) {
        vec![linear]
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return Err(Error::FamilyDegeneracy("no real anchored amplitude".into()));
        }
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        vec![q / a, c / q]
    };
    roots
        .into_iter()
        .filter(|p| *p > 0.0 && p.is_finite())
        .min_by(|p, q| {
            let dp = (p.ln() - linear.abs().ln()).abs();
            let dq = (q.ln() - linear.abs().ln()).abs();
            dp.total_cmp(&dq)
        })
        .ok_or_else(|| Error::FamilyDegeneracy("no positive anchored amplitude".into()))
}

/// `(α, β)` of the least-oscillating member: minimizes `∫ ((w²)'')²` over the
/// interior under `αγ − β² = 1`.
fn smooth_coefficients(system: &System, energy: f64, nodes: &[f64], pair: &[[f64; 4]]) -> Result<(f64, f64)> {
    let n = nodes.len();
    let (lo, hi) = (n / 10, n - 1 - n / 10);
    let mut q = Matrix3::<f64>::zeros();
    for i in lo..hi {
        let g = system.kappa_squared(energy, nodes[i]);
        let [u1, d1, u2, d2] = pair[i];
        let e = Vector3::new(
            2.0 * g * u1 * u1 + 2.0 * d1 * d1,
            2.0 * (2.0 * g * u1 * u2 + 2.0 * d1 * d2),
            2.0 * g * u2 * u2 + 2.0 * d2 * d2,
        );
        q += e * e.transpose() * (nodes[i + 1] - nodes[i]);
    }
    let k = Matrix3::new(0.0, 0.0, 0.5, 0.0, -1.0, 0.0, 0.5, 0.0, 0.0);
    // diagonal rescaling for conditioning
    let d = Vector3::from_fn(|i, _| q[(i, i)].sqrt().max(1e-300));
    let dinv = Matrix3::from_diagonal(&d.map(|v| 1.0 / v));
    let qs = dinv * q * dinv;
    let ks = dinv * k * dinv;
    let chol = qs
        .cholesky()
        .ok_or_else(|| Error::FamilyDegeneracy("curvature form is not positive definite".into()))?;
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::FamilyDegeneracy("singular curvature form".into()))?;
    let s = l_inv * ks * l_inv.transpose();
    let eig = SymmetricEigen::new(0.5 * (s + s.transpose()));
    let (best, nu) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, v)| (i, *v))
        .unwrap_or((0, 0.0));
    if !(nu > 0.0) {
        return Err(Error::FamilyDegeneracy("no admissible smooth member".into()));
    }
    let v = eig.eigenvectors.column(best).into_owned();
    let mut c = dinv * (l_inv.transpose() * v);
    let constraint = (c.transpose() * k * c)[(0, 0)];
    c /= constraint.sqrt();
    if c[0] < 0.0 {
        c = -c;
    }
    Ok((c[0], c[1]))
}

/// Solves the amplitude equation on the allowed nodes `[x_left, …, x_right]`
/// for the requested family member.
///
/// `right` is only consulted by [`FamilyMember::Anchored`].
pub fn solve_allowed(
    system: &System,
    energy: f64,
    nodes: &[f64],
    left: &ForbiddenBranch,
    right: Option<&ForbiddenBranch>,
    member: FamilyMember,
) -> Result<ActionField> {
    if nodes.len() < 5 || nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Argument("allowed nodes must be increasing, at least 5".into()));
    }
    if left.side != Side::Left || (left.grid[0] - nodes[0]).abs() > 1e-12 * nodes[0].abs().max(1.0) {
        return Err(Error::Argument("left branch must start at the first allowed node".into()));
    }
    let hbar = system.units.hbar;
    let sigma = left.sigma();
    let (alpha, beta) = match member {
        FamilyMember::Amplitude(w0) => {
            if !(w0 > 0.0 && w0.is_finite()) {
                return Err(Error::Argument(format!("amplitude w0 must be positive, got {w0}")));
            }
            (w0 * w0, -1.0)
        }
        FamilyMember::Anchored => {
            let right = right
                .filter(|r| r.side == Side::Right)
                .ok_or_else(|| Error::Argument("anchored member needs the right branch".into()))?;
            let pair = fundamental_pair(system, energy, nodes, sigma)?;
            (anchored_alpha(&pair[pair.len() - 1], right.sigma())?, -1.0)
        }
        FamilyMember::Smooth => {
            let pair = fundamental_pair(system, energy, nodes, sigma)?;
            smooth_coefficients(system, energy, nodes, &pair)?
        }
    };
    let w0 = alpha.sqrt();
    let w0_slope = (alpha * sigma + beta) / w0;
    let phase_offset = 1f64.atan2(-beta);

    // state: [w, w', X/ħ]
    let rhs = |x: f64, y: &[f64; 3]| {
        let w = y[0];
        let inv2 = 1.0 / (w * w);
        [y[1], system.kappa_squared(energy, x) * w + inv2 / w, inv2]
    };
    let guard = |x: f64, y: &[f64; 3]| {
        if !(y[0] > 0.0) || !y.iter().all(|v| v.is_finite()) {
            Err(Error::FamilyDegeneracy(format!("amplitude vanished near x = {x}")))
        } else {
            Ok(())
        }
    };
    let sweep = ode::integrate_checked(&rhs, nodes, [w0, w0_slope, 0.0], &guard)?;

    let amplitude: Vec<f64> = sweep.states.iter().map(|s| s[0]).collect();
    let amplitude_slope: Vec<f64> = sweep.states.iter().map(|s| s[1]).collect();
    let real_action: Vec<f64> = sweep.states.iter().map(|s| hbar * s[2]).collect();
    let real_momentum: Vec<f64> = amplitude.iter().map(|w| hbar / (w * w)).collect();
    let imag_action: Vec<f64> = amplitude.iter().map(|w| -hbar * (w / w0).ln()).collect();
    let imag_momentum: Vec<f64> =
        amplitude.iter().zip(&amplitude_slope).map(|(w, d)| -hbar * d / w).collect();
    let momentum = real_momentum
        .iter()
        .zip(&imag_momentum)
        .map(|(&re, &im)| Complex64::new(re, im))
        .collect();
    Ok(ActionField {
        grid: nodes.to_vec(),
        real_action,
        real_momentum,
        imag_action,
        imag_momentum,
        momentum,
        amplitude,
        amplitude_slope,
        phase_offset,
        member,
        energy,
        hbar,
    })
}

/// Assembled, normalized eigenfunction on the full grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    pub grid: Vec<f64>,
    pub psi: Vec<f64>,
    /// `A` in `ψ = A/√X' · sin(X/ħ + φ0)`.
    pub amplitude: f64,
    pub b_left: f64,
    pub b_right: f64,
    /// `∫ψ²` after normalization (composite Simpson).
    pub norm: f64,
    /// Relative `ψ'` mismatch at `(x_left, x_right)`.
    pub derivative_defect: (f64, f64),
}

fn integrate_square(x: &[f64], psi: &[f64]) -> f64 {
    let sq: Vec<f64> = psi.iter().map(|v| v * v).collect();
    if x.len() % 2 == 1 {
        quad::simpson(x, &sq)
    } else {
        quad::cumulative(x, &sq)[x.len() - 1]
    }
}

fn relative_jump(psi: f64, dpsi: f64, sigma: f64) -> f64 {
    let scale = dpsi.abs() + (sigma * psi).abs();
    if scale == 0.0 {
        0.0
    } else {
        (dpsi - sigma * psi).abs() / scale
    }
}

/// Glues the allowed-region representation to both tails with value
/// continuity, then fixes `A` by normalization. The sign is chosen so that
/// `ψ > 0` in the right tail.
pub fn assemble_wavefunction(
    action: &ActionField,
    left: &ForbiddenBranch,
    right: &ForbiddenBranch,
    grid: &SnappedGrid,
    units: &UnitsConfig,
) -> Result<WaveFunction> {
    let n = grid.x.len();
    if action.grid.len() != grid.right - grid.left + 1
        || left.grid.len() != grid.left + 1
        || right.grid.len() != n - grid.right
    {
        return Err(Error::Argument("branches do not match the grid partition".into()));
    }
    let last = action.grid.len() - 1;
    let psi_l = action.raw_psi(0);
    let psi_r = action.raw_psi(last);

    let defect = |i: usize, sigma: f64| {
        let psi = action.raw_psi(i);
        relative_jump(psi, action.log_derivative(i) * psi, sigma)
    };
    let defect_left = defect(0, left.sigma());
    let defect_right = defect(last, right.sigma());
    for (side, d) in [("left", defect_left), ("right", defect_right)] {
        if !(d <= DERIVATIVE_MISMATCH_TOL) {
            return Err(Error::NotEigenvalue { side, defect: d });
        }
    }

    let hbar = units.hbar;
    let mut psi = vec![0.0; n];
    for (j, y) in left.y.iter().enumerate() {
        psi[grid.left - j] = psi_l * (-y / hbar).exp();
    }
    for i in 0..=last {
        psi[grid.left + i] = action.raw_psi(i);
    }
    for (j, y) in right.y.iter().enumerate() {
        psi[grid.right + j] = psi_r * (-y / hbar).exp();
    }

    let sign = if psi_r < 0.0 { -1.0 } else { 1.0 };
    let scale = sign / integrate_square(&grid.x, &psi).sqrt();
    psi.iter_mut().for_each(|v| *v *= scale);
    let norm = integrate_square(&grid.x, &psi);
    Ok(WaveFunction {
        grid: grid.x.clone(),
        psi,
        amplitude: scale * hbar.sqrt(),
        b_left: scale * psi_l,
        b_right: scale * psi_r,
        norm,
        derivative_defect: (defect_left, defect_right),
    })
}

/// Every piece of a family-method solve on one grid.
#[derive(Debug, Clone)]
pub struct FamilySolution {
    pub grid: SnappedGrid,
    pub left: ForbiddenBranch,
    pub right: ForbiddenBranch,
    pub action: ActionField,
    pub energy: f64,
}

impl FamilySolution {
    pub fn new(system: &System, energy: f64, spec: &GridSpec, member: FamilyMember) -> Result<Self> {
        let tp = system.turning_points(energy)?;
        let (dmin, dmax) = system.domain();
        if spec.x_min < dmin || spec.x_max > dmax {
            return Err(Error::Range { x: if spec.x_min < dmin { spec.x_min } else { spec.x_max }, min: dmin, max: dmax });
        }
        let grid = SnappedGrid::new(spec, &tp)?;
        let left_nodes: Vec<f64> = grid.x[..=grid.left].iter().rev().copied().collect();
        let right_nodes = &grid.x[grid.right..];
        let depth = DepthCriterion::default();
        let left = solve_forbidden(system, energy, Side::Left, &left_nodes, depth)?;
        let right = solve_forbidden(system, energy, Side::Right, right_nodes, depth)?;
        let action = solve_allowed(system, energy, grid.allowed(), &left, Some(&right), member)?;
        Ok(Self { grid, left, right, action, energy })
    }

    pub fn wavefunction(&self, units: &UnitsConfig) -> Result<WaveFunction> {
        assemble_wavefunction(&self.action, &self.left, &self.right, &self.grid, units)
    }
}

/// `X(x_right) − (n+½)πħ` at the analytic eigenenergy of level `n`, using
/// the anchored member.
pub fn quantization_defect(system: &System, n: usize, spec: &GridSpec) -> Result<f64> {
    let energy = system.eigenenergy(n)?.energy;
    quantization_defect_at(system, energy, n, spec)
}

/// [`quantization_defect`] at an arbitrary energy.
pub fn quantization_defect_at(system: &System, energy: f64, n: usize, spec: &GridSpec) -> Result<f64> {
    let sol = FamilySolution::new(system, energy, spec, FamilyMember::Anchored)?;
    Ok(sol.action.total_action() - (n as f64 + 0.5) * PI * system.units.hbar)
}

/// One row of a classical-limit sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub hbar: f64,
    pub n: usize,
    pub energy: f64,
    /// `sup |X' − p_C|` over the interior 80% of the allowed region.
    pub sup_xp_minus_pc: f64,
    /// `sup |Y'|` over the same interior.
    pub sup_yp: f64,
    /// `sup |Y' − (ħ/2) X''/X'|` with `X''` by finite differences.
    pub identity_residual: f64,
    pub phase_offset: f64,
}

/// Level whose energy is nearest `target` (ties go to the lower level).
pub fn nearest_level(system: &System, target: f64) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for n in 0.. {
        let e = match system.eigenenergy(n) {
            Ok(level) => level.energy,
            Err(Error::Unbound { .. }) => break,
            Err(e) => return Err(e),
        };
        let d = (e - target).abs();
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((n, d));
        }
        if e > target {
            break;
        }
    }
    best.map(|(n, _)| n)
        .ok_or_else(|| Error::Argument(format!("no bound level near E = {target}")))
}

/// Nodes with spacing `h` from the turning point outward until the WKB
/// action reaches `depth` (or the model's domain ends).
fn tail_nodes(system: &System, energy: f64, side: Side, x_turn: f64, h: f64, depth: f64) -> Vec<f64> {
    let dir = -side.growth_sign();
    let (dmin, dmax) = system.domain();
    let mut nodes = vec![x_turn];
    let mut action = 0.0;
    let mut prev = 0.0;
    while action < depth + 1.0 && nodes.len() < 200_000 {
        let x = x_turn + dir * h * nodes.len() as f64;
        if x < dmin || x > dmax {
            break;
        }
        let k = system.kappa_squared(energy, x).max(0.0).sqrt();
        action += 0.5 * h * (k + prev);
        prev = k;
        nodes.push(x);
    }
    nodes
}

fn sweep_row(system: &System, target: f64, hbar: f64, count: usize) -> Result<SweepRow> {
    let sys = system.with_hbar(hbar)?;
    let n = nearest_level(&sys, target)?;
    let energy = sys.eigenenergy(n)?.energy;
    let tp = sys.turning_points(energy)?;
    let h = tp.width() / (count - 1) as f64;
    let nodes: Vec<f64> = (0..count)
        .map(|i| if i + 1 == count { tp.x_right } else { tp.x_left + i as f64 * h })
        .collect();
    let left_nodes = tail_nodes(&sys, energy, Side::Left, tp.x_left, h, DEFAULT_WKB_DEPTH);
    let left = solve_forbidden(&sys, energy, Side::Left, &left_nodes, DepthCriterion::default())?;
    let action = solve_allowed(&sys, energy, &nodes, &left, None, FamilyMember::Smooth)?;

    let xpp = quad::derivative(&nodes, &action.real_momentum);
    let span = tp.width();
    let interior = |x: f64| (x - tp.x_left) >= 0.1 * span && (tp.x_right - x) >= 0.1 * span;
    let mut row = SweepRow {
        hbar,
        n,
        energy,
        sup_xp_minus_pc: 0.0,
        sup_yp: 0.0,
        identity_residual: 0.0,
        phase_offset: action.phase_offset,
    };
    for (i, &x) in nodes.iter().enumerate() {
        if !interior(x) {
            continue;
        }
        let pc = classical_momentum(&sys, energy, x).re;
        row.sup_xp_minus_pc = row.sup_xp_minus_pc.max((action.real_momentum[i] - pc).abs());
        row.sup_yp = row.sup_yp.max(action.imag_momentum[i].abs());
        let identity = action.imag_momentum[i] - 0.5 * hbar * xpp[i] / action.real_momentum[i];
        row.identity_residual = row.identity_residual.max(identity.abs());
    }
    Ok(row)
}

/// Tracks `X'` against `p_C` as ħ decreases at (nearly) fixed energy
/// `target`, using the smooth member on `count` allowed-region nodes.
pub fn classical_limit_sweep(
    system: &System,
    target: f64,
    hbar_list: &[f64],
    count: usize,
) -> Result<Vec<SweepRow>> {
    if hbar_list.is_empty() {
        return Err(Error::Argument("empty hbar list".into()));
    }
    if hbar_list.iter().any(|h| !(*h > 0.0)) || hbar_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Argument("hbar list must be positive and strictly decreasing".into()));
    }
    if count < 101 {
        return Err(Error::Argument(format!("sweep grid count {count} below 101")));
    }
    hbar_list.par_iter().map(|&h| sweep_row(system, target, h, count)).collect()
}
