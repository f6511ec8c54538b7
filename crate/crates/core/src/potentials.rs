//! Potential models, analytic spectra, turning points and closed-form
//! eigenfunctions used as ground truth.
//!
//! Both analytic wells are shifted so the minimum sits at `V(0) = 0`:
//!
//! ```text
//! harmonic  V(x) = m ω² x² / 2
//! Morse     V(x) = D (1 - exp(-a x))²
//! ```
//!
//! Tabulated wells are interpolated with a natural cubic spline.

use std::path::Path;

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;

/// Reduced Planck constant and particle mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitsConfig {
    pub hbar: f64,
    pub mass: f64,
}

impl UnitsConfig {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::Argument(format!("hbar must be positive, got {hbar}")));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Argument(format!("mass must be positive, got {mass}")));
        }
        Ok(Self { hbar, mass })
    }
}

impl Default for UnitsConfig {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0 }
    }
}

/// Natural cubic spline through `(x, V)` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPotential {
    x: Vec<f64>,
    v: Vec<f64>,
    // second derivatives at the knots
    m: Vec<f64>,
}

impl TabulatedPotential {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 3 {
            return Err(Error::Argument(format!(
                "tabulated potential needs at least 3 points, got {}",
                samples.len()
            )));
        }
        let (x, v): (Vec<f64>, Vec<f64>) = samples.into_iter().unzip();
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Argument("tabulated x samples must be strictly increasing".into()));
        }
        if v.iter().chain(&x).any(|s| !s.is_finite()) {
            return Err(Error::Argument("tabulated samples must be finite".into()));
        }
        let m = natural_spline_curvatures(&x, &v);
        Ok(Self { x, v, m })
    }

    /// Parses two-column `x V` text; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut samples = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split_whitespace();
            let (Some(a), Some(b), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(Error::Parse(format!("line {}: expected two columns", lineno + 1)));
            };
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            samples.push((parse(a)?, parse(b)?));
        }
        Self::new(samples)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn segment(&self, x: f64) -> usize {
        self.x.partition_point(|&k| k <= x).clamp(1, self.x.len() - 1) - 1
    }

    fn value(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - x) / h;
        let b = (x - self.x[i]) / h;
        a * self.v[i]
            + b * self.v[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    fn derivative(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - x) / h;
        let b = (x - self.x[i]) / h;
        (self.v[i + 1] - self.v[i]) / h
            - (3.0 * a * a - 1.0) / 6.0 * h * self.m[i]
            + (3.0 * b * b - 1.0) / 6.0 * h * self.m[i + 1]
    }
}

fn natural_spline_curvatures(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    // Thomas algorithm on the interior knots.
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        let rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
        let diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
        c[i] = h1 / diag;
        d[i] = (rhs - h0 * d[i - 1]) / diag;
    }
    for i in (1..n - 1).rev() {
        m[i] = d[i] - c[i] * m[i + 1];
    }
    m
}

/// Shape of the confining potential.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialModel {
    Harmonic { omega: f64 },
    Morse { depth: f64, range: f64 },
    Tabulated(TabulatedPotential),
}

impl PotentialModel {
    pub fn harmonic(omega: f64) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::Argument(format!("omega must be positive, got {omega}")));
        }
        Ok(Self::Harmonic { omega })
    }

    pub fn morse(depth: f64, range: f64) -> Result<Self> {
        if !(depth > 0.0 && range > 0.0) {
            return Err(Error::Argument(format!(
                "Morse depth and range must be positive, got D={depth}, a={range}"
            )));
        }
        Ok(Self::Morse { depth, range })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Harmonic { .. } => "harmonic",
            Self::Morse { .. } => "morse",
            Self::Tabulated(_) => "tabulated",
        }
    }
}

/// A potential together with the unit system it is solved in.
#[derive(Debug, Clone, PartialEq)]
pub struct System {
    pub model: PotentialModel,
    pub units: UnitsConfig,
}

impl System {
    pub fn new(model: PotentialModel, units: UnitsConfig) -> Self {
        Self { model, units }
    }

    pub fn harmonic_default() -> Self {
        Self::new(PotentialModel::Harmonic { omega: 1.0 }, UnitsConfig::default())
    }

    pub fn morse_default() -> Self {
        Self::new(PotentialModel::Morse { depth: 10.0, range: 1.0 }, UnitsConfig::default())
    }

    pub fn with_hbar(&self, hbar: f64) -> Result<Self> {
        Ok(Self::new(self.model.clone(), UnitsConfig::new(hbar, self.units.mass)?))
    }

    /// `V(x)`; tabulated models reject points outside the sampled range.
    pub fn eval_potential(&self, x: f64) -> Result<f64> {
        self.check_range(x)?;
        Ok(self.potential(x))
    }

    /// `dV/dx`, analytic or from the spline.
    pub fn eval_potential_derivative(&self, x: f64) -> Result<f64> {
        self.check_range(x)?;
        Ok(self.potential_derivative(x))
    }

    fn check_range(&self, x: f64) -> Result<()> {
        if let PotentialModel::Tabulated(t) = &self.model {
            let (min, max) = t.range();
            if !(x >= min && x <= max) {
                return Err(Error::Range { x, min, max });
            }
        }
        Ok(())
    }

    /// Unchecked potential; tabulated models extrapolate the end cubic.
    pub(crate) fn potential(&self, x: f64) -> f64 {
        match &self.model {
            PotentialModel::Harmonic { omega } => 0.5 * self.units.mass * omega * omega * x * x,
            PotentialModel::Morse { depth, range } => {
                let q = 1.0 - (-range * x).exp();
                depth * q * q
            }
            PotentialModel::Tabulated(t) => t.value(x),
        }
    }

    pub(crate) fn potential_derivative(&self, x: f64) -> f64 {
        match &self.model {
            PotentialModel::Harmonic { omega } => self.units.mass * omega * omega * x,
            PotentialModel::Morse { depth, range } => {
                let e = (-range * x).exp();
                2.0 * depth * range * e * (1.0 - e)
            }
            PotentialModel::Tabulated(t) => t.derivative(x),
        }
    }

    /// `2m (V(x) - E) / ħ²`: positive in forbidden regions.
    pub(crate) fn kappa_squared(&self, energy: f64, x: f64) -> f64 {
        let UnitsConfig { hbar, mass } = self.units;
        2.0 * mass * (self.potential(x) - energy) / (hbar * hbar)
    }

    /// Domain on which the model is defined.
    pub fn domain(&self) -> (f64, f64) {
        match &self.model {
            PotentialModel::Tabulated(t) => t.range(),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    fn morse_lambda(&self) -> Option<f64> {
        match self.model {
            PotentialModel::Morse { depth, range } => {
                Some((2.0 * self.units.mass * depth).sqrt() / (range * self.units.hbar))
            }
            _ => None,
        }
    }

    /// Number of bound states; `None` when the spectrum is unbounded above.
    pub fn bound_state_count(&self) -> Option<usize> {
        self.morse_lambda().map(|lambda| (lambda - 0.5).ceil().max(0.0) as usize)
    }

    pub fn eigenenergy(&self, n: usize) -> Result<EnergyLevel> {
        let UnitsConfig { hbar, mass } = self.units;
        let q = n as f64 + 0.5;
        let energy = match self.model {
            PotentialModel::Harmonic { omega } => hbar * omega * q,
            PotentialModel::Morse { depth, range } => {
                let count = self.bound_state_count().unwrap_or(0);
                if n >= count {
                    return Err(Error::Unbound { n, count });
                }
                hbar * range * (2.0 * depth / mass).sqrt() * q
                    - (hbar * range * q).powi(2) / (2.0 * mass)
            }
            PotentialModel::Tabulated(_) => return Err(Error::Unsupported("analytic eigenenergy")),
        };
        Ok(EnergyLevel { n, energy })
    }

    pub fn turning_points(&self, energy: f64) -> Result<TurningPoints> {
        let mass = self.units.mass;
        match &self.model {
            PotentialModel::Harmonic { omega } => {
                if !(energy > 0.0) {
                    return Err(Error::Domain(format!("no allowed region at E = {energy}")));
                }
                let x = (2.0 * energy / (mass * omega * omega)).sqrt();
                Ok(TurningPoints { x_left: -x, x_right: x })
            }
            PotentialModel::Morse { depth, range } => {
                if !(energy > 0.0 && energy < *depth) {
                    return Err(Error::Domain(format!(
                        "E = {energy} outside the bound window (0, {depth})"
                    )));
                }
                let r = (energy / depth).sqrt();
                Ok(TurningPoints {
                    x_left: -(1.0 + r).ln() / range,
                    x_right: -(1.0 - r).ln() / range,
                })
            }
            PotentialModel::Tabulated(t) => {
                let imin = t
                    .v
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                if !(energy > t.v[imin]) {
                    return Err(Error::Domain(format!("E = {energy} below the tabulated minimum")));
                }
                let left = (0..imin).rev().find(|&i| t.v[i] >= energy).ok_or_else(|| {
                    Error::Domain("no left turning point inside the table".into())
                })?;
                let right = (imin + 1..t.x.len()).find(|&i| t.v[i] >= energy).ok_or_else(|| {
                    Error::Domain("no right turning point inside the table".into())
                })?;
                let f = |x: f64| t.value(x) - energy;
                Ok(TurningPoints {
                    x_left: bisect(f, t.x[left], t.x[left + 1]),
                    x_right: bisect(f, t.x[right - 1], t.x[right]),
                })
            }
        }
    }
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Quantum number and energy of a bound level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyLevel {
    pub n: usize,
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurningPoints {
    pub x_left: f64,
    pub x_right: f64,
}

impl TurningPoints {
    pub fn width(&self) -> f64 {
        self.x_right - self.x_left
    }
}

/// Normalized closed-form eigenfunction: Hermite functions for the
/// harmonic well, associated Laguerre functions for Morse.
///
/// The sign is fixed so that the state is positive as `x → +∞`.
#[derive(Debug, Clone)]
pub struct AnalyticState {
    system: System,
    pub level: EnergyLevel,
    norm: f64,
}

impl AnalyticState {
    pub fn new(system: &System, n: usize) -> Result<Self> {
        if let PotentialModel::Tabulated(_) = system.model {
            return Err(Error::Unsupported("analytic eigenfunction"));
        }
        let level = system.eigenenergy(n)?;
        let mut state = Self { system: system.clone(), level, norm: 1.0 };
        let (a, b) = state.support();
        let gl = GaussLegendre::new(24);
        let panels = (8.0 * (b - a) * state.wavenumber_scale()).ceil().max(64.0) as usize;
        let integral = gl.integrate(|x| state.raw(x).0.powi(2), a, b, panels);
        state.norm = 1.0 / integral.sqrt();
        Ok(state)
    }

    fn wavenumber_scale(&self) -> f64 {
        let UnitsConfig { hbar, mass } = self.system.units;
        (2.0 * mass * (self.level.energy + 1.0)).sqrt() / hbar
    }

    /// Interval outside which the state is below double precision.
    fn support(&self) -> (f64, f64) {
        let UnitsConfig { hbar, mass } = self.system.units;
        match self.system.model {
            PotentialModel::Harmonic { omega } => {
                let scale = (hbar / (mass * omega)).sqrt();
                let half = ((2 * self.level.n + 1) as f64).sqrt() + 14.0;
                (-half * scale, half * scale)
            }
            PotentialModel::Morse { range, .. } => {
                let lambda = self.system.morse_lambda().unwrap_or(1.0);
                let s = lambda - self.level.n as f64 - 0.5;
                let z_max = 2.0 * lambda + 8.0 * (self.level.n as f64 + 1.0) + 120.0;
                let a = -(z_max / (2.0 * lambda)).ln() / range;
                let b = ((2.0 * lambda).ln() + 40.0 / s) / range;
                (a, b)
            }
            PotentialModel::Tabulated(_) => unreachable!(),
        }
    }

    /// Unnormalized value and x-derivative.
    fn raw(&self, x: f64) -> (f64, f64) {
        let UnitsConfig { hbar, mass } = self.system.units;
        let n = self.level.n;
        match self.system.model {
            PotentialModel::Harmonic { omega } => {
                let k = (mass * omega / hbar).sqrt();
                let xi = k * x;
                let (h, h_prev) = hermite(n, xi);
                let g = (-0.5 * xi * xi).exp();
                let dh = 2.0 * n as f64 * h_prev;
                (h * g, k * (dh - xi * h) * g)
            }
            PotentialModel::Morse { range, .. } => {
                let lambda = self.system.morse_lambda().unwrap_or(1.0);
                let s = lambda - n as f64 - 0.5;
                let alpha = 2.0 * s;
                let z = 2.0 * lambda * (-range * x).exp();
                let env = (s * z.ln() - 0.5 * z).exp();
                let l = laguerre(n, alpha, z);
                let dl = if n == 0 { 0.0 } else { -laguerre(n - 1, alpha + 1.0, z) };
                let value = env * l;
                // dz/dx = -a z
                let deriv = -range * env * ((s - 0.5 * z) * l + z * dl);
                (value, deriv)
            }
            PotentialModel::Tabulated(_) => unreachable!(),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.norm * self.raw(x).0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.norm * self.raw(x).1
    }

    pub fn energy(&self) -> f64 {
        self.level.energy
    }
}

/// Physicists' Hermite polynomials `(H_n(x), H_{n-1}(x))`.
fn hermite(n: usize, x: f64) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Generalized Laguerre polynomial `L_n^{(alpha)}(z)`.
fn laguerre(n: usize, alpha: f64, z: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - z;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - z) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Normalized analytic eigenfunction at a single point.
pub fn analytic_eigenfunction(system: &System, n: usize, x: f64) -> Result<f64> {
    Ok(AnalyticState::new(system, n)?.value(x))
}
