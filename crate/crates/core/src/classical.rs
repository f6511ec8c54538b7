//! Classical momentum `p_C` and the classical characteristic function `W0`,
//! the ħ→0 baseline for the quantum action.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potentials::System;
use crate::quad::GaussLegendre;

/// `p_C` and `W0` sampled on the classically allowed region.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalField {
    pub grid: Vec<f64>,
    pub p_c: Vec<f64>,
    pub w0: Vec<f64>,
}

/// `√(2m(E−V))` in the allowed region, `i√(2m(V−E))` where forbidden.
pub fn classical_momentum(system: &System, energy: f64, x: f64) -> Complex64 {
    let d = 2.0 * system.units.mass * (energy - system.potential(x));
    if d >= 0.0 {
        Complex64::new(d.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-d).sqrt())
    }
}

fn real_momentum(system: &System, energy: f64, x: f64) -> f64 {
    (2.0 * system.units.mass * (energy - system.potential(x))).max(0.0).sqrt()
}

/// `W0(x) = ∫_{x_left}^{x} p_C dx` on `grid`, which must lie inside the
/// allowed region.
///
/// Near each turning point the substitution `x = x_t ∓ u²` turns the
/// square-root zero of `p_C` into a smooth integrand.
pub fn classical_action(system: &System, energy: f64, grid: &[f64]) -> Result<ClassicalField> {
    let tp = system.turning_points(energy)?;
    let (xl, xr) = (tp.x_left, tp.x_right);
    let slack = 1e-9 * tp.width().max(1.0);
    if let Some(&bad) = grid.iter().find(|&&x| x < xl - slack || x > xr + slack) {
        return Err(Error::Domain(format!(
            "x = {bad} outside the allowed region [{xl}, {xr}]"
        )));
    }
    let gl = GaussLegendre::new(20);
    let p = |x: f64| real_momentum(system, energy, x);
    let from_left = |x: f64| {
        let umax = (x - xl).max(0.0).sqrt();
        gl.integrate(|u| 2.0 * u * p(xl + u * u), 0.0, umax, 4)
    };
    let to_right = |x: f64| {
        let umax = (xr - x).max(0.0).sqrt();
        gl.integrate(|u| 2.0 * u * p(xr - u * u), 0.0, umax, 4)
    };
    let xm = 0.5 * (xl + xr);
    let total = from_left(xm) + to_right(xm);
    let w0 = grid
        .iter()
        .map(|&x| if x <= xm { from_left(x) } else { total - to_right(x) })
        .collect();
    let p_c = grid.iter().map(|&x| p(x)).collect();
    Ok(ClassicalField { grid: grid.to_vec(), p_c, w0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn momentum_examples() {
        let h = System::harmonic_default();
        assert_abs_diff_eq!(classical_momentum(&h, 2.5, 0.0).re, 5f64.sqrt(), epsilon = 1e-15);
        assert!(classical_momentum(&h, 2.5, 5f64.sqrt()).norm() < 1e-7);
        let p = classical_momentum(&h, 2.5, 3.0);
        assert_eq!(p.re, 0.0);
        assert_abs_diff_eq!(p.im, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn harmonic_action_integrals() {
        let h = System::harmonic_default();
        let x = 5f64.sqrt();
        let f = classical_action(&h, 2.5, &[-x, 0.0, x]).unwrap();
        assert_eq!(f.w0[0], 0.0);
        assert_abs_diff_eq!(f.w0[1], 1.25 * PI, epsilon = 1e-10);
        assert_abs_diff_eq!(f.w0[2], 2.5 * PI, epsilon = 1e-10);
        assert!(classical_action(&h, 2.5, &[0.0, 3.0]).is_err());
    }

    #[test]
    fn quantized_harmonic_action_is_n_plus_half_pi_hbar() {
        for hbar in [1.0, 0.3] {
            let h = System::harmonic_default().with_hbar(hbar).unwrap();
            for n in 0..6 {
                let e = h.eigenenergy(n).unwrap().energy;
                let tp = h.turning_points(e).unwrap();
                let f = classical_action(&h, e, &[tp.x_left, tp.x_right]).unwrap();
                assert_abs_diff_eq!(f.w0[1] - f.w0[0], (n as f64 + 0.5) * PI * hbar, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn action_derivative_is_momentum_and_action_monotone() {
        let m = System::morse_default();
        let e = m.eigenenergy(2).unwrap().energy;
        let tp = m.turning_points(e).unwrap();
        let grid: Vec<f64> =
            (0..=400).map(|i| tp.x_left + tp.width() * i as f64 / 400.0).collect();
        let f = classical_action(&m, e, &grid).unwrap();
        assert!(f.w0.windows(2).all(|w| w[1] >= w[0]));
        assert!(f.p_c.iter().all(|&p| p >= 0.0));
        let d = quad::derivative(&f.grid, &f.w0);
        for i in 40..360 {
            assert!((d[i] - f.p_c[i]).abs() <= 1e-6 * f.p_c[i], "i={i}");
        }
    }
}
