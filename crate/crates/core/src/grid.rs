use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::potentials::TurningPoints;

/// `x_min:x_max:count` grid description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, count: usize) -> Result<Self> {
        if !(x_min < x_max) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::Argument(format!("grid needs x_min < x_max, got {x_min}:{x_max}")));
        }
        if count < 5 {
            return Err(Error::Argument(format!("grid count {count} too small")));
        }
        Ok(Self { x_min, x_max, count })
    }

    pub fn step(&self) -> f64 {
        (self.x_max - self.x_min) / (self.count - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.x_max } else { self.x_min + i as f64 * h })
            .collect()
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(Error::Parse(format!("grid '{s}' is not of the form a:b:N")));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("grid '{s}': {e}")));
        let count = n
            .trim()
            .parse::<usize>()
            .map_err(|e| Error::Parse(format!("grid '{s}': {e}")))?;
        Self::new(num(a)?, num(b)?, count)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.x_min, self.x_max, self.count)
    }
}

/// Uniform grid with the nodes nearest the turning points moved onto them.
#[derive(Debug, Clone, PartialEq)]
pub struct SnappedGrid {
    pub x: Vec<f64>,
    pub left: usize,
    pub right: usize,
}

impl SnappedGrid {
    pub fn new(spec: &GridSpec, tp: &TurningPoints) -> Result<Self> {
        if !(spec.x_min < tp.x_left && tp.x_right < spec.x_max) {
            return Err(Error::Domain(format!(
                "grid {spec} does not bracket the turning points ({}, {})",
                tp.x_left, tp.x_right
            )));
        }
        let mut x = spec.points();
        let h = spec.step();
        let nearest = |t: f64| ((t - spec.x_min) / h).round() as usize;
        let left = nearest(tp.x_left).clamp(1, spec.count - 2);
        let right = nearest(tp.x_right).clamp(1, spec.count - 2);
        if right < left + 4 {
            return Err(Error::Domain(format!(
                "grid {spec} resolves the allowed region with fewer than 4 cells"
            )));
        }
        x[left] = tp.x_left;
        x[right] = tp.x_right;
        Ok(Self { x, left, right })
    }

    pub fn allowed(&self) -> &[f64] {
        &self.x[self.left..=self.right]
    }
}
