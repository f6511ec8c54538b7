//! Bound-state wave functions from the quantum Hamilton-Jacobi equation.
//!
//! Two routes are provided. [`milne`] builds the smooth complex action
//! `W = X + iY` of a phase-amplitude family member and assembles `ψ` from it;
//! [`polar`] integrates the quantum momentum function `p = (ħ/i) ψ'/ψ`, which
//! has a first-order pole at every node. [`oracle`] and the closed forms in
//! [`potentials`] are the independent ground truth.

pub mod classical;
pub mod cli;
pub mod error;
pub mod grid;
pub mod milne;
pub mod ode;
pub mod oracle;
pub mod polar;
pub mod potentials;
pub mod quad;
mod svg;

pub use error::{Error, Result};
pub use grid::{GridSpec, SnappedGrid};
pub use potentials::{AnalyticState, EnergyLevel, PotentialModel, System, TurningPoints, UnitsConfig};
