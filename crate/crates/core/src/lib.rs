//! Exact scattering from the two-piece rising exponential potential: reflection
//! amplitudes, Wigner time delays, resonance poles and wavefunctions, with an
//! ODE-integration cross-check.

pub mod checks;
pub mod error;
pub mod model;
pub mod oracle;
pub mod reflection;
pub mod specfun;
pub mod spectral;
pub mod wavefield;

pub use error::{Error, Result};
pub use model::{BranchMode, PotentialParams, Preset, Regime, Wavenumbers};
