use num_complex::Complex64;
use thiserror::Error;

use crate::model::Regime;
use crate::specfun::SpecfunError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("operation requires the {expected:?} regime, parameters are {actual:?}")]
    WrongRegime { expected: Regime, actual: Regime },
    #[error("energy {0} is too close to a pole of r(E)")]
    PoleProximity(Complex64),
    #[error("{0}")]
    NonConvergence(String),
    #[error("phase refinement budget exhausted on [{lo}, {hi}]")]
    RefinementBudget { lo: f64, hi: f64 },
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
