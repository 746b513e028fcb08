use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("step size {h:e} underflowed at t = {t}")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step budget exhausted at t = {t}")]
    MaxSteps { t: f64 },
    #[error("no positive momentum puts ({y}, {p_y}) on the energy level {h}")]
    OutsideShell { h: f64, y: f64, p_y: f64 },
    #[error("orbit left the ball of radius {radius} at t = {t}")]
    Escape { t: f64, radius: f64 },
    #[error("tolerance {0:e} outside [1e-14, 1e-8]")]
    Tolerance(f64),
    #[error("{0}")]
    NoOrbit(String),
    #[error("no event found before t = {0}")]
    NoCrossing(f64),
    #[error(transparent)]
    Core(#[from] halo_core::Error),
}

pub type Result<T> = std::result::Result<T, DynamicsError>;
