use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid initial data: {0}")]
    InvalidInitialData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid density: e0 = {e0} >= 1 gives non-positive background density")]
    InvalidDensity { e0: f64 },

    #[error("stiffness: step size underflowed below {min_step} at t = {t} without a blow-up threshold crossing")]
    Stiffness { t: f64, min_step: f64 },

    #[error("numerical breakdown (NaN/Inf) at t = {t}")]
    NumericalBreakdown { t: f64 },

    #[error("density breakdown: n <= 0 at t = {t} with pressure or exotic viscosity active")]
    DensityBreakdown { t: f64 },

    #[error("run too short: needs data up to t = {needed}, have {have}")]
    RunTooShort { needed: f64, have: f64 },

    #[error("inconclusive refinement study: {0}")]
    Inconclusive(String),

    #[error("empty estimate: all particle mass outside the grid")]
    EmptyEstimate,

    #[error("grid mismatch between moment fields")]
    GridMismatch,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
