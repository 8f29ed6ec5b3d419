use thiserror::Error;

use crate::special_functions::WBranch;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("x = {x} is outside the real domain of the {branch} branch")]
    Domain { branch: WBranch, x: f64 },

    #[error("iteration did not converge: {0}")]
    Convergence(String),

    #[error("singular point: {0}")]
    Singularity(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("step size underflow at t = {t} (stiffness or singularity)")]
    StepUnderflow { t: f64 },

    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },

    #[error("step budget of {0} exhausted")]
    TooManySteps(usize),

    #[error("orbit has no samples")]
    EmptyOrbit,

    #[error("no anchor: {0}")]
    MissingAnchor(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("blow-up guard triggered at t = {time}: max u = {max_u}")]
    BlowUp { time: f64, max_u: f64 },

    #[error("front tracking: {0}")]
    Crossing(String),

    #[error("grid: {0}")]
    Grid(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
