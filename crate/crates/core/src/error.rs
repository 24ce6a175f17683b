use thiserror::Error;

use crate::hilbert::Sign;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index out of range: {0}")]
    IndexRange(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("mixing angle undefined: omega_v == omega_c with g == 0")]
    DegenerateMixing,

    #[error("resonant limit: {0} detuning is zero, closed forms divide by it")]
    ResonantLimit(&'static str),

    #[error("degenerate cat state: branch {sign:?} has vanishing norm")]
    DegenerateCat { sign: Sign },

    #[error("vanishing branch: probability of |{sign:?}> is {probability:e}")]
    VanishingBranch { sign: Sign, probability: f64 },

    #[error("truncation: {0}")]
    Truncation(String),

    #[error("monitor breach at t = {time}: {quantity} = {value:e} exceeds limit {limit:e}")]
    Monitor {
        time: f64,
        quantity: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("positivity lost at t = {time}: smallest eigenvalue below {limit:e}")]
    Positivity { time: f64, limit: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("scenario {scenario}: {source}")]
    Scenario { scenario: String, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Exit code the command-line front end reports for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Validation(_) => 1,
            Error::Scenario { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
