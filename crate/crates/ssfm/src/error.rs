//! Simulation-layer errors.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    BadRolloff(f64),
    /// The WDM comb does not fit inside the sampling bandwidth.
    SpectralOverflow {
        needed_ghz: f64,
        have_ghz: f64,
    },
    StepTooLarge {
        step_m: f64,
        span_m: f64,
    },
    LengthMismatch {
        expected: usize,
        got: usize,
    },
    BadConfig(String),
    Core(gs4d_core::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::BadRolloff(r) => write!(f, "rolloff must be in (0, 1), got {r}"),
            Error::SpectralOverflow { needed_ghz, have_ghz } => write!(
                f,
                "WDM comb needs {needed_ghz} GHz of bandwidth but the grid has {have_ghz} GHz"
            ),
            Error::StepTooLarge { step_m, span_m } => {
                write!(f, "step {step_m} m exceeds span length {span_m} m")
            }
            Error::LengthMismatch { expected, got } => {
                write!(f, "length mismatch: expected {expected}, got {got}")
            }
            Error::BadConfig(msg) => write!(f, "bad simulation config: {msg}"),
            Error::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<gs4d_core::Error> for Error {
    fn from(e: gs4d_core::Error) -> Self {
        Error::Core(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
