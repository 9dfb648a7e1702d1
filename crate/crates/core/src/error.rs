use thiserror::Error;

/// Crate-wide error type. The CLI maps every variant to a one-line
/// machine-parsable code on stderr.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented precondition or invariant.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Size guard exceeded (n!, coset counts, matrix sizes).
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Structurally valid input outside the supported configuration,
    /// e.g. non-integral slopes for subspace enumeration.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// Malformed textual or JSON input.
    #[error("parse error: {0}")]
    Parse(String),

    /// Degree-rule calibration found no rule or several.
    #[error("calibration failed: {0}")]
    Calibration(String),
}

impl Error {
    /// Short stable code for machine consumption.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Invalid(_) => "EINVALID",
            Error::Capacity(_) => "ECAPACITY",
            Error::Unsupported(_) => "EUNSUPPORTED",
            Error::Parse(_) => "EPARSE",
            Error::Calibration(_) => "ECALIBRATION",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
