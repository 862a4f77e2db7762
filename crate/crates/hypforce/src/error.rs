use std::fmt;

/// Errors produced by metric construction, deformation, and verification.
#[derive(Debug, Clone)]
pub enum Error {
    /// A scalar argument lies outside the domain of the function it was passed to.
    Domain(String),
    /// Operator parameters violate a structural constraint (e.g. `d >= 4*(1+xi)`).
    Constraint(String),
    /// Mismatched dimensions between objects that must agree.
    Dimension { expected: usize, got: usize },
    /// A metric that must be warped (cut independent of radius) drifts with radius.
    NotWarped { drift: f64 },
    /// A candidate metric tensor is not symmetric positive definite where required.
    InvalidMetric(String),
    /// A geodesic left the atlas domain before reaching its target time.
    GeodesicEscape { time: f64 },
    /// An ODE integration failed an internal accuracy check.
    IntegrationFailure(String),
    /// A normal-coordinate chart could not be constructed at the requested point.
    ChartConstruction(String),
    /// An argument is malformed independent of any numeric domain (e.g. empty list).
    Argument(String),
    /// A documented precondition of an operation does not hold.
    Precondition(String),
    /// A configuration file is missing, malformed, or inconsistent.
    Config(String),
    /// Filesystem failure while reading or writing experiment artifacts.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Constraint(msg) => write!(f, "constraint violated: {msg}"),
            Error::Dimension { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::NotWarped { drift } => {
                write!(f, "metric is not warped: cut drifts by {drift:.3e} across radii")
            }
            Error::InvalidMetric(msg) => write!(f, "invalid metric: {msg}"),
            Error::GeodesicEscape { time } => {
                write!(f, "geodesic left the chart atlas at parameter time {time:.6}")
            }
            Error::IntegrationFailure(msg) => write!(f, "integration failure: {msg}"),
            Error::ChartConstruction(msg) => write!(f, "chart construction failed: {msg}"),
            Error::Argument(msg) => write!(f, "invalid argument: {msg}"),
            Error::Precondition(msg) => write!(f, "precondition not met: {msg}"),
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
