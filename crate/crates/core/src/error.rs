use std::fmt;

use thiserror::Error;

/// Location-tagged failure from the expression front end.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the source.
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    EmptySource,
    UnexpectedChar(char),
    UnexpectedToken { found: String, expected: &'static str },
    InvalidNumber(String),
    UnknownIdentifier(String),
    UnknownFunction(String),
    Arity { function: String, expected: usize, found: usize },
    TooDeep,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::EmptySource => write!(f, "empty expression"),
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::UnexpectedToken { found, expected } => {
                write!(f, "expected {expected}, found {found}")
            }
            ParseErrorKind::InvalidNumber(s) => write!(f, "invalid number literal {s:?}"),
            ParseErrorKind::UnknownIdentifier(s) => write!(f, "unknown identifier {s:?}"),
            ParseErrorKind::UnknownFunction(s) if s == "abs" => {
                write!(f, "function \"abs\" is not supported (not differentiable)")
            }
            ParseErrorKind::UnknownFunction(s) => write!(f, "unknown function {s:?}"),
            ParseErrorKind::Arity { function, expected, found } => {
                write!(f, "{function} takes {expected} argument(s), got {found}")
            }
            ParseErrorKind::TooDeep => write!(f, "expression nested too deeply"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FinslerError {
    #[error("point {point:?} is outside the metric domain")]
    Domain { point: Vec<f64> },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("tangent vector too close to the zero section (|y| = {norm:e}, minimum {tol:e})")]
    ZeroSection { norm: f64, tol: f64 },

    #[error("metric is not strongly convex at this flag: {0}")]
    Convexity(String),

    #[error("metric rejected: {0}")]
    InvalidMetric(String),

    #[error("parse error at {0}")]
    Parse(#[from] ParseError),

    #[error("evaluation error at offset {offset}: {message}")]
    Eval { offset: usize, message: String },

    #[error("trajectory left the metric domain at t = {t} (last point {point:?})")]
    DomainExit { t: f64, point: Vec<f64> },

    #[error("integration quality: relative F-drift {drift:e} exceeds limit {limit:e}")]
    IntegrationQuality { drift: f64, limit: f64 },

    #[error("no geodesic found (best endpoint residual {best_residual:e})")]
    NoGeodesic { best_residual: f64 },
}

impl FinslerError {
    /// True for failures of an iterative or integration procedure rather than
    /// bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            FinslerError::DomainExit { .. }
                | FinslerError::IntegrationQuality { .. }
                | FinslerError::NoGeodesic { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, FinslerError>;
