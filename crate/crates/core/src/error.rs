use std::fmt;

/// Errors produced by constellation construction, metric evaluation, the
/// link model and the shaping optimizer.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Every point of the constellation is the origin; no power scaling exists.
    AllZeroConstellation,
    /// An orthant seed point has a coordinate that is exactly zero, so sign
    /// reflection would duplicate points.
    SeedOnAxis { point: usize, dim: usize },
    /// Catalog format name not recognized.
    UnknownFormat(String),
    /// A format parameter is out of its valid range.
    BadParam(String),
    /// Constellation file could not be parsed.
    ParseError { row: usize, msg: String },
    /// Row has the wrong number of coordinates for the declared dimension.
    DimensionMismatch { row: usize, expected: usize, got: usize },
    /// Two rows carry the same label.
    DuplicateLabel { label: u32 },
    /// Operation requires a 4D constellation.
    WrongDimension { expected: usize, got: usize },
    /// Quadrature order outside the supported range.
    BadOrder(usize),
    /// GMI evaluation supports N in {2, 4} only.
    DimensionUnsupported(usize),
    /// Noise standard deviation must be strictly positive.
    NonPositiveNoise,
    /// Monte Carlo GMI needs at least 10^4 samples.
    TooFewSamples { got: usize, min: usize },
    /// Target GMI is not bracketed by the SNR search interval.
    TargetOutOfRange { target: f64 },
    /// Optimizer constraint cannot be satisfied for the requested size.
    InfeasibleConstraint(String),
    /// The link model failed to produce a finite operating point.
    ModelDivergence(String),
    /// The NLI coefficient evaluated to a non-positive value.
    NonPositiveEta { eta: f64 },
    /// The GMI threshold is not attainable even at a single span.
    UnreachableAtOneSpan { gmi_at_one_span: f64, target: f64 },
    /// Surrogate fit is rank-deficient (too few or degenerate formats).
    DegenerateFit(String),
    /// A config file key is missing or malformed.
    BadConfig(String),
    /// A link or simulation parameter violates its invariant.
    BadLink(String),
    /// File I/O failure wrapped with the offending path.
    Io { path: String, msg: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::AllZeroConstellation => {
                write!(f, "all constellation points are at the origin")
            }
            Error::SeedOnAxis { point, dim } => write!(
                f,
                "orthant seed point {point} has a zero coordinate in dimension {dim}"
            ),
            Error::UnknownFormat(name) => write!(f, "unknown format '{name}'"),
            Error::BadParam(msg) => write!(f, "bad format parameter: {msg}"),
            Error::ParseError { row, msg } => write!(f, "parse error at row {row}: {msg}"),
            Error::DimensionMismatch { row, expected, got } => write!(
                f,
                "row {row}: expected {expected} coordinates, got {got}"
            ),
            Error::DuplicateLabel { label } => write!(f, "duplicate label {label}"),
            Error::WrongDimension { expected, got } => {
                write!(f, "operation requires N={expected}, constellation has N={got}")
            }
            Error::BadOrder(j) => write!(f, "quadrature order {j} outside [2, 64]"),
            Error::DimensionUnsupported(n) => {
                write!(f, "GMI evaluation supports N in {{2, 4}}, got N={n}")
            }
            Error::NonPositiveNoise => write!(f, "noise standard deviation must be > 0"),
            Error::TooFewSamples { got, min } => {
                write!(f, "Monte Carlo needs at least {min} samples, got {got}")
            }
            Error::TargetOutOfRange { target } => {
                write!(f, "target GMI {target} not bracketed in [-20, 40] dB")
            }
            Error::InfeasibleConstraint(msg) => write!(f, "infeasible constraint: {msg}"),
            Error::ModelDivergence(msg) => write!(f, "link model diverged: {msg}"),
            Error::NonPositiveEta { eta } => {
                write!(f, "NLI coefficient must be positive, got {eta}")
            }
            Error::UnreachableAtOneSpan { gmi_at_one_span, target } => write!(
                f,
                "GMI {gmi_at_one_span} at one span already below target {target}"
            ),
            Error::DegenerateFit(msg) => write!(f, "degenerate surrogate fit: {msg}"),
            Error::BadConfig(msg) => write!(f, "bad config: {msg}"),
            Error::BadLink(msg) => write!(f, "bad link parameters: {msg}"),
            Error::Io { path, msg } => write!(f, "{path}: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
