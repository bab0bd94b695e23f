use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid parameters at stage {stage}: {reason}")]
    InvalidParameters { stage: usize, reason: String },

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("orbit evaluation failed at n = {n}: {reason}")]
    Orbit { n: u64, reason: String },

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error("degenerate cylinder: {0}")]
    DegenerateCylinder(String),

    #[error(
        "coefficient budget exceeded: {needed} entries > budget {budget}; \
         evaluate the product on a grid instead"
    )]
    Budget { needed: usize, budget: usize },

    #[error("word of length {len} exceeds the materialization cap {cap}")]
    LengthCap { len: String, cap: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short stable tag for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::InvalidParameters { .. } => "invalid-parameters",
            Error::InvalidPlan(_) => "invalid-plan",
            Error::Orbit { .. } => "orbit",
            Error::UndefinedRatio(_) => "undefined-ratio",
            Error::DegenerateCylinder(_) => "degenerate-cylinder",
            Error::Budget { .. } => "budget",
            Error::LengthCap { .. } => "length-cap",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
