use thiserror::Error;

use crate::config::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration:\n{0}")]
    InvalidConfig(ValidationReport),

    #[error("cannot parse configuration: {0}")]
    Parse(String),

    #[error("incompatible letters: word ends in factor {factor} and the appended word starts in the same factor")]
    IncompatibleLetters { factor: u8 },

    #[error("operation is undefined on the empty word")]
    EmptyWord,

    #[error("vertex {vertex} of factor {factor} is unreachable from the root")]
    UnreachableVertex { factor: u8, vertex: String },

    #[error("unknown vertex `{name}` in factor {factor}")]
    UnknownVertex { factor: u8, name: String },

    #[error("composition needs an inner series with zero constant term")]
    ComposeNeedsZeroConstant,

    #[error("series order {requested} exceeds the configured cap {cap}")]
    OrderTooLarge { requested: usize, cap: usize },

    #[error("singular resolvent solve for factor {factor} at t = {t}")]
    SingularSolve { factor: u8, t: f64 },

    #[error("fixed point did not converge at z = {z} after {iterations} iterations")]
    NoConvergence { z: f64, iterations: usize },

    #[error("nonpositive L value {value} for factor {factor}, vertex {vertex}")]
    NonpositiveL { factor: u8, vertex: usize, value: f64 },

    #[error("trajectory has no confirmed exit time")]
    NoConfirmedExit,

    #[error("estimator pool is empty or too small")]
    EmptyPool,

    #[error("not enough blocks: needed {needed}, found {found}")]
    InsufficientBlocks { needed: usize, found: usize },

    #[error("sample is constant")]
    DegenerateSample,

    #[error("need at least {needed} samples, got {found}")]
    InsufficientSamples { needed: usize, found: usize },

    #[error("the entropy statistic requires an epsilon0 uniformity floor")]
    MissingEpsilon0,

    #[error("grid point {index} is not a valid configuration: {reason}")]
    InvalidGridPoint { index: usize, reason: String },

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Exit-code families used by the command-line front end.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorFamily {
    Io,
    Validation,
    Numeric,
    Statistical,
}

impl ErrorFamily {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorFamily::Io => 1,
            ErrorFamily::Validation => 3,
            ErrorFamily::Numeric => 4,
            ErrorFamily::Statistical => 5,
        }
    }
}

impl Error {
    pub fn family(&self) -> ErrorFamily {
        use Error::*;
        match self {
            Io(_) => ErrorFamily::Io,
            InvalidConfig(_) | Parse(_) | Json(_) | UnknownVertex { .. } | InvalidGridPoint { .. }
            | MissingEpsilon0 | IncompatibleLetters { .. } | EmptyWord
            | UnreachableVertex { .. } | InvalidTrajectory(_) | OrderTooLarge { .. } => {
                ErrorFamily::Validation
            }
            SingularSolve { .. } | NoConvergence { .. } | NonpositiveL { .. }
            | ComposeNeedsZeroConstant => ErrorFamily::Numeric,
            NoConfirmedExit | EmptyPool | InsufficientBlocks { .. } | DegenerateSample
            | InsufficientSamples { .. } | Invariant(_) => ErrorFamily::Statistical,
        }
    }
}
