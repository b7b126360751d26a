use thiserror::Error;

/// Crate-wide error type. Variants are grouped by the stage that raises them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate path: {0}")]
    DegeneratePath(String),
    #[error("path too short: needed {needed} points, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("index out of range: {0}")]
    IndexError(String),
    #[error("control action start heading does not match vertex heading")]
    HeadingMismatch,
    #[error("spiral solver did not converge")]
    NoConvergence,
    #[error("spiral curvature exceeds bound")]
    CurvatureExceeded,
    #[error("control set is empty")]
    EmptySet,
    #[error("no straight action available for heading index {0}")]
    MissingStraight(usize),
    #[error("paths have mismatched point counts: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("greedy walk is stuck: no applicable action at heading index {0}")]
    Stuck(usize),
    #[error("no lattice path reaches the end of the demonstration within the bound")]
    NoPath,
    #[error("exhaustive search exceeded the node budget")]
    Explosion,
    #[error("no goal vertices inside the goal region")]
    EmptyGoal,
    #[error("no collision-free plan reaches the goal region")]
    NoPlan,
    #[error("missing header path_id,x,y")]
    MissingHeader,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}: {1}")]
    File(String, std::io::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for the CLI: user-facing problems map to 1,
    /// unexpected runtime failures to 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Json(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
