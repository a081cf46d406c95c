use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("feature index {index} out of range for vector of length {len}")]
    FeatureOutOfRange { index: usize, len: usize },

    #[error("invalid model bundle: {0}")]
    InvalidBundle(String),

    #[error("unsupported bundle format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("flow key mismatch: packet does not belong to this flow")]
    FlowKeyMismatch,

    #[error("flow already triggered")]
    AlreadyTriggered,

    #[error("buffer holds {have} packets, {need} required")]
    ShortBuffer { have: usize, need: usize },

    #[error("chain header: {0}")]
    Header(String),

    #[error("duplicate result for weak learner {0}")]
    DuplicateResult(u16),

    #[error("chain incomplete: missing results for weak learners {0:?}")]
    IncompleteChain(Vec<u16>),

    #[error("unknown node {0}")]
    UnknownNode(String),

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("enumeration guard exceeded: {0} placements (limit {1})")]
    GuardExceeded(u128, u128),

    #[error("unknown strategy {0:?}; registered: {1}")]
    UnknownStrategy(String, String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
