use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("graph has no edges to sample from")]
    EdgelessGraph,
    #[error("node {node} has no non-neighbor to use as a negative sample")]
    NoNonNeighbor { node: usize },
    #[error("node {node} out of range for {count} nodes")]
    NodeOutOfRange { node: usize, count: usize },
    #[error("column `{0}` not found")]
    MissingColumn(String),
    #[error("column `{column}` has length {found}, expected {expected}")]
    ColumnLength {
        column: String,
        expected: usize,
        found: usize,
    },
    #[error("column `{column}` has {count} missing values")]
    MissingValues { column: String, count: usize },
    #[error("column `{column}` has {found} levels but {expected} propensity levels were configured")]
    LevelMismatch {
        column: String,
        expected: usize,
        found: usize,
    },
    #[error("{0}")]
    Data(String),
    #[error("value {value} at index {index} is outside the open unit interval")]
    Domain { index: usize, value: f64 },
    #[error("propensity {value} of node {node} is not strictly inside (0, 1); clip first")]
    UnclippedPropensity { node: usize, value: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("training diverged at step {step} ({phase})")]
    Diverged { phase: &'static str, step: usize },
    #[error("fold {fold}: {source}")]
    Fold { fold: usize, source: Box<Error> },
    #[error("empty input: {0}")]
    Empty(&'static str),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) | Error::LevelMismatch { .. } | Error::MissingColumn(_) => {
                ErrorKind::Config
            }
            Error::EmptyGraph
            | Error::EdgelessGraph
            | Error::NoNonNeighbor { .. }
            | Error::NodeOutOfRange { .. }
            | Error::ColumnLength { .. }
            | Error::MissingValues { .. }
            | Error::Data(_)
            | Error::Empty(_) => ErrorKind::Data,
            Error::Domain { .. }
            | Error::UnclippedPropensity { .. }
            | Error::NonFinite(_)
            | Error::Diverged { .. } => ErrorKind::Numeric,
            Error::Fold { source, .. } => source.kind(),
        }
    }

    pub(crate) fn in_fold(self, fold: usize) -> Error {
        Error::Fold {
            fold,
            source: Box::new(self),
        }
    }
}
