use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the inference and evaluation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("missing column `{0}` in input header")]
    MissingColumn(String),
    #[error("individuals have differing series lengths ({id} has {len}, expected {expected})")]
    RaggedLengths {
        id: String,
        len: usize,
        expected: usize,
    },
    #[error("time steps for {id} are not unit-stride increasing at t={t}")]
    NonMonotoneTime { id: String, t: i64 },
    #[error("individuals do not share a common time base ({id} starts at t={t})")]
    MisalignedTime { id: String, t: i64 },
    #[error("non-numeric value `{value}` in column `{column}` (line {line})")]
    NonNumericCoordinate {
        column: String,
        value: String,
        line: u64,
    },
    #[error("dataset needs at least two individuals, found {0}")]
    TooFewIndividuals(usize),
    #[error("duplicate individual id `{0}`")]
    DuplicateId(String),
    #[error("window length {omega} exceeds series length {len}")]
    OmegaExceedsLength { omega: usize, len: usize },
    #[error("invalid window spec: {0}")]
    InvalidWindow(String),
    #[error("empty segment passed to DTW")]
    EmptySegment,
    #[error("segments must have equal length ({0} vs {1})")]
    SegmentLengthMismatch(usize, usize),
    #[error("no leader set reaches the support threshold")]
    NoFrequentStates,
    #[error("state sequence too short to fit transitions (length {0})")]
    SequenceTooShort(usize),
    #[error("empty sample")]
    EmptySample,
    #[error("unknown individual `{0}`")]
    UnknownId(String),
    #[error("matrix is not square ({rows}x{cols})")]
    MatrixNotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric at ({0}, {1})")]
    AsymmetricMatrix(usize, usize),
    #[error("clusters do not partition the node set: {0}")]
    NotAPartition(String),
    #[error("invalid scenario: {0}")]
    InvalidSpec(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed artifact: {0}")]
    Malformed(String),
    #[error("failed to read or write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse grouping used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad parameters or configuration.
    Config,
    /// Missing, unreadable or malformed input.
    Input,
    /// The data was read but the analysis could not complete.
    Compute,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Input => 3,
            ErrorClass::Compute => 4,
        }
    }
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            InvalidWindow(_) | InvalidSpec(_) | InvalidParameter(_) | OmegaExceedsLength { .. } => ErrorClass::Config,
            MissingColumn(_)
            | RaggedLengths { .. }
            | NonMonotoneTime { .. }
            | MisalignedTime { .. }
            | NonNumericCoordinate { .. }
            | TooFewIndividuals(_)
            | DuplicateId(_)
            | UnknownId(_)
            | Malformed(_)
            | Io { .. }
            | Csv(_)
            | Json(_) => ErrorClass::Input,
            EmptySegment
            | SegmentLengthMismatch(..)
            | NoFrequentStates
            | SequenceTooShort(_)
            | EmptySample
            | MatrixNotSquare { .. }
            | AsymmetricMatrix(..)
            | NotAPartition(_) => ErrorClass::Compute,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
