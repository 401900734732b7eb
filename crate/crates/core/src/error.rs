use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    // dataset
    #[error("target column `{0}` not found in header")]
    MissingTargetColumn(String),
    #[error("non-numeric cell at data row {row}, column `{column}`: {value:?}")]
    NonNumericCell { row: usize, column: String, value: String },
    #[error("dataset has no labeled rows")]
    EmptyDataset,
    #[error("dataset is already standardized")]
    AlreadyStandardized,
    #[error("feature column {0} has no observed values")]
    AllMissingColumn(usize),
    #[error("missing-value injection requires a dataset without missing cells ({0} present)")]
    NonEmptyMask(usize),
    #[error("missing rate {0} outside [0, 1]")]
    InvalidRate(f64),
    #[error("cannot split {samples} samples into {folds} folds")]
    TooFewSamples { samples: usize, folds: usize },
    #[error("dataset is not ready for graph construction: {0}")]
    NotPrepared(&'static str),
    #[error("malformed fold plan at line {line}: {message}")]
    MalformedFoldPlan { line: usize, message: String },

    // graph
    #[error("node index {index} out of range for graph with {len} nodes")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("malformed file at line {line}, column {column}: {message}")]
    MalformedFile {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    // construction
    #[error("row {0} has zero norm; cosine similarity is undefined")]
    ZeroNormRow(usize),
    #[error("requested {neighbors} neighbors but only {samples} samples")]
    NTooLarge { neighbors: usize, samples: usize },
    #[error("clustering is empty or does not cover every sample: {0}")]
    EmptyClustering(String),

    // clustering
    #[error("core distance k = {k} requires at least {} samples, got {samples}", k + 1)]
    KTooLarge { k: usize, samples: usize },
    #[error("invalid cluster configuration: {0}")]
    InvalidClusterConfig(String),

    // neural
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty vector")]
    EmptyVector,
    #[error("hyperparameter out of range: {0}")]
    InvalidHyperparameter(String),
    #[error("training mask selects no nodes (or no test nodes remain)")]
    EmptyMask,

    // pipeline
    #[error("regularized normal system is singular")]
    DegenerateDesign,
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(err: &serde_json::Error) -> Self {
        Error::MalformedFile {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}
