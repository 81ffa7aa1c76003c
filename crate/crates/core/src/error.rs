//! Error types for the screening pipeline.

use thiserror::Error;

use crate::data::Label;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("PHQ-4 item {index} out of range: {value} (expected 0..=3)")]
    ItemOutOfRange { index: usize, value: u8 },
    #[error("PHQ-4 total out of range: {total} (expected 0..=12)")]
    TotalOutOfRange { total: u8 },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing required field {field:?} at line {line}")]
    MissingField { line: usize, field: &'static str },
    #[error("duplicate sample_id {sample_id:?}")]
    DuplicateSampleId { sample_id: String },
    #[error("sample {sample_id:?}: stored label {stored} disagrees with computed label {computed}")]
    LabelMismatch {
        sample_id: String,
        stored: Label,
        computed: Label,
    },
    #[error("sample {sample_id:?} has empty subject_id")]
    EmptySubjectId { sample_id: String },
    #[error("sample {sample_id:?} has neither description nor image_path")]
    MissingContent { sample_id: String },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("text tokenizes to zero tokens")]
    EmptyText,
    #[error("hashed vector has zero norm; cannot normalize")]
    ZeroNorm,
    #[error("embedding for sample {sample_id:?} has {got} components, expected {expected}")]
    DimensionMismatch {
        sample_id: String,
        got: usize,
        expected: usize,
    },
    #[error("no precomputed embedding for sample {sample_id:?}")]
    MissingEmbedding { sample_id: String },
    #[error("duplicate embedding for sample {sample_id:?}")]
    DuplicateSampleId { sample_id: String },
    #[error("embedding component is not finite for sample {sample_id:?}")]
    NonFinite { sample_id: String },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("remote embedding provider failed: {0}")]
    Remote(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum FfnnError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite value encountered during {stage}")]
    NonFinite { stage: &'static str },
    #[error("training data is degenerate: {0}")]
    DegenerateData(String),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("model file error: {0}")]
    ModelFile(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("LOSO requires at least 2 subjects, found {0}")]
    TooFewSubjects(usize),
    #[error("no predictions to score")]
    EmptyPredictions,
    #[error("AUC undefined: predictions contain a single true class")]
    UndefinedAuc,
    #[error("upsampling requires both classes present")]
    SingleClass,
    #[error("missing embedding for sample {sample_id:?}")]
    MissingEmbedding { sample_id: String },
    #[error("no verdict/sample match for {sample_id:?}")]
    UnmatchedSampleId { sample_id: String },
    #[error("h_values list is empty")]
    EmptyHiddenList,
    #[error("report has no rows")]
    EmptyReport,
    #[error(transparent)]
    Train(#[from] FfnnError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}
