//! Selfie-based depression-anxiety screening: dataset handling, sentence
//! embeddings, small FFNN heads, and Leave-One-Subject-Out evaluation.

pub mod data;
pub mod embed;
pub mod error;
pub mod eval;
pub mod ffnn;
pub mod manifest;
pub mod metrics;
pub mod report;
pub mod sampling;

pub use data::{Dataset, Label, Phq4Response, Sample};
pub use embed::{EmbeddingProvider, EmbeddingVector, EMBED_DIM};
pub use error::{DataError, EmbedError, EvalError, FfnnError};
pub use ffnn::{FfnnParams, TrainConfig, Variant};
pub use metrics::{ConfusionCounts, MetricsReport, Prediction};
