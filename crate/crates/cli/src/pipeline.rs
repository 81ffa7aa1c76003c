//! The single classify path shared by the eval tooling, `screen-once`,
//! and the HTTP service: description -> embedding -> probability -> label.

use serde::{Deserialize, Serialize};

use selfscreen_core::embed::EmbeddingProvider;
use selfscreen_core::ffnn::{self, FfnnParams, POSITIVE_CLASS};
use selfscreen_core::Label;
use selfscreen_gateway::{request_description, VlmProvider};

/// Which pipeline stage an error came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Describe,
    Embed,
    Classify,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Stage::Describe => write!(f, "describe"),
            Stage::Embed => write!(f, "embed"),
            Stage::Classify => write!(f, "classify"),
        }
    }
}

#[derive(Debug)]
pub struct StageError {
    pub stage: Stage,
    pub message: String,
}

impl std::fmt::Display for StageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} stage failed: {}", self.stage, self.message)
    }
}

impl std::error::Error for StageError {}

/// The screening verdict returned to clients. `label` is `abnormal`
/// iff `p_abnormal > 0.5`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenResponse {
    pub label: ScreenLabel,
    pub p_abnormal: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub model_version: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScreenLabel {
    Normal,
    Abnormal,
}

impl From<Label> for ScreenLabel {
    fn from(label: Label) -> Self {
        match label {
            Label::Negative => ScreenLabel::Normal,
            Label::Positive => ScreenLabel::Abnormal,
        }
    }
}

/// Probability of the abnormal class for one embedding vector.
pub fn classify_embedding(params: &FfnnParams, values: &[f64]) -> Result<f64, StageError> {
    let proba = ffnn::predict_proba(params, values).map_err(|e| StageError {
        stage: Stage::Classify,
        message: e.to_string(),
    })?;
    Ok(proba[POSITIVE_CLASS])
}

/// Description text through embedding and classification.
pub fn screen_description(
    params: &FfnnParams,
    embedder: &dyn EmbeddingProvider,
    description: &str,
    model_version: &str,
) -> Result<ScreenResponse, StageError> {
    if description.trim().is_empty() {
        return Err(StageError {
            stage: Stage::Embed,
            message: "description is empty".into(),
        });
    }
    let embedding = embedder
        .embed("request", description)
        .map_err(|e| StageError {
            stage: Stage::Embed,
            message: e.to_string(),
        })?;
    let p_abnormal = classify_embedding(params, &embedding.values)?;
    Ok(ScreenResponse {
        label: ffnn::label_from_proba(p_abnormal, 0.5).into(),
        p_abnormal,
        description: Some(description.to_string()),
        model_version: model_version.to_string(),
    })
}

/// Image bytes through description, embedding, and classification.
pub fn screen_image(
    params: &FfnnParams,
    vlm: &dyn VlmProvider,
    embedder: &dyn EmbeddingProvider,
    image: &[u8],
    model_version: &str,
) -> Result<ScreenResponse, StageError> {
    let description = request_description(vlm, "request", image).map_err(|e| StageError {
        stage: Stage::Describe,
        message: e.to_string(),
    })?;
    screen_description(params, embedder, &description.text, model_version)
}

#[cfg(test)]
mod tests {
    use super::*;
    use selfscreen_core::embed::{HashEmbedder, EMBED_DIM};
    use selfscreen_core::ffnn::Variant;

    /// With all-zero parameters the softmax is uniform: p_abnormal = 0.5,
    /// which the strict > rule maps to normal.
    #[test]
    fn zero_model_is_exactly_uniform() {
        let params = FfnnParams::zeros(Variant::Default, EMBED_DIM).unwrap();
        let response =
            screen_description(&params, &HashEmbedder::default(), "a calm face", "v0").unwrap();
        assert_eq!(response.p_abnormal, 0.5);
        assert_eq!(response.label, ScreenLabel::Normal);
    }

    /// Hand-computed forward pass: a model whose positive-class row sums
    /// the embedding gives p = sigmoid(sum) since the negative row is zero.
    #[test]
    fn known_model_probability_matches_hand_computation() {
        let mut params = FfnnParams::zeros(Variant::Default, EMBED_DIM).unwrap();
        for w in params.layers[0].w[EMBED_DIM..].iter_mut() {
            *w = 1.0;
        }
        let embedder = HashEmbedder::default();
        let text = "tired downcast eyes";
        let embedding = embedder.embed("t", text).unwrap();
        let logit: f64 = embedding.values.iter().sum();
        let expected = 1.0 / (1.0 + (-logit).exp());
        let response = screen_description(&params, &embedder, text, "v0").unwrap();
        assert!((response.p_abnormal - expected).abs() < 1e-12);
    }

    #[test]
    fn empty_description_fails_in_embed_stage() {
        let params = FfnnParams::zeros(Variant::Default, EMBED_DIM).unwrap();
        let err =
            screen_description(&params, &HashEmbedder::default(), "   ", "v0").unwrap_err();
        assert_eq!(err.stage, Stage::Embed);
    }
}
