//! Remote embedding provider speaking an embeddings-style HTTP endpoint.

use std::time::Duration;

use selfscreen_core::embed::{l2_normalize, EmbeddingProvider, EmbeddingVector, EMBED_DIM};
use selfscreen_core::error::EmbedError;

use crate::provider::{HttpConfig, RetryPolicy};

pub struct RemoteEmbeddingProvider {
    config: HttpConfig,
    client: reqwest::blocking::Client,
    normalize: bool,
}

impl RemoteEmbeddingProvider {
    pub fn new(config: HttpConfig, normalize: bool) -> Result<Self, EmbedError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| EmbedError::Remote(e.to_string()))?;
        Ok(Self {
            config,
            client,
            normalize,
        })
    }

    fn fetch(&self, text: &str) -> Result<Vec<f64>, EmbedError> {
        let url = format!("{}/embeddings", self.config.base_url);
        let body = serde_json::json!({ "model": self.config.model, "input": text });
        let RetryPolicy {
            max_attempts,
            base_backoff,
        } = self.config.retry;
        let mut last_error = String::new();
        for attempt in 1..=max_attempts {
            if attempt > 1 {
                std::thread::sleep(mul_backoff(base_backoff, attempt - 2));
            }
            let mut request = self.client.post(&url).json(&body);
            if let Some(key) = &self.config.api_key {
                request = request.bearer_auth(key);
            }
            match request.send() {
                Ok(response) => {
                    let status = response.status();
                    if status.is_success() {
                        let value: serde_json::Value = response
                            .json()
                            .map_err(|e| EmbedError::Remote(e.to_string()))?;
                        let embedding = value["data"][0]["embedding"]
                            .as_array()
                            .ok_or_else(|| {
                                EmbedError::Remote("response lacks data[0].embedding".into())
                            })?;
                        return embedding
                            .iter()
                            .map(|v| {
                                v.as_f64()
                                    .ok_or_else(|| EmbedError::Remote("non-numeric component".into()))
                            })
                            .collect();
                    }
                    if status.as_u16() == 429 || status.is_server_error() {
                        last_error = format!("HTTP {status}");
                        continue;
                    }
                    return Err(EmbedError::Remote(format!(
                        "HTTP {status}: {}",
                        response.text().unwrap_or_default()
                    )));
                }
                Err(e) => {
                    last_error = e.to_string();
                    continue;
                }
            }
        }
        Err(EmbedError::Remote(format!(
            "transport error after {max_attempts} attempts: {last_error}"
        )))
    }
}

fn mul_backoff(base: Duration, exponent: u32) -> Duration {
    base * 2u32.pow(exponent)
}

impl EmbeddingProvider for RemoteEmbeddingProvider {
    fn embed(&self, sample_id: &str, text: &str) -> Result<EmbeddingVector, EmbedError> {
        if text.trim().is_empty() {
            return Err(EmbedError::EmptyText);
        }
        let mut values = self.fetch(text)?;
        if values.len() != EMBED_DIM {
            return Err(EmbedError::DimensionMismatch {
                sample_id: sample_id.to_string(),
                got: values.len(),
                expected: EMBED_DIM,
            });
        }
        if self.normalize {
            l2_normalize(&mut values)?;
        }
        EmbeddingVector::new(sample_id.to_string(), values)
    }

    fn name(&self) -> &str {
        "remote-endpoint"
    }
}
