//! VLM providers over the chat-completions-with-vision wire convention,
//! plus the offline mock used by end-to-end tests.

use std::collections::HashMap;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::time::Duration;

use base64::Engine;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::GatewayError;
use crate::media::detect_media_type;
use crate::prompt::{build_prompt, PromptKind, PromptTemplate};

/// Environment variable naming the API bearer token.
pub const ENV_API_KEY: &str = "SELFSCREEN_API_KEY";
/// Environment variable naming the endpoint root.
pub const ENV_API_BASE: &str = "SELFSCREEN_API_BASE";

/// Something that turns (image, prompt) into a completion.
pub trait VlmProvider: Send + Sync {
    fn complete(&self, image: &[u8], prompt: &PromptTemplate) -> Result<String, GatewayError>;
    fn name(&self) -> String;
    fn model_name(&self) -> String;
}

/// A generated facial-expression description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Description {
    pub sample_id: String,
    pub model_name: String,
    pub text: String,
}

/// Ask the provider to describe the face; deterministic decoding is
/// requested on the wire by the HTTP provider.
pub fn request_description(
    provider: &dyn VlmProvider,
    sample_id: &str,
    image: &[u8],
) -> Result<Description, GatewayError> {
    if image.is_empty() {
        return Err(GatewayError::Image {
            path: sample_id.to_string(),
            message: "empty image payload".into(),
        });
    }
    let prompt = build_prompt(PromptKind::Description);
    let text = provider.complete(image, &prompt)?;
    let text = text.trim().to_string();
    if text.is_empty() {
        return Err(GatewayError::EmptyCompletion);
    }
    Ok(Description {
        sample_id: sample_id.to_string(),
        model_name: provider.model_name(),
        text,
    })
}

/// Retry schedule: exponential backoff, transport errors and 429/5xx only.
#[derive(Debug, Clone)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 5,
            base_backoff: Duration::from_millis(200),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HttpConfig {
    pub base_url: String,
    pub api_key: Option<String>,
    pub model: String,
    pub retry: RetryPolicy,
    pub timeout: Duration,
}

impl HttpConfig {
    pub fn new(base_url: &str, model: &str) -> Self {
        Self {
            base_url: base_url.trim_end_matches('/').to_string(),
            api_key: None,
            model: model.to_string(),
            retry: RetryPolicy::default(),
            timeout: Duration::from_secs(120),
        }
    }

    /// Read endpoint root and bearer token from the environment.
    pub fn from_env(model: &str) -> Result<Self, GatewayError> {
        let base = std::env::var(ENV_API_BASE).map_err(|_| {
            GatewayError::Protocol(format!("{ENV_API_BASE} is not set"))
        })?;
        let mut config = Self::new(&base, model);
        config.api_key = std::env::var(ENV_API_KEY).ok();
        Ok(config)
    }
}

/// Chat-completions client requesting greedy decoding (temperature 0).
pub struct HttpVlmProvider {
    config: HttpConfig,
    client: reqwest::blocking::Client,
}

impl HttpVlmProvider {
    pub fn new(config: HttpConfig) -> Result<Self, GatewayError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| GatewayError::Protocol(e.to_string()))?;
        Ok(Self { config, client })
    }

    fn post_with_retry(
        &self,
        url: &str,
        body: &serde_json::Value,
    ) -> Result<serde_json::Value, GatewayError> {
        let policy = &self.config.retry;
        let mut last_transport = String::new();
        for attempt in 1..=policy.max_attempts {
            if attempt > 1 {
                let backoff = policy.base_backoff * 2u32.pow(attempt - 2);
                std::thread::sleep(backoff);
            }
            let mut request = self.client.post(url).json(body);
            if let Some(key) = &self.config.api_key {
                request = request.bearer_auth(key);
            }
            match request.send() {
                Ok(response) => {
                    let status = response.status();
                    if status.is_success() {
                        return response
                            .json()
                            .map_err(|e| GatewayError::Protocol(e.to_string()));
                    }
                    let body_text = response.text().unwrap_or_default();
                    if status.as_u16() == 401 || status.as_u16() == 403 {
                        return Err(GatewayError::Auth {
                            status: status.as_u16(),
                            body: body_text,
                        });
                    }
                    if status.as_u16() == 429 || status.is_server_error() {
                        last_transport = format!("HTTP {status}: {body_text}");
                        continue;
                    }
                    // Other 4xx: caller error, do not retry.
                    return Err(GatewayError::Http {
                        status: status.as_u16(),
                        body: body_text,
                    });
                }
                Err(e) => {
                    last_transport = e.to_string();
                    continue;
                }
            }
        }
        Err(GatewayError::Transport {
            attempts: policy.max_attempts,
            message: last_transport,
        })
    }
}

impl VlmProvider for HttpVlmProvider {
    fn complete(&self, image: &[u8], prompt: &PromptTemplate) -> Result<String, GatewayError> {
        let media_type = detect_media_type(image)?;
        let encoded = base64::engine::general_purpose::STANDARD.encode(image);
        let body = serde_json::json!({
            "model": self.config.model,
            "temperature": 0,
            "messages": [{
                "role": "user",
                "content": [
                    {"type": "text", "text": prompt.text},
                    {"type": "image_url", "image_url": {
                        "url": format!("data:{media_type};base64,{encoded}")
                    }},
                ],
            }],
        });
        let url = format!("{}/chat/completions", self.config.base_url);
        let response = self.post_with_retry(&url, &body)?;
        let content = response["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| {
                GatewayError::Protocol("response lacks choices[0].message.content".into())
            })?;
        if content.trim().is_empty() {
            return Err(GatewayError::EmptyCompletion);
        }
        Ok(content.to_string())
    }

    fn name(&self) -> String {
        format!("http:{}", self.config.base_url)
    }

    fn model_name(&self) -> String {
        self.config.model.clone()
    }
}

pub fn image_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

#[derive(Serialize, Deserialize)]
struct FixtureRecord {
    digest: String,
    text: String,
}

/// Offline provider mapping image digests to canned completions.
pub struct MockVlmProvider {
    fixtures: HashMap<String, String>,
    model: String,
}

impl MockVlmProvider {
    pub fn new(fixtures: HashMap<String, String>, model: &str) -> Self {
        Self {
            fixtures,
            model: model.to_string(),
        }
    }

    /// Fixture file: one `{digest, text}` record per line.
    pub fn from_fixture_file(path: &Path, model: &str) -> Result<Self, GatewayError> {
        let file = std::fs::File::open(path).map_err(|source| GatewayError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut fixtures = HashMap::new();
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|source| GatewayError::Io {
                path: path.display().to_string(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let record: FixtureRecord =
                serde_json::from_str(&line).map_err(|e| GatewayError::Parse {
                    line: idx + 1,
                    message: e.to_string(),
                })?;
            fixtures.insert(record.digest, record.text);
        }
        Ok(Self::new(fixtures, model))
    }
}

impl VlmProvider for MockVlmProvider {
    fn complete(&self, image: &[u8], _prompt: &PromptTemplate) -> Result<String, GatewayError> {
        let digest = image_digest(image);
        self.fixtures
            .get(&digest)
            .cloned()
            .ok_or(GatewayError::MissingFixture { digest })
    }

    fn name(&self) -> String {
        "mock".to_string()
    }

    fn model_name(&self) -> String {
        self.model.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mock_returns_canned_text_by_digest() {
        let image = b"\xff\xd8\xff fake jpeg";
        let mut fixtures = HashMap::new();
        fixtures.insert(
            image_digest(image),
            "The person appears calm and rested.".to_string(),
        );
        let provider = MockVlmProvider::new(fixtures, "mock-model");
        let description = request_description(&provider, "s1", image).unwrap();
        assert_eq!(description.text, "The person appears calm and rested.");
        assert_eq!(description.model_name, "mock-model");
        assert_eq!(description.sample_id, "s1");
    }

    #[test]
    fn mock_without_fixture_is_an_error() {
        let provider = MockVlmProvider::new(HashMap::new(), "mock-model");
        assert!(matches!(
            request_description(&provider, "s1", b"\xff\xd8\xffzz"),
            Err(GatewayError::MissingFixture { .. })
        ));
    }

    #[test]
    fn empty_image_is_rejected() {
        let provider = MockVlmProvider::new(HashMap::new(), "mock-model");
        assert!(matches!(
            request_description(&provider, "s1", b""),
            Err(GatewayError::Image { .. })
        ));
    }

    #[test]
    fn description_text_is_trimmed() {
        let image = b"\xff\xd8\xff x";
        let mut fixtures = HashMap::new();
        fixtures.insert(image_digest(image), "  padded text \n".to_string());
        let provider = MockVlmProvider::new(fixtures, "m");
        let description = request_description(&provider, "s1", image).unwrap();
        assert_eq!(description.text, "padded text");
    }
}
