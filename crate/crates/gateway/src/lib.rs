//! Gateway to vision-language models: description generation, zero-shot
//! verdict parsing, batched requests with resume, and remote embeddings.

pub mod batch;
pub mod embed_remote;
pub mod error;
pub mod media;
pub mod prompt;
pub mod provider;
pub mod zeroshot;

pub use batch::{batch_describe, load_descriptions, BatchOutcome};
pub use embed_remote::RemoteEmbeddingProvider;
pub use error::GatewayError;
pub use prompt::{build_prompt, PromptKind, PromptTemplate};
pub use provider::{
    image_digest, request_description, Description, HttpConfig, HttpVlmProvider, MockVlmProvider,
    RetryPolicy, VlmProvider, ENV_API_BASE, ENV_API_KEY,
};
pub use zeroshot::{parse_zeroshot_output, ParsedClass, VerdictRecord, ZeroShotVerdict};
