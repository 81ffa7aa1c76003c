use thiserror::Error;

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("transport error after {attempts} attempts: {message}")]
    Transport { attempts: u32, message: String },
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("authentication failed (HTTP {status}): {body}")]
    Auth { status: u16, body: String },
    #[error("provider returned an empty completion")]
    EmptyCompletion,
    #[error("unexpected response shape: {0}")]
    Protocol(String),
    #[error("cannot parse zero-shot verdict from {raw:?}")]
    UnparseableVerdict { raw: String },
    #[error("no mock fixture for image digest {digest}")]
    MissingFixture { digest: String },
    #[error("unrecognized image format (no known magic bytes)")]
    UnknownMediaType,
    #[error("cannot read image {path}: {message}")]
    Image { path: String, message: String },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl GatewayError {
    /// Authentication failures abort a batch; everything else is per-sample.
    pub fn is_auth(&self) -> bool {
        matches!(self, GatewayError::Auth { .. })
    }
}
