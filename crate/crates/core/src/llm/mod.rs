//! Chat-completion access: an HTTP client, deterministic test doubles and
//! record/replay of exchanges.

mod doubles;
mod http;
mod session;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use doubles::{ScriptRule, ScriptedModel, SequenceModel, StubModel};
pub use http::{HttpChatModel, HttpResponse, ReqwestTransport, RetryPolicy, Transport, TransportFailure};
pub use session::{RecordingModel, ReplayModel, SessionEntry};

pub const DEFAULT_TEMPERATURE: f64 = 0.2;
pub const DEFAULT_MAX_TOKENS: u32 = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingConfig {
    pub temperature: f64,
    pub max_tokens: u32,
    pub model_id: String,
    pub endpoint: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            temperature: DEFAULT_TEMPERATURE,
            max_tokens: DEFAULT_MAX_TOKENS,
            model_id: "gpt-4-turbo".to_string(),
            endpoint: "https://api.openai.com/v1/chat/completions".to_string(),
            api_key_env: "OPENAI_API_KEY".to_string(),
        }
    }
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(format!("temperature {} outside [0, 2]", self.temperature));
        }
        if self.max_tokens == 0 {
            return Err("max_tokens must be positive".to_string());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u32,
    pub completion_tokens: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    pub usage: Option<Usage>,
    pub latency_ms: u64,
    /// Transient failures retried before this completion arrived.
    pub retries: u32,
}

impl Completion {
    pub fn canned(text: &str) -> Self {
        Completion { text: text.to_string(), usage: None, latency_ms: 0, retries: 0 }
    }
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("transport failed after {attempts} attempts: {message}")]
    Transport { attempts: u32, message: String },
    #[error("authentication rejected: {0}")]
    Auth(String),
    #[error("prompt exceeds provider limit: {0}")]
    Budget(String),
    #[error("unexpected response: {0}")]
    Protocol(String),
    #[error("no recorded completion for prompt {hash}")]
    ReplayMiss { hash: String },
    #[error("scripted model has no reply: {0}")]
    Script(String),
    #[error("session I/O on {path}: {message}")]
    Session { path: String, message: String },
}

/// A chat-completion backend. Implementations must not alter the prompt.
pub trait ChatModel: Send + Sync {
    fn complete(&self, prompt: &str, cfg: &SamplingConfig) -> Result<Completion, GatewayError>;
}

impl<M: ChatModel + ?Sized> ChatModel for Box<M> {
    fn complete(&self, prompt: &str, cfg: &SamplingConfig) -> Result<Completion, GatewayError> {
        (**self).complete(prompt, cfg)
    }
}

impl<M: ChatModel + ?Sized> ChatModel for std::sync::Arc<M> {
    fn complete(&self, prompt: &str, cfg: &SamplingConfig) -> Result<Completion, GatewayError> {
        (**self).complete(prompt, cfg)
    }
}

/// Hex SHA-256 of the exact prompt text.
pub fn prompt_sha256(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}
