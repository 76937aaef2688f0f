use std::time::{Duration, Instant};

use serde_json::{json, Value};

use super::{ChatModel, Completion, GatewayError, SamplingConfig, Usage};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

/// Connection-level failure (timeout, refused, reset).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportFailure(pub String);

pub trait Transport: Send + Sync {
    fn post_json(&self, url: &str, bearer: Option<&str>, body: &Value) -> Result<HttpResponse, TransportFailure>;
}

pub struct ReqwestTransport {
    client: reqwest::blocking::Client,
}

impl ReqwestTransport {
    pub fn new(timeout: Duration) -> Result<Self, GatewayError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| GatewayError::Protocol(e.to_string()))?;
        Ok(ReqwestTransport { client })
    }
}

impl Transport for ReqwestTransport {
    fn post_json(&self, url: &str, bearer: Option<&str>, body: &Value) -> Result<HttpResponse, TransportFailure> {
        let mut req = self.client.post(url).json(body);
        if let Some(key) = bearer {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| TransportFailure(e.to_string()))?;
        let status = resp.status().as_u16();
        let body = resp.text().map_err(|e| TransportFailure(e.to_string()))?;
        Ok(HttpResponse { status, body })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    /// Delay before the first retry; doubles on each subsequent one.
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_retries: 3, base_delay: Duration::from_millis(500), max_delay: Duration::from_secs(8) }
    }
}

impl RetryPolicy {
    pub fn delay(&self, retry: u32) -> Duration {
        self.base_delay.saturating_mul(1u32 << retry.min(16)).min(self.max_delay)
    }
}

/// Chat-completion client for `messages`/`temperature`/`max_tokens` JSON
/// endpoints.
pub struct HttpChatModel<T: Transport> {
    transport: T,
    retry: RetryPolicy,
}

impl HttpChatModel<ReqwestTransport> {
    pub fn live(timeout: Duration) -> Result<Self, GatewayError> {
        Ok(HttpChatModel::new(ReqwestTransport::new(timeout)?, RetryPolicy::default()))
    }
}

enum Outcome {
    Done(Completion),
    Retry(String),
    Fail(GatewayError),
}

impl<T: Transport> HttpChatModel<T> {
    pub fn new(transport: T, retry: RetryPolicy) -> Self {
        HttpChatModel { transport, retry }
    }

    pub fn request_body(prompt: &str, cfg: &SamplingConfig) -> Value {
        json!({
            "model": cfg.model_id,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": cfg.temperature,
            "max_tokens": cfg.max_tokens,
        })
    }

    fn classify(resp: HttpResponse) -> Outcome {
        match resp.status {
            200..=299 => match parse_completion(&resp.body) {
                Ok(c) => Outcome::Done(c),
                Err(e) => Outcome::Fail(e),
            },
            401 | 403 => Outcome::Fail(GatewayError::Auth(format!("HTTP {}", resp.status))),
            413 => Outcome::Fail(GatewayError::Budget(resp.body)),
            400 if resp.body.contains("context_length") || resp.body.contains("maximum context") => {
                Outcome::Fail(GatewayError::Budget(resp.body))
            }
            408 | 409 | 429 | 500..=599 => Outcome::Retry(format!("HTTP {}", resp.status)),
            s => Outcome::Fail(GatewayError::Protocol(format!("HTTP {s}: {}", resp.body))),
        }
    }
}

fn parse_completion(body: &str) -> Result<Completion, GatewayError> {
    let v: Value = serde_json::from_str(body).map_err(|e| GatewayError::Protocol(e.to_string()))?;
    let text = v["choices"][0]["message"]["content"]
        .as_str()
        .ok_or_else(|| GatewayError::Protocol("missing choices[0].message.content".into()))?;
    let usage = v.get("usage").and_then(|u| {
        Some(Usage {
            prompt_tokens: u.get("prompt_tokens")?.as_u64()? as u32,
            completion_tokens: u.get("completion_tokens")?.as_u64()? as u32,
        })
    });
    Ok(Completion { text: text.to_string(), usage, latency_ms: 0, retries: 0 })
}

impl<T: Transport> ChatModel for HttpChatModel<T> {
    fn complete(&self, prompt: &str, cfg: &SamplingConfig) -> Result<Completion, GatewayError> {
        let key = std::env::var(&cfg.api_key_env).ok().filter(|k| !k.is_empty());
        let body = Self::request_body(prompt, cfg);
        let start = Instant::now();
        let mut retries = 0;
        loop {
            let outcome = match self.transport.post_json(&cfg.endpoint, key.as_deref(), &body) {
                Ok(resp) => Self::classify(resp),
                Err(TransportFailure(msg)) => Outcome::Retry(msg),
            };
            match outcome {
                Outcome::Done(mut c) => {
                    c.retries = retries;
                    c.latency_ms = start.elapsed().as_millis() as u64;
                    return Ok(c);
                }
                Outcome::Fail(e) => return Err(e),
                Outcome::Retry(message) => {
                    if retries >= self.retry.max_retries {
                        return Err(GatewayError::Transport { attempts: retries + 1, message });
                    }
                    log::warn!("transient gateway failure ({message}), retry {}", retries + 1);
                    std::thread::sleep(self.retry.delay(retries));
                    retries += 1;
                }
            }
        }
    }
}
