//! HTTP client for sentence-embedding providers.
//!
//! Requests are batched, bounded in concurrency, retried with exponential
//! backoff on transient failures (transport errors, 429 and 5xx), and served
//! from an [`EmbeddingCache`] when one is attached. The bearer token is read
//! from an environment variable and never logged.

use std::collections::HashMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::{DataError, EmbeddingCache};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WireFormat {
    /// `{"model", "input": [..]}` answered by `{"data": [{"embedding", "index"}]}`.
    #[default]
    OpenAi,
    /// `{"inputs": [..]}` answered by a bare array of vectors.
    Tei,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    /// Delay before the second attempt; doubles after each failure.
    pub backoff_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            backoff_ms: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub endpoint_url: String,
    pub model_id: String,
    /// Name of the environment variable holding the bearer token.
    #[serde(default)]
    pub auth_token_env_var: Option<String>,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_timeout")]
    pub timeout_ms: u64,
    #[serde(default)]
    pub retry: RetryPolicy,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    #[serde(default)]
    pub wire_format: WireFormat,
}

fn default_batch() -> usize {
    32
}
fn default_timeout() -> u64 {
    30_000
}
fn default_in_flight() -> usize {
    4
}

impl ProviderConfig {
    pub fn new(endpoint_url: impl Into<String>, model_id: impl Into<String>) -> Self {
        Self {
            endpoint_url: endpoint_url.into(),
            model_id: model_id.into(),
            auth_token_env_var: None,
            batch_size: default_batch(),
            timeout_ms: default_timeout(),
            retry: RetryPolicy::default(),
            max_in_flight: default_in_flight(),
            wire_format: WireFormat::default(),
        }
    }

    fn validate(&self) -> Result<(), ProviderError> {
        if self.batch_size == 0 || self.max_in_flight == 0 || self.retry.max_attempts == 0 {
            return Err(ProviderError::Config(
                "batch_size, max_in_flight and retry.max_attempts must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("network failure after {attempts} attempt(s): {last}")]
    Network { attempts: u32, last: String },
    #[error("unexpected response: {0}")]
    Schema(String),
    #[error("provider returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("invalid provider configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Cache(#[from] DataError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{0}")]
pub struct TransportError(pub String);

/// One JSON POST. Implemented over HTTP by [`UreqTransport`]; tests supply
/// their own.
pub trait Transport: Send + Sync {
    fn post_json(&self, url: &str, bearer: Option<&str>, body: &[u8]) -> Result<HttpResponse, TransportError>;
}

pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self { agent }
    }
}

impl Transport for UreqTransport {
    fn post_json(&self, url: &str, bearer: Option<&str>, body: &[u8]) -> Result<HttpResponse, TransportError> {
        let mut req = self.agent.post(url).header("Content-Type", "application/json");
        if let Some(token) = bearer {
            req = req.header("Authorization", &format!("Bearer {token}"));
        }
        let mut resp = req.send(body).map_err(|e| TransportError(e.to_string()))?;
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .with_config()
            .limit(u64::MAX)
            .read_to_vec()
            .map_err(|e| TransportError(e.to_string()))?;
        Ok(HttpResponse { status, body })
    }
}

fn request_body(cfg: &ProviderConfig, texts: &[&str]) -> Vec<u8> {
    let v = match cfg.wire_format {
        WireFormat::OpenAi => json!({ "model": cfg.model_id, "input": texts }),
        WireFormat::Tei => json!({ "inputs": texts }),
    };
    serde_json::to_vec(&v).expect("request serializes")
}

fn as_vector(v: &Value) -> Result<Vec<f64>, ProviderError> {
    let arr = v
        .as_array()
        .ok_or_else(|| ProviderError::Schema("embedding is not an array".into()))?;
    arr.iter()
        .map(|x| {
            x.as_f64()
                .filter(|f| f.is_finite())
                .ok_or_else(|| ProviderError::Schema("embedding holds a non-numeric value".into()))
        })
        .collect()
}

fn parse_response(format: WireFormat, body: &[u8], expected: usize) -> Result<Vec<Vec<f64>>, ProviderError> {
    let v: Value =
        serde_json::from_slice(body).map_err(|e| ProviderError::Schema(format!("invalid JSON: {e}")))?;
    let vectors = match format {
        WireFormat::OpenAi => {
            let data = v
                .get("data")
                .and_then(Value::as_array)
                .ok_or_else(|| ProviderError::Schema("missing data array".into()))?;
            let mut rows = Vec::with_capacity(data.len());
            for (pos, item) in data.iter().enumerate() {
                let index = match item.get("index") {
                    Some(i) => i
                        .as_u64()
                        .ok_or_else(|| ProviderError::Schema("index is not an integer".into()))?
                        as usize,
                    None => pos,
                };
                let emb = item
                    .get("embedding")
                    .ok_or_else(|| ProviderError::Schema("item without embedding".into()))?;
                rows.push((index, as_vector(emb)?));
            }
            rows.sort_by_key(|r| r.0);
            if rows.iter().enumerate().any(|(i, r)| r.0 != i) {
                return Err(ProviderError::Schema("response indices are not 0..n".into()));
            }
            rows.into_iter().map(|r| r.1).collect::<Vec<_>>()
        }
        WireFormat::Tei => v
            .as_array()
            .ok_or_else(|| ProviderError::Schema("expected an array of embeddings".into()))?
            .iter()
            .map(as_vector)
            .collect::<Result<Vec<_>, _>>()?,
    };
    if vectors.len() != expected {
        return Err(ProviderError::Schema(format!(
            "requested {expected} embeddings, received {}",
            vectors.len()
        )));
    }
    Ok(vectors)
}

pub struct ProviderClient<T: Transport = UreqTransport> {
    cfg: ProviderConfig,
    transport: T,
    cache: Option<EmbeddingCache>,
}

impl ProviderClient<UreqTransport> {
    pub fn new(cfg: ProviderConfig) -> Self {
        let transport = UreqTransport::new(Duration::from_millis(cfg.timeout_ms));
        Self::with_transport(cfg, transport)
    }
}

impl<T: Transport> ProviderClient<T> {
    pub fn with_transport(cfg: ProviderConfig, transport: T) -> Self {
        Self {
            cfg,
            transport,
            cache: None,
        }
    }

    pub fn with_cache(mut self, cache: EmbeddingCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.cfg
    }

    fn token(&self) -> Result<Option<String>, ProviderError> {
        let Some(var) = &self.cfg.auth_token_env_var else {
            return Ok(None);
        };
        match std::env::var(var) {
            Ok(t) if !t.is_empty() => Ok(Some(t)),
            _ => Err(ProviderError::Auth(format!("environment variable {var} is not set"))),
        }
    }

    fn send_batch(&self, texts: &[&str], token: Option<&str>) -> Result<Vec<Vec<f64>>, ProviderError> {
        let body = request_body(&self.cfg, texts);
        let attempts = self.cfg.retry.max_attempts;
        let mut last = String::new();
        for attempt in 1..=attempts {
            if attempt > 1 {
                let factor = 1u64 << (attempt - 2).min(20);
                std::thread::sleep(Duration::from_millis(self.cfg.retry.backoff_ms.saturating_mul(factor)));
            }
            match self.transport.post_json(&self.cfg.endpoint_url, token, &body) {
                Err(e) => last = e.0,
                Ok(r) if r.status == 429 || r.status >= 500 => {
                    last = format!("HTTP {}", r.status);
                }
                Ok(r) if r.status == 401 || r.status == 403 => {
                    return Err(ProviderError::Auth(format!("HTTP {}", r.status)));
                }
                Ok(r) if !(200..300).contains(&r.status) => {
                    let body = String::from_utf8_lossy(&r.body).chars().take(512).collect();
                    return Err(ProviderError::Status {
                        status: r.status,
                        body,
                    });
                }
                Ok(r) => return parse_response(self.cfg.wire_format, &r.body, texts.len()),
            }
        }
        Err(ProviderError::Network { attempts, last })
    }

    /// Embeddings for `texts`, in order. Cached texts cost no request;
    /// repeated texts are requested once.
    pub fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
        self.cfg.validate()?;
        let model = &self.cfg.model_id;
        let mut found: HashMap<&str, Vec<f64>> = HashMap::new();
        let mut missing: Vec<&str> = Vec::new();
        for t in texts {
            if found.contains_key(t.as_str()) || missing.contains(&t.as_str()) {
                continue;
            }
            match self.cache.as_ref().map(|c| c.get(model, t)).transpose()?.flatten() {
                Some(v) => {
                    found.insert(t, v);
                }
                None => missing.push(t),
            }
        }

        if !missing.is_empty() {
            let token = self.token()?;
            let batches: Vec<&[&str]> = missing.chunks(self.cfg.batch_size).collect();
            for wave in batches.chunks(self.cfg.max_in_flight) {
                let results: Vec<_> = std::thread::scope(|s| {
                    let handles: Vec<_> = wave
                        .iter()
                        .map(|b| s.spawn(|| self.send_batch(b, token.as_deref())))
                        .collect();
                    handles
                        .into_iter()
                        .map(|h| h.join().expect("provider worker panicked"))
                        .collect()
                });
                for (batch, result) in wave.iter().zip(results) {
                    for (text, v) in batch.iter().zip(result?) {
                        if let Some(c) = &self.cache {
                            c.put(model, text, &v)?;
                        }
                        found.insert(text, v);
                    }
                }
            }
        }
        Ok(texts.iter().map(|t| found[t.as_str()].clone()).collect())
    }
}

/// One-shot helper over HTTP.
pub fn fetch_embeddings(
    cfg: &ProviderConfig,
    texts: &[String],
    cache: Option<EmbeddingCache>,
) -> Result<Vec<Vec<f64>>, ProviderError> {
    let mut client = ProviderClient::new(cfg.clone());
    client.cache = cache;
    client.embed(texts)
}
