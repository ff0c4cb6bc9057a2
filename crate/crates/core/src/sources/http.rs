//! Sampling from an OpenAI-compatible chat-completions endpoint: one request
//! per candidate, a bounded number in flight, retries with backoff.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::engine::Candidate;

pub const API_KEY_VAR: &str = "SSC_API_KEY";
pub const ENDPOINT_VAR: &str = "SSC_ENDPOINT";
pub const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRequest {
    pub prompt: String,
    pub n: usize,
    pub temperature: f64,
    pub max_tokens: u32,
    pub model_name: String,
}

impl SampleRequest {
    pub fn new(prompt: impl Into<String>, model_name: impl Into<String>) -> Self {
        Self {
            prompt: prompt.into(),
            n: 5,
            temperature: 0.7,
            max_tokens: 4096,
            model_name: model_name.into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EndpointConfig {
    pub base_url: String,
    pub api_key: String,
    pub timeout: Duration,
    /// Total attempts per candidate.
    pub attempts: u32,
    /// Wait before the second attempt; doubled after each further failure.
    pub backoff: Duration,
    pub concurrency: usize,
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>, api_key: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            api_key: api_key.into(),
            timeout: Duration::from_secs(120),
            attempts: 3,
            backoff: Duration::from_millis(500),
            concurrency: 4,
        }
    }

    /// Reads the key from `SSC_API_KEY` and the base URL from `SSC_ENDPOINT`.
    pub fn from_env() -> Result<Self, FetchError> {
        let key = std::env::var(API_KEY_VAR)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or(FetchError::AuthMissing)?;
        let base = std::env::var(ENDPOINT_VAR).unwrap_or_else(|_| DEFAULT_ENDPOINT.to_string());
        Ok(Self::new(base, key))
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FetchError {
    #[error("endpoint returned HTTP {0}")]
    HttpError(u16),
    #[error("request timed out")]
    Timeout,
    #[error("{API_KEY_VAR} is not set")]
    AuthMissing,
    #[error("only {} of {requested} candidates were fetched", candidates.len())]
    PartialPool {
        requested: usize,
        candidates: Vec<Candidate>,
    },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed response: {0}")]
    BadResponse(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

#[derive(Debug, Clone)]
enum SlotError {
    Status(u16),
    Timeout,
    Transport(String),
    Response(String),
}

impl SlotError {
    fn retryable(&self) -> bool {
        match self {
            SlotError::Status(s) => *s == 429 || *s >= 500,
            SlotError::Timeout | SlotError::Transport(_) => true,
            SlotError::Response(_) => false,
        }
    }
}

fn request_once(
    client: &reqwest::blocking::Client,
    endpoint: &EndpointConfig,
    req: &SampleRequest,
) -> Result<String, SlotError> {
    let body = json!({
        "model": req.model_name,
        "messages": [{"role": "user", "content": req.prompt}],
        "temperature": req.temperature,
        "max_tokens": req.max_tokens,
    });
    let resp = client
        .post(endpoint.url())
        .bearer_auth(&endpoint.api_key)
        .json(&body)
        .send()
        .map_err(|e| {
            if e.is_timeout() {
                SlotError::Timeout
            } else {
                SlotError::Transport(e.to_string())
            }
        })?;
    let status = resp.status();
    if !status.is_success() {
        return Err(SlotError::Status(status.as_u16()));
    }
    let doc: serde_json::Value = resp.json().map_err(|e| {
        if e.is_timeout() {
            SlotError::Timeout
        } else {
            SlotError::Response(e.to_string())
        }
    })?;
    doc.pointer("/choices/0/message/content")
        .and_then(|v| v.as_str())
        .map(str::to_string)
        .ok_or_else(|| SlotError::Response("choices[0].message.content missing".into()))
}

fn fetch_slot(
    client: &reqwest::blocking::Client,
    endpoint: &EndpointConfig,
    req: &SampleRequest,
) -> Result<String, SlotError> {
    let mut wait = endpoint.backoff;
    let mut attempt = 1;
    loop {
        match request_once(client, endpoint, req) {
            Ok(text) => return Ok(text),
            Err(e) if e.retryable() && attempt < endpoint.attempts.max(1) => {
                log::warn!("attempt {attempt} failed: {e:?}; retrying in {wait:?}");
                std::thread::sleep(wait);
                wait *= 2;
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Fetches `request.n` completions. Candidate `i` is the raw text of
/// request slot `i`. When some slots fail after all retries the successful
/// ones come back inside [`FetchError::PartialPool`].
pub fn fetch_candidates(request: &SampleRequest, endpoint: &EndpointConfig) -> Result<Vec<Candidate>, FetchError> {
    if request.n == 0 {
        return Err(FetchError::InvalidRequest("n must be at least 1".into()));
    }
    if !(request.temperature >= 0.0) {
        return Err(FetchError::InvalidRequest("temperature must be non-negative".into()));
    }
    if endpoint.api_key.trim().is_empty() {
        return Err(FetchError::AuthMissing);
    }
    let client = reqwest::blocking::Client::builder()
        .timeout(endpoint.timeout)
        .build()
        .map_err(|e| FetchError::Transport(e.to_string()))?;
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<String, SlotError>>>> = Mutex::new(vec![None; request.n]);
    let workers = endpoint.concurrency.clamp(1, request.n);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= request.n {
                    break;
                }
                let r = fetch_slot(&client, endpoint, request);
                slots.lock().expect("slot lock")[i] = Some(r);
            });
        }
    });
    let results: Vec<Result<String, SlotError>> = slots
        .into_inner()
        .expect("slot lock")
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect();
    let mut candidates = Vec::new();
    let mut last_err = None;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(text) => candidates.push(Candidate::new(i, text)),
            Err(e) => last_err = Some(e),
        }
    }
    match last_err {
        None => Ok(candidates),
        Some(_) if !candidates.is_empty() => Err(FetchError::PartialPool {
            requested: request.n,
            candidates,
        }),
        Some(SlotError::Status(s)) => Err(FetchError::HttpError(s)),
        Some(SlotError::Timeout) => Err(FetchError::Timeout),
        Some(SlotError::Transport(m)) => Err(FetchError::Transport(m)),
        Some(SlotError::Response(m)) => Err(FetchError::BadResponse(m)),
    }
}
