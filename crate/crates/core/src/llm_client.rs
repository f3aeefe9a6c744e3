//! Chat-completion client for a local OpenAI-compatible server, plus
//! backends that answer without any server.
//!
//! Raw completions are kept byte-exact from the wire to the run log.

use std::collections::{HashMap, VecDeque};
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

const EXCERPT_LIMIT: usize = 200;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("invalid endpoint configuration: {0}")]
    InvalidEndpoint(String),
    #[error("connection failed: {0}")]
    Connection(String),
    #[error("request timed out: {0}")]
    Timeout(String),
    #[error("server answered HTTP {status}: {body}")]
    HttpStatus { status: u16, body: String },
    #[error("response has no completion text: {0}")]
    MissingCompletion(String),
    #[error("no recorded response for this prompt pair (user prompt starts with {user_excerpt:?})")]
    UnknownPromptPair { user_excerpt: String },
    #[error("scripted backend has no responses left")]
    ScriptExhausted,
    #[error("run log line {line}: {message}")]
    MalformedLog { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl ClientError {
    /// Transport failures and HTTP 429 or 5xx are worth retrying.
    pub fn is_transient(&self) -> bool {
        match self {
            ClientError::Connection(_) | ClientError::Timeout(_) => true,
            ClientError::HttpStatus { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}

fn excerpt(text: &str) -> String {
    text.chars().take(EXCERPT_LIMIT).collect()
}

/// Where and how to ask a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEndpoint {
    pub base_url: String,
    pub model_name: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_ms: u64,
    pub retries: u32,
    /// Upper bound on concurrent requests to this endpoint.
    pub max_in_flight: usize,
}

impl ModelEndpoint {
    pub fn new(base_url: impl Into<String>, model_name: impl Into<String>) -> Self {
        ModelEndpoint {
            base_url: base_url.into(),
            model_name: model_name.into(),
            temperature: 0.0,
            max_tokens: 1024,
            timeout_ms: 120_000,
            retries: 2,
            max_in_flight: 1,
        }
    }

    pub fn validate(&self) -> Result<(), ClientError> {
        let bad = |msg: &str| Err(ClientError::InvalidEndpoint(msg.to_string()));
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return bad("temperature must be finite and non-negative");
        }
        if self.timeout_ms < 1000 {
            return bad("timeout_ms must be at least 1000");
        }
        if self.max_tokens == 0 {
            return bad("max_tokens must be positive");
        }
        if self.max_in_flight == 0 {
            return bad("max_in_flight must be positive");
        }
        if self.model_name.is_empty() {
            return bad("model name is empty");
        }
        Ok(())
    }

    pub fn completions_url(&self) -> String {
        format!("{}/v1/chat/completions", self.base_url.trim_end_matches('/'))
    }
}

/// One request as seen by a backend.
#[derive(Debug, Clone, Copy)]
pub struct ChatRequest<'a> {
    pub model: &'a str,
    pub system_text: &'a str,
    pub user_text: &'a str,
    pub temperature: f64,
    pub max_tokens: u32,
}

/// One completed request. Immutable once returned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatExchange {
    pub system_text: String,
    pub user_text: String,
    pub raw_response: String,
    pub latency_ms: u64,
    pub model_name: String,
    pub timestamp: DateTime<Utc>,
}

/// Transport that turns a request into raw completion text.
pub trait ChatBackend: Send + Sync {
    fn send(&self, request: &ChatRequest<'_>) -> Result<String, ClientError>;
}

/// JSON-over-HTTP backend for `/v1/chat/completions`.
pub struct HttpBackend {
    client: reqwest::blocking::Client,
    url: String,
}

impl HttpBackend {
    pub fn new(endpoint: &ModelEndpoint) -> Result<Self, ClientError> {
        endpoint.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(endpoint.timeout_ms))
            .build()
            .map_err(|e| ClientError::Connection(e.to_string()))?;
        Ok(HttpBackend {
            client,
            url: endpoint.completions_url(),
        })
    }
}

impl ChatBackend for HttpBackend {
    fn send(&self, request: &ChatRequest<'_>) -> Result<String, ClientError> {
        let body = json!({
            "model": request.model,
            "messages": [
                {"role": "system", "content": request.system_text},
                {"role": "user", "content": request.user_text},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        });
        let transport = |e: reqwest::Error| {
            if e.is_timeout() {
                ClientError::Timeout(e.to_string())
            } else {
                ClientError::Connection(e.to_string())
            }
        };
        let response = self.client.post(&self.url).json(&body).send().map_err(transport)?;
        let status = response.status();
        let text = response.text().map_err(transport)?;
        if !status.is_success() {
            return Err(ClientError::HttpStatus {
                status: status.as_u16(),
                body: excerpt(&text),
            });
        }
        let value: Value =
            serde_json::from_str(&text).map_err(|_| ClientError::MissingCompletion(excerpt(&text)))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| ClientError::MissingCompletion(excerpt(&text)))
    }
}

/// Answers with a fixed sequence of results, one per request.
pub struct ScriptedBackend {
    script: Mutex<VecDeque<Result<String, ClientError>>>,
}

impl ScriptedBackend {
    pub fn new(script: impl IntoIterator<Item = Result<String, ClientError>>) -> Self {
        ScriptedBackend {
            script: Mutex::new(script.into_iter().collect()),
        }
    }
}

impl ChatBackend for ScriptedBackend {
    fn send(&self, _: &ChatRequest<'_>) -> Result<String, ClientError> {
        self.script
            .lock()
            .expect("script lock")
            .pop_front()
            .unwrap_or(Err(ClientError::ScriptExhausted))
    }
}

/// Computes each answer from the request.
pub struct FnBackend<F>(pub F);

impl<F> ChatBackend for FnBackend<F>
where
    F: Fn(&ChatRequest<'_>) -> Result<String, ClientError> + Send + Sync,
{
    fn send(&self, request: &ChatRequest<'_>) -> Result<String, ClientError> {
        (self.0)(request)
    }
}

/// Answers from a recorded run by exact (system, user) match.
/// When a pair was recorded more than once the first response wins.
pub struct ReplayBackend {
    responses: HashMap<(String, String), String>,
}

impl ReplayBackend {
    pub fn from_exchanges(exchanges: impl IntoIterator<Item = ChatExchange>) -> Self {
        let mut responses = HashMap::new();
        for ex in exchanges {
            responses
                .entry((ex.system_text, ex.user_text))
                .or_insert(ex.raw_response);
        }
        ReplayBackend { responses }
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

impl ChatBackend for ReplayBackend {
    fn send(&self, request: &ChatRequest<'_>) -> Result<String, ClientError> {
        self.responses
            .get(&(request.system_text.to_string(), request.user_text.to_string()))
            .cloned()
            .ok_or_else(|| ClientError::UnknownPromptPair {
                user_excerpt: excerpt(request.user_text),
            })
    }
}

/// Counting semaphore bounding in-flight requests.
struct Limiter {
    available: Mutex<usize>,
    freed: Condvar,
}

struct Permit<'a>(&'a Limiter);

impl Limiter {
    fn new(size: usize) -> Self {
        Limiter {
            available: Mutex::new(size),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut n = self.available.lock().expect("limiter lock");
        while *n == 0 {
            n = self.freed.wait(n).expect("limiter lock");
        }
        *n -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.available.lock().expect("limiter lock") += 1;
        self.0.freed.notify_one();
    }
}

/// Retrying, concurrency-limited front end over a backend.
pub struct LlmClient {
    endpoint: ModelEndpoint,
    backend: Box<dyn ChatBackend>,
    limiter: Limiter,
    backoff: Duration,
}

impl LlmClient {
    pub fn new(endpoint: ModelEndpoint, backend: Box<dyn ChatBackend>) -> Result<Self, ClientError> {
        endpoint.validate()?;
        let limiter = Limiter::new(endpoint.max_in_flight);
        Ok(LlmClient {
            endpoint,
            backend,
            limiter,
            backoff: Duration::from_millis(500),
        })
    }

    /// Client talking HTTP to `endpoint.base_url`.
    pub fn http(endpoint: ModelEndpoint) -> Result<Self, ClientError> {
        let backend = HttpBackend::new(&endpoint)?;
        Self::new(endpoint, Box::new(backend))
    }

    /// Base delay; attempt `n` waits `backoff * 2^n` before retrying.
    pub fn with_backoff(mut self, backoff: Duration) -> Self {
        self.backoff = backoff;
        self
    }

    pub fn endpoint(&self) -> &ModelEndpoint {
        &self.endpoint
    }

    /// Sends one system+user conversation. `latency_ms` spans all attempts.
    pub fn complete(&self, system_text: &str, user_text: &str) -> Result<ChatExchange, ClientError> {
        let _permit = self.limiter.acquire();
        let request = ChatRequest {
            model: &self.endpoint.model_name,
            system_text,
            user_text,
            temperature: self.endpoint.temperature,
            max_tokens: self.endpoint.max_tokens,
        };
        let started = Instant::now();
        let mut attempt = 0;
        loop {
            match self.backend.send(&request) {
                Ok(raw_response) => {
                    return Ok(ChatExchange {
                        system_text: system_text.to_string(),
                        user_text: user_text.to_string(),
                        raw_response,
                        latency_ms: started.elapsed().as_millis() as u64,
                        model_name: self.endpoint.model_name.clone(),
                        timestamp: Utc::now(),
                    })
                }
                Err(err) if err.is_transient() && attempt < self.endpoint.retries => {
                    log::warn!("attempt {} failed: {err}; retrying", attempt + 1);
                    thread::sleep(self.backoff.saturating_mul(1 << attempt.min(16)));
                    attempt += 1;
                }
                Err(err) => return Err(err),
            }
        }
    }
}

/// Appends exchanges to a JSON-lines run log, one exchange per line.
pub fn record_run(exchanges: &[ChatExchange], path: impl AsRef<Path>) -> Result<(), ClientError> {
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut out = BufWriter::new(file);
    for ex in exchanges {
        serde_json::to_writer(&mut out, ex).map_err(io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads every exchange of a run log in file order.
pub fn read_run(path: impl AsRef<Path>) -> Result<Vec<ChatExchange>, ClientError> {
    let reader = BufReader::new(File::open(path)?);
    let mut exchanges = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let ex = serde_json::from_str(&line).map_err(|e| ClientError::MalformedLog {
            line: i + 1,
            message: e.to_string(),
        })?;
        exchanges.push(ex);
    }
    Ok(exchanges)
}

/// Backend answering from a recorded run log.
pub fn replay_run(path: impl AsRef<Path>) -> Result<ReplayBackend, ClientError> {
    Ok(ReplayBackend::from_exchanges(read_run(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn endpoint() -> ModelEndpoint {
        ModelEndpoint::new("http://127.0.0.1:9", "tiny-3b")
    }

    #[test]
    fn endpoint_validation() {
        assert!(endpoint().validate().is_ok());
        let mut e = endpoint();
        e.timeout_ms = 999;
        assert!(e.validate().is_err());
        let mut e = endpoint();
        e.temperature = f64::NAN;
        assert!(e.validate().is_err());
        assert_eq!(
            ModelEndpoint::new("http://h:1/", "m").completions_url(),
            "http://h:1/v1/chat/completions"
        );
    }

    #[test]
    fn scripted_echo() {
        let client = LlmClient::new(endpoint(), Box::new(ScriptedBackend::new([Ok("X".to_string())]))).unwrap();
        let ex = client.complete("sys", "usr").unwrap();
        assert_eq!(ex.raw_response, "X");
        assert_eq!(ex.model_name, "tiny-3b");
        assert!(matches!(client.complete("sys", "usr"), Err(ClientError::ScriptExhausted)));
    }

    #[test]
    fn retries_transient_failures() {
        let mut e = endpoint();
        e.retries = 2;
        let script = [Err(ClientError::Connection("refused".into())), Ok(" ok \n".to_string())];
        let client = LlmClient::new(e, Box::new(ScriptedBackend::new(script)))
            .unwrap()
            .with_backoff(Duration::from_millis(5));
        let ex = client.complete("s", "u").unwrap();
        assert_eq!(ex.raw_response, " ok \n");
        assert!(ex.latency_ms >= 5);
    }

    #[test]
    fn permanent_errors_are_not_retried() {
        let mut e = endpoint();
        e.retries = 3;
        let script = [
            Err(ClientError::HttpStatus { status: 400, body: "bad".into() }),
            Ok("never".to_string()),
        ];
        let client = LlmClient::new(e, Box::new(ScriptedBackend::new(script))).unwrap();
        assert!(matches!(client.complete("s", "u"), Err(ClientError::HttpStatus { status: 400, .. })));
    }

    #[test]
    fn retries_exhausted() {
        let mut e = endpoint();
        e.retries = 1;
        let script = [
            Err(ClientError::Timeout("t".into())),
            Err(ClientError::Timeout("t".into())),
            Ok("late".to_string()),
        ];
        let client = LlmClient::new(e, Box::new(ScriptedBackend::new(script)))
            .unwrap()
            .with_backoff(Duration::from_millis(1));
        assert!(matches!(client.complete("s", "u"), Err(ClientError::Timeout(_))));
    }
}
