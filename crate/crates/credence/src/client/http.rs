//! Live chat-completions backend: bearer-auth JSON POST with bounded
//! exponential-backoff retries, rate-limit waits, and request/response
//! logging to JSONL.

use std::fs::{File, OpenOptions};
use std::io::Write as _;
use std::path::Path;
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{ClientError, Message, ModelBackend, Role, TurnContext};

fn default_temperature() -> f64 {
    0.7
}
fn default_top_p() -> f64 {
    1.0
}
fn default_max_tokens() -> u32 {
    1024
}
fn default_api_key_env() -> String {
    "CREDENCE_API_KEY".to_string()
}
fn default_max_in_flight() -> usize {
    4
}

/// Sampling parameters and endpoint for the live backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub model_id: String,
    /// Full chat-completions URL.
    pub endpoint: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_top_p")]
    pub top_p: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    /// Name of the environment variable holding the API key.
    #[serde(default = "default_api_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_max_in_flight")]
    pub max_in_flight: usize,
}

impl GenerationConfig {
    pub fn new(model_id: impl Into<String>, endpoint: impl Into<String>) -> Self {
        Self {
            model_id: model_id.into(),
            endpoint: endpoint.into(),
            temperature: default_temperature(),
            top_p: default_top_p(),
            max_tokens: default_max_tokens(),
            api_key_env: default_api_key_env(),
            max_in_flight: default_max_in_flight(),
        }
    }

    pub fn validate(&self) -> Result<(), ClientError> {
        if self.model_id.is_empty() {
            return Err(ClientError::Config("model_id must not be empty".into()));
        }
        if self.endpoint.is_empty() {
            return Err(ClientError::Config("endpoint must not be empty".into()));
        }
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(ClientError::Config(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        if self.top_p.is_nan() || self.top_p <= 0.0 || self.top_p > 1.0 {
            return Err(ClientError::Config(format!(
                "top_p must be in (0, 1], got {}",
                self.top_p
            )));
        }
        if self.max_tokens < 1 {
            return Err(ClientError::Config("max_tokens must be >= 1".into()));
        }
        Ok(())
    }
}

/// Backoff schedule for transient failures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub base: Duration,
    pub factor: f64,
    pub max_attempts: u32,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { base: Duration::from_secs(1), factor: 2.0, max_attempts: 5 }
    }
}

impl RetryPolicy {
    fn delay(&self, attempt: u32) -> Duration {
        self.base.mul_f64(self.factor.powi(attempt.saturating_sub(1) as i32))
    }
}

pub(crate) struct TransportResponse {
    pub status: u16,
    pub body: String,
    pub retry_after_secs: Option<u64>,
}

/// Seam between retry logic and the wire, swappable in tests.
pub(crate) trait Transport: Send + Sync {
    fn post(
        &self,
        endpoint: &str,
        api_key: &str,
        body: &serde_json::Value,
    ) -> Result<TransportResponse, String>;
}

struct ReqwestTransport {
    client: reqwest::blocking::Client,
}

impl Transport for ReqwestTransport {
    fn post(
        &self,
        endpoint: &str,
        api_key: &str,
        body: &serde_json::Value,
    ) -> Result<TransportResponse, String> {
        let response = self
            .client
            .post(endpoint)
            .bearer_auth(api_key)
            .json(body)
            .send()
            .map_err(|e| e.to_string())?;
        let status = response.status().as_u16();
        let retry_after_secs = response
            .headers()
            .get("retry-after")
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.parse().ok());
        let body = response.text().map_err(|e| e.to_string())?;
        Ok(TransportResponse { status, body, retry_after_secs })
    }
}

pub struct HttpBackend {
    config: GenerationConfig,
    retry: RetryPolicy,
    transport: Box<dyn Transport>,
    log: Option<Mutex<File>>,
}

impl HttpBackend {
    pub fn new(config: GenerationConfig) -> Result<Self, ClientError> {
        config.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| ClientError::Config(e.to_string()))?;
        Ok(Self {
            config,
            retry: RetryPolicy::default(),
            transport: Box::new(ReqwestTransport { client }),
            log: None,
        })
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    /// Appends request/response pairs with timestamps and latency to a
    /// JSONL file.
    pub fn with_log_path(mut self, path: impl AsRef<Path>) -> Result<Self, ClientError> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path.as_ref())
            .map_err(|e| ClientError::Io(format!("{}: {e}", path.as_ref().display())))?;
        self.log = Some(Mutex::new(file));
        Ok(self)
    }

    #[cfg(test)]
    pub(crate) fn with_transport(mut self, transport: Box<dyn Transport>) -> Self {
        self.transport = transport;
        self
    }

    pub fn config(&self) -> &GenerationConfig {
        &self.config
    }

    fn log_event(&self, event: &str, payload: serde_json::Value) {
        if let Some(log) = &self.log {
            let line = json!({
                "ts": chrono::Utc::now().to_rfc3339(),
                "event": event,
                "payload": payload,
            });
            if let Ok(mut file) = log.lock() {
                let _ = writeln!(file, "{line}");
            }
        }
    }

    fn payload(&self, conversation: &[Message]) -> serde_json::Value {
        json!({
            "model": self.config.model_id,
            "messages": conversation
                .iter()
                .map(|m| json!({"role": m.role.as_str(), "content": m.content}))
                .collect::<Vec<_>>(),
            "temperature": self.config.temperature,
            "top_p": self.config.top_p,
            "max_tokens": self.config.max_tokens,
        })
    }

    fn extract_text(body: &str) -> Option<String> {
        let value: serde_json::Value = serde_json::from_str(body).ok()?;
        let text = value.get("choices")?.get(0)?.get("message")?.get("content")?.as_str()?;
        if text.is_empty() {
            None
        } else {
            Some(text.to_string())
        }
    }

    /// Sends the conversation and returns the assistant text. Transient
    /// failures retry with exponential backoff; rate-limit responses wait
    /// the indicated interval; auth and provider refusals surface at once.
    pub fn complete(&self, conversation: &[Message]) -> Result<String, ClientError> {
        if conversation.is_empty() {
            return Err(ClientError::InvalidRequest("conversation is empty".into()));
        }
        if conversation.last().map(|m| m.role) != Some(Role::User) {
            return Err(ClientError::InvalidRequest(
                "conversation must end in a user turn".into(),
            ));
        }
        let api_key = std::env::var(&self.config.api_key_env).map_err(|_| {
            ClientError::Auth(format!(
                "environment variable `{}` is not set",
                self.config.api_key_env
            ))
        })?;

        // The exact payload that goes on the wire, logged before sending.
        let payload = self.payload(conversation);
        self.log_event("request", payload.clone());

        let mut attempt_log = Vec::new();
        for attempt in 1..=self.retry.max_attempts {
            let started = Instant::now();
            let outcome = self.transport.post(&self.config.endpoint, &api_key, &payload);
            let latency_ms = started.elapsed().as_millis() as u64;
            match outcome {
                Err(fault) => {
                    attempt_log.push(format!("attempt {attempt}: transport failure: {fault}"));
                    self.log_event(
                        "error",
                        json!({"attempt": attempt, "latency_ms": latency_ms, "fault": fault}),
                    );
                    if attempt < self.retry.max_attempts {
                        thread::sleep(self.retry.delay(attempt));
                    }
                }
                Ok(response) => match response.status {
                    200..=299 => {
                        let Some(text) = Self::extract_text(&response.body) else {
                            return Err(ClientError::ProviderRefusal {
                                status: response.status,
                                detail: "malformed or empty completion body".into(),
                            });
                        };
                        self.log_event(
                            "response",
                            json!({
                                "attempt": attempt,
                                "latency_ms": latency_ms,
                                "status": response.status,
                                "text": text,
                            }),
                        );
                        return Ok(text);
                    }
                    401 | 403 => {
                        return Err(ClientError::Auth(format!(
                            "provider rejected credentials (status {})",
                            response.status
                        )));
                    }
                    429 => {
                        attempt_log.push(format!("attempt {attempt}: rate limited (429)"));
                        if attempt < self.retry.max_attempts {
                            let wait = response
                                .retry_after_secs
                                .map(Duration::from_secs)
                                .unwrap_or_else(|| self.retry.delay(attempt));
                            thread::sleep(wait);
                        }
                    }
                    500..=599 => {
                        attempt_log
                            .push(format!("attempt {attempt}: server error {}", response.status));
                        if attempt < self.retry.max_attempts {
                            thread::sleep(self.retry.delay(attempt));
                        }
                    }
                    status => {
                        return Err(ClientError::ProviderRefusal {
                            status,
                            detail: response.body.chars().take(200).collect(),
                        });
                    }
                },
            }
        }
        Err(ClientError::Transport {
            attempts: self.retry.max_attempts as usize,
            log: attempt_log,
        })
    }
}

impl ModelBackend for HttpBackend {
    fn model_name(&self) -> &str {
        &self.config.model_id
    }

    fn reply(&self, conversation: &[Message], _ctx: &TurnContext<'_>) -> Result<String, ClientError> {
        self.complete(conversation)
    }

    fn max_in_flight(&self) -> usize {
        self.config.max_in_flight
    }
}
