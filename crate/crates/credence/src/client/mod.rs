//! Provider-agnostic chat backends: a live HTTP chat-completions client
//! and a deterministic simulated agent for API-free runs.
//!
//! The pipeline talks to both through [`ModelBackend`]. The live backend
//! reads only the rendered conversation; the simulated backend reads the
//! structured question and feedback snapshot instead.

mod http;
mod simulated;

pub use http::{GenerationConfig, HttpBackend, RetryPolicy};
pub use simulated::{AgentPolicy, SimulatedAgent};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::Question;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClientError {
    /// Transient transport failure that survived every retry. Carries
    /// the per-attempt log.
    #[error("transport_error after {attempts} attempts: {}", log.join("; "))]
    Transport { attempts: usize, log: Vec<String> },
    #[error("auth_error: {0}")]
    Auth(String),
    /// Non-retryable provider rejection.
    #[error("provider_refusal (status {status}): {detail}")]
    ProviderRefusal { status: u16, detail: String },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("invalid generation config: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

/// One conversation turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: Role::Assistant, content: content.into() }
    }
}

/// What stage of the workflow a reply is being requested for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TurnKind {
    GameHandshake,
    GameRound,
    Evaluation,
    SelfCalAnswer,
    SelfCalReflection,
}

/// Running score and calibration status, as fed back to a simulated
/// agent between rounds or carried by a post-game digest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedbackSnapshot {
    pub accuracy_pct: f64,
    pub mean_confidence_pct: f64,
    pub total_score: i64,
}

/// Structured context accompanying one reply request.
#[derive(Debug, Clone, Copy)]
pub struct TurnContext<'a> {
    pub kind: TurnKind,
    pub question: Option<&'a Question>,
    pub feedback: Option<FeedbackSnapshot>,
}

impl<'a> TurnContext<'a> {
    pub fn handshake() -> Self {
        Self { kind: TurnKind::GameHandshake, question: None, feedback: None }
    }

    pub fn evaluation(question: &'a Question, feedback: Option<FeedbackSnapshot>) -> Self {
        Self { kind: TurnKind::Evaluation, question: Some(question), feedback }
    }

    pub fn game_round(question: &'a Question, feedback: Option<FeedbackSnapshot>) -> Self {
        Self { kind: TurnKind::GameRound, question: Some(question), feedback }
    }

    pub fn self_cal_answer(question: &'a Question) -> Self {
        Self { kind: TurnKind::SelfCalAnswer, question: Some(question), feedback: None }
    }

    pub fn self_cal_reflection(question: &'a Question) -> Self {
        Self { kind: TurnKind::SelfCalReflection, question: Some(question), feedback: None }
    }
}

/// A model that can answer one more turn of a conversation.
pub trait ModelBackend: Send + Sync {
    /// Name recorded in histories and reports.
    fn model_name(&self) -> &str;

    /// Produces the assistant text for the next turn.
    fn reply(&self, conversation: &[Message], ctx: &TurnContext<'_>) -> Result<String, ClientError>;

    /// How many requests may be in flight concurrently.
    fn max_in_flight(&self) -> usize {
        4
    }
}
