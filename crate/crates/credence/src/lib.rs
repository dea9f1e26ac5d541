//! Confidence calibration harness for LLMs built around the Credence
//! Calibration Game: a feedback-driven question game under a proper
//! scoring rule, bracketed by before/after evaluations that report
//! ECE, Brier score, AUROC, and accuracy.
//!
//! The workflow has three stages. A pre-game evaluation measures the
//! model's unconditioned calibration. The game then plays two-choice
//! questions round by round, scoring each answer's confidence and
//! feeding the running score, mean confidence, and calibration status
//! back into the conversation. A post-game evaluation repeats the
//! first stage with a digest of the game history prefixed to every
//! prompt. Runs work against a live chat-completions endpoint or a
//! deterministic simulated agent.
//!
//! Start with the runnable examples:
//!
//! ```bash
//! cargo run -p credence --example scoring_rules
//! cargo run -p credence --example golden_transcript
//! cargo run -p credence --example calibration_metrics
//! cargo run -p credence --example parse_replies
//! cargo run -p credence --example dataset_loading
//! cargo run -p credence --example simulated_experiment
//! cargo run -p credence --example round_size_ablation
//! ```
//!
//! The `credence` binary exposes the same pipeline as `run`, `replay`,
//! `report`, and `plot-data` subcommands.

pub mod client;
pub mod data;
pub mod domain;
pub mod game;
pub mod metrics;
pub mod pipeline;
pub mod protocol;
pub mod scoring;

pub(crate) mod seeded;

pub use client::{AgentPolicy, GenerationConfig, HttpBackend, ModelBackend, SimulatedAgent};
pub use domain::{
    CalibrationReport, CalibrationStatus, Choice, ConfidenceLevel, GameState, GameTotals, Gold,
    PredictionRecord, Question, QuestionKind, ReliabilityBin, RoundRecord, ScoringRuleId,
};
pub use metrics::MetricsDelta;
pub use scoring::ScoringRule;
