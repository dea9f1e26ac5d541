//! Workflow orchestration: the three-stage calibration pipeline, the
//! self-calibration baseline, repeat-run experiments, and the command
//! implementations behind the CLI.

pub mod cli;
mod experiment;
mod jsonl;
mod manifest;

pub use experiment::{
    run_experiment, ComparisonSummary, ExperimentReport, SeedFailure, SeedRun, SummaryRow,
};
pub use jsonl::{read_jsonl, write_jsonl};
pub use manifest::{BackendChoice, DatasetKind, DatasetSpec, ExperimentManifest, Mode};

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use thiserror::Error;

use crate::client::{ClientError, FeedbackSnapshot, Message, ModelBackend, TurnContext};
use crate::data::DataError;
use crate::domain::{CalibrationReport, GameState, PredictionRecord, Question};
use crate::game::{self, GameError};
use crate::metrics::{self, MetricsError};
use crate::protocol;
use crate::scoring::ScoringRule;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("no questions to evaluate")]
    EmptyQuestions,
    #[error("no valid records were produced")]
    NoValidRecords,
    #[error("game needs at least one round")]
    EmptyGame,
    #[error("game bank has {available} questions but {requested} rounds were requested")]
    InsufficientBank { requested: usize, available: usize },
    #[error("game aborted: {invalid} of {attempted} rounds were invalid")]
    GameAborted { invalid: usize, attempted: usize },
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("all {0} seeds failed; first failure: {1}")]
    AllSeedsFailed(usize, String),
    #[error("replay mismatch: {0}")]
    Replay(String),
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl PipelineError {
    /// CLI exit code: 3 for provider failures, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Client(_) => 3,
            _ => 2,
        }
    }
}

pub(crate) fn io_error(path: &std::path::Path, err: impl std::fmt::Display) -> PipelineError {
    PipelineError::Io { path: path.display().to_string(), message: err.to_string() }
}

/// Per-stage execution knobs.
#[derive(Debug, Clone, Copy)]
pub struct StageOptions {
    /// Re-asks after an unparseable reply before the record goes invalid.
    pub parse_retries: u32,
    /// Overrides the backend's in-flight limit when set.
    pub in_flight: Option<usize>,
}

impl Default for StageOptions {
    fn default() -> Self {
        Self { parse_retries: 3, in_flight: None }
    }
}

/// Records plus the report computed over them.
#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub records: Vec<PredictionRecord>,
    pub report: CalibrationReport,
}

fn feedback_from_state(state: &GameState) -> Option<FeedbackSnapshot> {
    if state.rounds.is_empty() {
        return None;
    }
    Some(FeedbackSnapshot {
        accuracy_pct: state.totals.accuracy_pct,
        mean_confidence_pct: state.totals.mean_confidence_pct,
        total_score: state.totals.total_score,
    })
}

/// Index-addressed bounded-parallel map; result order matches input
/// order regardless of scheduling.
fn indexed_map<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync,
{
    let workers = workers.clamp(1, items.len().max(1));
    if workers <= 1 {
        return items.iter().enumerate().map(|(i, item)| f(i, item)).collect();
    }
    let cursor = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = items.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let result = f(i, &items[i]);
                *slots[i].lock().expect("result slot") = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.into_inner().expect("result slot").expect("worker filled slot"))
        .collect()
}

/// Asks for one reply and parses it, re-asking with a format reminder up
/// to `retries` times. The conversation accumulates every exchange.
/// Client errors and exhausted retries both yield an invalid record.
fn reply_and_parse(
    conversation: &mut Vec<Message>,
    question: &Question,
    backend: &dyn ModelBackend,
    ctx: &TurnContext<'_>,
    retries: u32,
) -> PredictionRecord {
    for attempt in 0..=retries {
        let text = match backend.reply(conversation, ctx) {
            Ok(text) => text,
            Err(err) => {
                return PredictionRecord::invalid(question, format!("<client error: {err}>"));
            }
        };
        conversation.push(Message::assistant(text.clone()));
        match protocol::parse_reply(&text, question) {
            Ok(record) => return record,
            Err(_) if attempt < retries => {
                conversation.push(Message::user(protocol::format_reminder(question)));
            }
            Err(_) => return PredictionRecord::invalid(question, text),
        }
    }
    unreachable!("loop returns on every path")
}

fn eval_one(
    question: &Question,
    digest: Option<&str>,
    feedback: Option<FeedbackSnapshot>,
    backend: &dyn ModelBackend,
    opts: &StageOptions,
) -> PredictionRecord {
    let mut conversation = vec![Message::user(protocol::eval_prompt(question, digest))];
    let ctx = TurnContext::evaluation(question, feedback);
    reply_and_parse(&mut conversation, question, backend, &ctx, opts.parse_retries)
}

fn eval_stage(
    questions: &[Question],
    digest: Option<&str>,
    feedback: Option<FeedbackSnapshot>,
    backend: &dyn ModelBackend,
    opts: &StageOptions,
) -> Result<EvalOutcome, PipelineError> {
    if questions.is_empty() {
        return Err(PipelineError::EmptyQuestions);
    }
    let workers = opts.in_flight.unwrap_or_else(|| backend.max_in_flight());
    let records = indexed_map(questions, workers, |_, q| {
        eval_one(q, digest, feedback, backend, opts)
    });
    let report = match metrics::report(&records) {
        Ok(report) => report,
        Err(MetricsError::EmptyInput) => return Err(PipelineError::NoValidRecords),
        Err(other) => return Err(other.into()),
    };
    Ok(EvalOutcome { records, report })
}

/// Pre-game evaluation: one prompt per question, no history, no digest.
pub fn run_pre_eval(
    questions: &[Question],
    backend: &dyn ModelBackend,
    opts: &StageOptions,
) -> Result<EvalOutcome, PipelineError> {
    eval_stage(questions, None, None, backend, opts)
}

/// Post-game evaluation: the identical question sequence, with the
/// game-history digest prefixed to every prompt.
pub fn run_post_eval(
    questions: &[Question],
    state: &GameState,
    backend: &dyn ModelBackend,
    opts: &StageOptions,
) -> Result<EvalOutcome, PipelineError> {
    let digest = game::render_final_digest(state)?;
    eval_stage(questions, Some(&digest), feedback_from_state(state), backend, opts)
}

/// Runs the calibration game: rules prompt, readiness handshake, then
/// one scored round per question with feedback folded into the next
/// turn. Aborts once more than half the attempted rounds are invalid.
pub fn run_game(
    bank: &[Question],
    n_rounds: usize,
    rule: &ScoringRule,
    backend: &dyn ModelBackend,
    opts: &StageOptions,
) -> Result<GameState, PipelineError> {
    if n_rounds == 0 {
        return Err(PipelineError::EmptyGame);
    }
    if n_rounds > bank.len() {
        return Err(PipelineError::InsufficientBank {
            requested: n_rounds,
            available: bank.len(),
        });
    }

    let mut conversation = vec![Message::user(protocol::rules_prompt(rule))];
    let handshake = backend.reply(&conversation, &TurnContext::handshake())?;
    conversation.push(Message::assistant(handshake));

    let mut state = GameState::new(rule.id());
    let mut pending_feedback: Option<String> = None;
    let mut invalid = 0usize;

    for (i, question) in bank[..n_rounds].iter().enumerate() {
        let attempted = i + 1;
        let mut turn = String::new();
        if let Some(feedback) = pending_feedback.take() {
            turn.push_str(&feedback);
            turn.push_str("\n\n");
        }
        turn.push_str(&protocol::game_round_prompt(question, attempted));
        conversation.push(Message::user(turn));

        let ctx = TurnContext::game_round(question, feedback_from_state(&state));
        let record =
            reply_and_parse(&mut conversation, question, backend, &ctx, opts.parse_retries);
        if record.valid {
            let round = state.apply_round(record, rule)?;
            pending_feedback = Some(game::round_feedback(round));
        } else {
            invalid += 1;
            if invalid * 2 > attempted {
                return Err(PipelineError::GameAborted { invalid, attempted });
            }
        }
    }
    Ok(state)
}

fn self_cal_one(
    question: &Question,
    backend: &dyn ModelBackend,
    opts: &StageOptions,
) -> PredictionRecord {
    let mut conversation = vec![Message::user(protocol::eval_prompt(question, None))];
    let ctx = TurnContext::self_cal_answer(question);
    let mut record =
        reply_and_parse(&mut conversation, question, backend, &ctx, opts.parse_retries);
    if !record.valid {
        return record;
    }

    let prior = if record.canonical_answer.is_empty() {
        record.raw_answer.clone()
    } else {
        record.canonical_answer.clone()
    };
    let followup = match protocol::self_cal_followup(&prior) {
        Ok(text) => text,
        Err(_) => {
            record.valid = false;
            return record;
        }
    };
    conversation.push(Message::user(followup));

    let reflect_ctx = TurnContext::self_cal_reflection(question);
    for attempt in 0..=opts.parse_retries {
        let text = match backend.reply(&conversation, &reflect_ctx) {
            Ok(text) => text,
            Err(_) => {
                record.valid = false;
                return record;
            }
        };
        conversation.push(Message::assistant(text.clone()));
        match protocol::parse_reflection_confidence(&text) {
            Ok(confidence) => {
                // The self-assessment replaces the first-turn confidence.
                record.verbalized_confidence = confidence;
                record.normalized_confidence = f64::from(confidence) / 100.0;
                return record;
            }
            Err(_) if attempt < opts.parse_retries => {
                conversation.push(Message::user(protocol::reflection_reminder()));
            }
            Err(_) => {
                record.valid = false;
                return record;
            }
        }
    }
    unreachable!("loop returns on every path")
}

/// Self-calibration baseline: answer turn, then a reflection turn whose
/// confidence becomes the record's confidence signal.
pub fn run_self_cal(
    questions: &[Question],
    backend: &dyn ModelBackend,
    opts: &StageOptions,
) -> Result<EvalOutcome, PipelineError> {
    if questions.is_empty() {
        return Err(PipelineError::EmptyQuestions);
    }
    let workers = opts.in_flight.unwrap_or_else(|| backend.max_in_flight());
    let records = indexed_map(questions, workers, |_, q| self_cal_one(q, backend, opts));
    let report = match metrics::report(&records) {
        Ok(report) => report,
        Err(MetricsError::EmptyInput) => return Err(PipelineError::NoValidRecords),
        Err(other) => return Err(other.into()),
    };
    Ok(EvalOutcome { records, report })
}
